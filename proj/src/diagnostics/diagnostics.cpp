#include "sinit/diagnostics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "sinit/error.hpp"
#include "sinit/sampling.hpp"
#include "sinit/special.hpp"
#include "sinit/stats.hpp"

namespace sinit {

namespace {

std::size_t count_blocks(std::size_t mc_samples) { return (mc_samples + kMcBlock - 1) / kMcBlock; }

std::size_t block_rows(std::size_t block, std::size_t mc_samples) {
  return std::min(kMcBlock, mc_samples - block * kMcBlock);
}

void count_positive(const Matrix& z, std::vector<std::size_t>& counts) {
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const auto row = z.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) counts[c] += row[c] > 0.0 ? 1 : 0;
  }
}

std::vector<double> to_fractions(const std::vector<std::size_t>& counts, std::size_t total) {
  std::vector<double> out(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    out[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  return out;
}

}  // namespace

Matrix InputSampler::draw(Rng& rng, std::size_t rows) const {
  Matrix out(rows, dim);
  fill(rng, out);
  return out;
}

InputSampler gaussian_sampler(std::size_t dim) {
  return {dim, [](Rng& rng, Matrix& out) {
            for (double& x : out.values()) x = rng.normal();
          }};
}

InputSampler symmetric_uniform_sampler(std::size_t dim) {
  return {dim, [](Rng& rng, Matrix& out) {
            const double bound = std::sqrt(3.0);
            for (double& x : out.values()) x = bound * (2.0 * rng.uniform() - 1.0);
          }};
}

InputSampler rectified_gaussian_sampler(std::size_t dim) {
  return {dim, [](Rng& rng, Matrix& out) {
            for (double& x : out.values()) x = std::max(rng.normal(), 0.0);
          }};
}

InputSampler shifted_rectified_sampler(double mean, double std, std::vector<double> scales) {
  require(std::isfinite(mean) && std::isfinite(std) && std > 0.0, Errc::invalid_parameter,
          "shifted_rectified_sampler: needs finite mean and positive std");
  const std::size_t dim = scales.size();
  return {dim, [mean, std, scales = std::move(scales)](Rng& rng, Matrix& out) {
            const double unit = 1.0 / std::sqrt(kRectifiedVariance);
            for (std::size_t r = 0; r < out.rows(); ++r) {
              auto row = out.row(r);
              for (std::size_t c = 0; c < row.size(); ++c) {
                const double centred = (std::max(rng.normal(), 0.0) - kRectifiedMean) * unit;
                row[c] = mean + std * scales[c] * centred;
              }
            }
          }};
}

InputSampler distribution_sampler(InputDistribution d, std::size_t dim) {
  return d == InputDistribution::standard_normal ? gaussian_sampler(dim)
                                                 : symmetric_uniform_sampler(dim);
}

std::vector<double> row_sums(const Matrix& weights) {
  require(!weights.empty(), Errc::invalid_parameter, "row_sums: empty matrix");
  std::vector<double> out(weights.rows());
  for (std::size_t r = 0; r < weights.rows(); ++r) {
    const auto row = weights.row(r);
    out[r] = std::accumulate(row.begin(), row.end(), 0.0);
  }
  return out;
}

void validate(const ThresholdParams& p) {
  require(p.n >= 1, Errc::invalid_parameter, "threshold: n must be >= 1");
  require(std::isfinite(p.theta) && p.theta > 0.0, Errc::invalid_parameter,
          "threshold: theta must be positive");
  require(std::isfinite(p.sigma) && p.sigma > 0.0, Errc::invalid_parameter,
          "threshold: sigma must be positive");
  require(std::isfinite(p.mu) && p.mu != 0.0, Errc::invalid_parameter,
          "threshold: mu must be non-zero");
  require(p.alpha > 0.0 && p.alpha < 0.5, Errc::domain, "threshold: alpha must lie in (0, 1/2)");
}

double lambda_threshold(const ThresholdParams& p) {
  validate(p);
  return p.theta * p.sigma * std::sqrt(static_cast<double>(p.n)) / p.mu *
         normal_quantile(0.5 + p.alpha);
}

std::vector<double> estimate_activation_prob(const Matrix& weights, const InputSampler& sampler,
                                             std::size_t mc_samples, const Rng& rng) {
  require(mc_samples >= 1, Errc::invalid_parameter, "estimate_activation_prob: mc_samples < 1");
  require(sampler.dim == weights.cols(), Errc::shape_mismatch,
          "estimate_activation_prob: sampler dimension " + std::to_string(sampler.dim) +
              " does not match fan-in " + std::to_string(weights.cols()));
  std::vector<std::size_t> counts(weights.rows(), 0);
  for (std::size_t b = 0; b < count_blocks(mc_samples); ++b) {
    Rng block_rng = rng.child(static_cast<std::uint64_t>(b));
    const Matrix x = sampler.draw(block_rng, block_rows(b, mc_samples));
    count_positive(matmul_nt(x, weights), counts);
  }
  return to_fractions(counts, mc_samples);
}

SkewClassification classify_skewed(std::span<const double> p_positive, double alpha) {
  require(alpha > 0.0 && alpha < 0.5, Errc::domain, "classify_skewed: alpha must lie in (0, 1/2)");
  SkewClassification out;
  out.is_skewed.resize(p_positive.size());
  // Against the endpoints: |0.8 − 0.5| rounds above 0.3, 0.5 + 0.3 does not.
  const double hi = 0.5 + alpha;
  const double lo = 0.5 - alpha;
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < p_positive.size(); ++i) {
    out.is_skewed[i] = p_positive[i] > hi || p_positive[i] < lo ? 1 : 0;
    flagged += out.is_skewed[i];
  }
  out.skewed_fraction =
      p_positive.empty() ? 0.0
                         : static_cast<double>(flagged) / static_cast<double>(p_positive.size());
  return out;
}

std::vector<std::vector<double>> network_activation_probs(const MlpState& model,
                                                          const InputSampler& sampler,
                                                          std::size_t mc_samples, const Rng& rng) {
  require(mc_samples >= 1, Errc::invalid_parameter, "network_activation_probs: mc_samples < 1");
  require(sampler.dim == model.spec.input_dim(), Errc::shape_mismatch,
          "network_activation_probs: sampler dimension does not match the network input");
  std::vector<std::vector<std::size_t>> counts;
  for (const auto& layer : model.layers) counts.emplace_back(layer.weight.rows(), 0);
  for (std::size_t b = 0; b < count_blocks(mc_samples); ++b) {
    Rng block_rng = rng.child(static_cast<std::uint64_t>(b));
    const Matrix x = sampler.draw(block_rng, block_rows(b, mc_samples));
    const ForwardResult fwd = forward_capture(model, x);
    for (std::size_t l = 0; l < counts.size(); ++l)
      count_positive(fwd.trace.preactivations[l], counts[l]);
  }
  std::vector<std::vector<double>> out;
  for (const auto& c : counts) out.push_back(to_fractions(c, mc_samples));
  return out;
}

SkewTable skew_table(const MlpState& model, std::size_t layer, const InputSampler& sampler,
                     std::span<const double> alphas, std::size_t mc_samples, const Rng& rng) {
  require(layer < model.layers.size(), Errc::invalid_parameter,
          "skew_table: layer " + std::to_string(layer) + " does not exist");
  SkewTable table;
  table.layer = layer;
  table.alphas.assign(alphas.begin(), alphas.end());
  table.s_values = row_sums(model.layers[layer].weight);
  table.p_positive = network_activation_probs(model, sampler, mc_samples, rng)[layer];
  for (double a : alphas)
    table.skewed_fraction.push_back(classify_skewed(table.p_positive, a).skewed_fraction);
  return table;
}

std::vector<double> alternating_scales(std::size_t n, double low, double high) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i % 2 == 0 ? low : high;
  return out;
}

ThresholdMcResult threshold_equivalence_mc(const ThresholdParams& params, std::size_t neurons,
                                           std::size_t mc_samples, const Rng& rng,
                                           std::span<const double> sigma_scales) {
  validate(params);
  require(neurons >= 1, Errc::invalid_parameter, "threshold_equivalence_mc: neurons < 1");
  std::vector<double> scales(sigma_scales.begin(), sigma_scales.end());
  if (scales.empty()) scales.assign(params.n, 1.0);
  require(scales.size() == params.n, Errc::shape_mismatch,
          "threshold_equivalence_mc: sigma schedule length must equal n");
  double mean_square = 0.0;
  for (double s : scales) {
    require(std::isfinite(s) && s > 0.0, Errc::invalid_parameter,
            "threshold_equivalence_mc: sigma scales must be positive");
    mean_square += s * s;
  }
  mean_square /= static_cast<double>(scales.size());

  ThresholdParams effective = params;
  effective.sigma = params.sigma * std::sqrt(mean_square);

  ThresholdMcResult result;
  result.lambda = lambda_threshold(effective);
  result.n = params.n;
  result.neurons = neurons;
  result.mc_samples = mc_samples;

  Rng weight_rng = rng.child("weights");
  const Matrix w = sample_normal(weight_rng, 0.0, params.theta, {neurons, params.n});
  const auto s = row_sums(w);
  const InputSampler sampler = shifted_rectified_sampler(params.mu, params.sigma, scales);
  const auto p = estimate_activation_prob(w, sampler, mc_samples, rng.child("inputs"));
  const auto empirical = classify_skewed(p, params.alpha);

  std::size_t agree = 0;
  std::size_t predicted = 0;
  for (std::size_t i = 0; i < neurons; ++i) {
    const bool by_s = std::abs(s[i]) > result.lambda;
    predicted += by_s ? 1 : 0;
    agree += (by_s == (empirical.is_skewed[i] != 0)) ? 1 : 0;
  }
  const double total = static_cast<double>(neurons);
  result.agreement = static_cast<double>(agree) / total;
  result.empirical_skewed = empirical.skewed_fraction;
  result.predicted_skewed = static_cast<double>(predicted) / total;
  return result;
}

OuiReport oui(const Matrix& states, std::size_t layer) {
  require(states.rows() >= 2, Errc::invalid_parameter, "oui: needs at least two samples");
  require(states.cols() >= 1, Errc::invalid_parameter, "oui: needs at least one neuron");
  const std::size_t samples = states.rows();
  const std::size_t neurons = states.cols();
  const std::size_t words = (neurons + 63) / 64;

  std::vector<std::uint64_t> bits(samples * words, 0);
  for (std::size_t r = 0; r < samples; ++r) {
    const auto row = states.row(r);
    for (std::size_t c = 0; c < neurons; ++c)
      if (row[c] > 0.0) bits[r * words + c / 64] |= std::uint64_t{1} << (c % 64);
  }

  double total = 0.0;
  for (std::size_t a = 0; a < samples; ++a) {
    const std::uint64_t* pa = bits.data() + a * words;
    for (std::size_t b = a + 1; b < samples; ++b) {
      const std::uint64_t* pb = bits.data() + b * words;
      std::size_t differing = 0;
      for (std::size_t w = 0; w < words; ++w) differing += std::popcount(pa[w] ^ pb[w]);
      const double h = static_cast<double>(differing) / static_cast<double>(neurons);
      total += 2.0 * std::min(h, 1.0 - h);
    }
  }
  const double pairs = 0.5 * static_cast<double>(samples) * static_cast<double>(samples - 1);
  return {.value = std::clamp(total / pairs, 0.0, 1.0),
          .layer = layer,
          .samples = samples,
          .neurons = neurons};
}

GrayImage activation_bitmap(const ForwardTrace& trace, std::size_t layer,
                            std::size_t sample_limit, std::size_t neuron_limit) {
  require(layer < trace.states.size(), Errc::invalid_parameter,
          "activation_bitmap: layer " + std::to_string(layer) + " not in trace");
  const Matrix& states = trace.states[layer];
  GrayImage img;
  img.height = std::min(states.rows(), sample_limit);
  img.width = std::min(states.cols(), neuron_limit);
  img.pixels.resize(img.height * img.width);
  for (std::size_t r = 0; r < img.height; ++r)
    for (std::size_t c = 0; c < img.width; ++c)
      img.pixels[r * img.width + c] = states(r, c) > 0.0 ? 255 : 0;
  return img;
}

SHistogram s_histogram(std::span<const double> s_values, std::span<const std::uint8_t> is_skewed,
                       std::size_t bins) {
  require(bins >= 1, Errc::invalid_parameter, "s_histogram: bins must be >= 1");
  require(s_values.size() == is_skewed.size(), Errc::shape_mismatch,
          "s_histogram: S values and skew flags differ in length");
  SHistogram h;
  h.skewed.assign(bins, 0);
  h.balanced.assign(bins, 0);
  if (s_values.empty()) {
    h.edges.assign(bins + 1, 0.0);
    return h;
  }
  const auto [lo_it, hi_it] = std::minmax_element(s_values.begin(), s_values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(lo + width * static_cast<double>(b));
  h.edges.back() = hi;
  for (std::size_t i = 0; i < s_values.size(); ++i) {
    std::size_t bin = 0;
    if (hi > lo) {
      const double pos = (s_values[i] - lo) / (hi - lo) * static_cast<double>(bins);
      bin = std::min(bins - 1, static_cast<std::size_t>(std::max(0.0, pos)));
    }
    (is_skewed[i] ? h.skewed : h.balanced)[bin] += 1;
  }
  return h;
}

MlpSpec depth_spec(std::size_t input_dim, const std::vector<std::size_t>& widths,
                   const std::vector<InitScheme>& schemes) {
  require(!widths.empty(), Errc::invalid_parameter, "depth_spec: depth must be >= 1");
  require(schemes.size() == widths.size(), Errc::invalid_parameter,
          "depth_spec: need one scheme per layer");
  MlpSpec spec;
  spec.layer_sizes.push_back(input_dim);
  spec.layer_sizes.insert(spec.layer_sizes.end(), widths.begin(), widths.end());
  spec.hidden_activations.assign(widths.size() - 1, Activation::relu);
  spec.init = schemes;
  spec.leading_relu = true;
  return spec;
}

std::vector<LayerSkew> depth_propagation(const MlpState& model, const InputSampler& sampler,
                                         double alpha, std::size_t mc_samples, const Rng& rng) {
  const auto probs = network_activation_probs(model, sampler, mc_samples, rng);
  std::vector<LayerSkew> out;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    LayerSkew ls;
    ls.layer = l;
    ls.s_values = row_sums(model.layers[l].weight);
    ls.p_positive = probs[l];
    auto cls = classify_skewed(ls.p_positive, alpha);
    ls.is_skewed = std::move(cls.is_skewed);
    ls.skewed_fraction = cls.skewed_fraction;
    std::vector<double> magnitude(ls.s_values.size());
    std::vector<double> flag(ls.s_values.size());
    for (std::size_t i = 0; i < magnitude.size(); ++i) {
      magnitude[i] = std::abs(ls.s_values[i]);
      flag[i] = ls.is_skewed[i];
    }
    ls.rank_correlation = spearman(magnitude, flag);
    out.push_back(std::move(ls));
  }
  return out;
}

}  // namespace sinit
