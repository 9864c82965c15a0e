#include "sinit/initializers.hpp"

#include <array>
#include <cmath>
#include <iostream>
#include <mutex>
#include <numbers>
#include <utility>

#include "json.hpp"

#include "sinit/error.hpp"
#include "sinit/linalg.hpp"
#include "sinit/sampling.hpp"
#include "sinit/stats.hpp"

namespace sinit {

namespace {

constexpr std::array<std::pair<InitTag, std::string_view>, 11> kTagNames = {{
    {InitTag::sinusoidal, "sinusoidal"},
    {InitTag::glorot_uniform, "glorot_uniform"},
    {InitTag::glorot_normal, "glorot_normal"},
    {InitTag::he_uniform, "he_uniform"},
    {InitTag::he_normal, "he_normal"},
    {InitTag::orthogonal, "orthogonal"},
    {InitTag::lsuv, "lsuv"},
    {InitTag::plain_normal, "normal"},
    {InitTag::plain_uniform, "uniform"},
    {InitTag::truncated_normal, "truncated_normal"},
    {InitTag::arcsine_random, "arcsine_random"},
}};

// Values of the a = 1 pattern below this are treated as zero variance.
constexpr double kDegenerateVariance = 1e-20;

std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& warning_handler() {
  static WarningHandler handler = [](const Warning& w) {
    nlohmann::json j = {{"warning", w.code}, {"message", w.message}};
    std::cerr << j.dump() << '\n';
  };
  return handler;
}

double dim(std::size_t x) { return static_cast<double>(x); }

}  // namespace

void validate(const LayerShape& shape) {
  require(shape.fan_in >= 1 && shape.fan_out >= 1, Errc::invalid_parameter,
          "layer shape needs fan_in >= 1 and fan_out >= 1");
}

LayerShape flatten_conv_shape(std::size_t out_channels, std::size_t in_channels, std::size_t kh,
                              std::size_t kw) {
  require(out_channels >= 1 && in_channels >= 1 && kh >= 1 && kw >= 1, Errc::invalid_parameter,
          "flatten_conv_shape: all dimensions must be >= 1");
  return {.fan_in = in_channels * kh * kw, .fan_out = out_channels};
}

std::string_view to_string(InitTag tag) noexcept {
  for (const auto& [t, name] : kTagNames)
    if (t == tag) return name;
  return "unknown";
}

InitTag parse_init_tag(std::string_view name) {
  for (const auto& [t, n] : kTagNames)
    if (n == name) return t;
  fail(Errc::config, "unknown initialization scheme '" + std::string(name) + "'");
}

std::vector<InitTag> all_init_tags() {
  std::vector<InitTag> out;
  for (const auto& [t, name] : kTagNames) out.push_back(t);
  return out;
}

void validate(const InitScheme& s) {
  switch (s.tag) {
    case InitTag::orthogonal:
    case InitTag::lsuv:
      require(std::isfinite(s.gain) && s.gain > 0.0, Errc::invalid_parameter,
              "gain must be positive");
      if (s.tag == InitTag::lsuv)
        require(std::isfinite(s.lsuv_tol) && s.lsuv_tol > 0.0, Errc::invalid_parameter,
                "lsuv tolerance must be positive");
      break;
    case InitTag::plain_normal:
      require(std::isfinite(s.std) && s.std >= 0.0, Errc::invalid_parameter,
              "normal std must be non-negative");
      break;
    case InitTag::truncated_normal:
      require(std::isfinite(s.std) && s.std > 0.0, Errc::invalid_parameter,
              "truncated normal std must be positive");
      require(std::isfinite(s.cutoff) && s.cutoff > 0.0, Errc::invalid_parameter,
              "truncated normal cutoff must be positive");
      break;
    case InitTag::plain_uniform:
      require(std::isfinite(s.lo) && std::isfinite(s.hi) && s.lo <= s.hi,
              Errc::invalid_parameter, "uniform bounds must satisfy lo <= hi");
      break;
    default:
      break;
  }
}

bool is_deterministic(InitTag tag) noexcept { return tag == InitTag::sinusoidal; }

double compute_amplitude(std::size_t m, std::size_t n, double v) {
  require(std::isfinite(v) && v > 0.0, Errc::degenerate_spec,
          "compute_amplitude: pattern variance must be positive");
  return std::sqrt(2.0 / (dim(m + n) * v));
}

SinusoidalLayer sinusoidal_layer(std::size_t m, std::size_t n) {
  require(m >= 1 && n >= 1, Errc::invalid_parameter, "sinusoidal_matrix: m and n must be >= 1");
  constexpr double two_pi = 2.0 * std::numbers::pi;

  SinusoidalLayer out;
  out.weights = Matrix(m, n);
  for (std::size_t i = 1; i <= m; ++i) {
    if (i % n == 0) out.degenerate_rows.push_back(i);
    const double phase = dim(i % m) / dim(m);
    auto row = out.weights.row(i - 1);
    for (std::size_t j = 1; j <= n; ++j) {
      const double cycles = dim((i * j) % n) / dim(n) + phase;
      row[j - 1] = std::sin(two_pi * cycles);
    }
  }

  out.unit_variance = population_stats(out.weights).population_variance;
  require(out.unit_variance > kDegenerateVariance, Errc::degenerate_spec,
          "sinusoidal_matrix: the a=1 pattern for m=" + std::to_string(m) +
              ", n=" + std::to_string(n) + " has zero variance");
  out.amplitude = compute_amplitude(m, n, out.unit_variance);
  out.weights *= out.amplitude;

  if (m >= n) {
    emit_warning({"sinusoidal_degenerate_rows",
                  "m=" + std::to_string(m) + " >= n=" + std::to_string(n) + ": " +
                      std::to_string(out.degenerate_rows.size()) +
                      " row(s) with i mod n = 0 are constant and do not sum to zero"});
  }
  return out;
}

Matrix sinusoidal_matrix(std::size_t m, std::size_t n) { return sinusoidal_layer(m, n).weights; }

Matrix random_matrix(const InitScheme& scheme, const LayerShape& shape, Rng& rng) {
  validate(shape);
  validate(scheme);
  const double m = dim(shape.fan_out);
  const double n = dim(shape.fan_in);
  const Shape dims{shape.fan_out, shape.fan_in};
  switch (scheme.tag) {
    case InitTag::glorot_normal:
      return sample_normal(rng, 0.0, std::sqrt(2.0 / (m + n)), dims);
    case InitTag::glorot_uniform: {
      const double bound = std::sqrt(6.0 / (m + n));
      return sample_uniform(rng, -bound, bound, dims);
    }
    case InitTag::he_normal:
      return sample_normal(rng, 0.0, std::sqrt(2.0 / n), dims);
    case InitTag::he_uniform: {
      const double bound = std::sqrt(6.0 / n);
      return sample_uniform(rng, -bound, bound, dims);
    }
    case InitTag::plain_normal:
      return sample_normal(rng, 0.0, scheme.std, dims);
    case InitTag::plain_uniform:
      return sample_uniform(rng, scheme.lo, scheme.hi, dims);
    case InitTag::truncated_normal:
      return sample_truncated_normal(rng, scheme.std, scheme.cutoff, dims);
    default:
      fail(Errc::invalid_parameter, "random_matrix does not handle scheme '" +
                                        std::string(to_string(scheme.tag)) + "'");
  }
}

Matrix orthogonal_matrix(const LayerShape& shape, Rng& rng, double gain) {
  validate(shape);
  require(std::isfinite(gain) && gain > 0.0, Errc::invalid_parameter,
          "orthogonal_matrix: gain must be positive");
  Matrix w = shape.fan_out <= shape.fan_in
                 ? qr_orthonormal(rng, shape.fan_in, shape.fan_out).transposed()
                 : qr_orthonormal(rng, shape.fan_out, shape.fan_in);
  w *= gain;
  return w;
}

double arcsine_random_amplitude(const LayerShape& shape) {
  validate(shape);
  return std::sqrt(4.0 / dim(shape.fan_in + shape.fan_out));
}

Matrix arcsine_random_matrix(const LayerShape& shape, Rng& rng) {
  const double a = arcsine_random_amplitude(shape);
  Matrix out(shape.fan_out, shape.fan_in);
  for (double& x : out.values()) x = a * std::sin(2.0 * std::numbers::pi * rng.uniform());
  return out;
}

LsuvResult lsuv_adjust(Matrix weights, const Matrix& probe_batch, double tol,
                       std::size_t max_iters) {
  require(std::isfinite(tol) && tol > 0.0, Errc::invalid_parameter,
          "lsuv_adjust: tolerance must be positive");
  require(probe_batch.cols() == weights.cols(), Errc::shape_mismatch,
          "lsuv_adjust: probe batch width " + std::to_string(probe_batch.cols()) +
              " does not match fan-in " + std::to_string(weights.cols()));
  require(probe_batch.rows() >= 1, Errc::degenerate_batch, "lsuv_adjust: empty probe batch");

  auto output_variance = [&](const Matrix& w) {
    return population_stats(matmul_nt(probe_batch, w)).population_variance;
  };

  LsuvResult result;
  double variance = output_variance(weights);
  while (result.iterations < max_iters && std::abs(variance - 1.0) > tol) {
    require(variance > 0.0, Errc::degenerate_batch,
            "lsuv_adjust: probe outputs have zero variance");
    weights *= 1.0 / std::sqrt(variance);
    ++result.iterations;
    variance = output_variance(weights);
  }
  result.weights = std::move(weights);
  result.achieved_variance = variance;
  return result;
}

Matrix initialize(const InitScheme& scheme, const LayerShape& shape, Rng& rng) {
  validate(shape);
  validate(scheme);
  switch (scheme.tag) {
    case InitTag::sinusoidal:
      return sinusoidal_matrix(shape.fan_out, shape.fan_in);
    case InitTag::orthogonal:
      return orthogonal_matrix(shape, rng, scheme.gain);
    case InitTag::arcsine_random:
      return arcsine_random_matrix(shape, rng);
    case InitTag::lsuv:
      fail(Errc::invalid_parameter, "lsuv needs a probe batch; build it through build_mlp");
    default:
      return random_matrix(scheme, shape, rng);
  }
}

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(warning_mutex());
  return std::exchange(warning_handler(), std::move(handler));
}

void emit_warning(const Warning& warning) {
  std::lock_guard lock(warning_mutex());
  if (warning_handler()) warning_handler()(warning);
}

}  // namespace sinit
