#include "sinit/network.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "sinit/error.hpp"
#include "sinit/sampling.hpp"

namespace sinit {

namespace {

constexpr std::array<std::pair<Activation, std::string_view>, 6> kActivationNames = {{
    {Activation::relu, "relu"},
    {Activation::gelu, "gelu"},
    {Activation::silu, "silu"},
    {Activation::hardswish, "hardswish"},
    {Activation::tanh, "tanh"},
    {Activation::identity, "identity"},
}};

// √(2/π) and the cubic coefficient of the tanh GeLU approximation.
constexpr double kGeluScale = 0.7978845608028654;
constexpr double kGeluCubic = 0.044715;

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void add_bias(Matrix& z, std::span<const double> bias) {
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias[c];
  }
}

Matrix apply(Activation a, const Matrix& z) {
  Matrix out = z;
  if (a == Activation::identity) return out;
  for (double& x : out.values()) x = activate(a, x);
  return out;
}

Matrix relu(const Matrix& x) { return apply(Activation::relu, x); }

Matrix binary_states(const Matrix& z) {
  Matrix out(z.rows(), z.cols());
  const auto src = z.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0 ? 1.0 : 0.0;
  return out;
}

void check_inputs(const MlpState& state, const Matrix& inputs) {
  require(inputs.cols() == state.spec.input_dim(), Errc::shape_mismatch,
          "network expects inputs of width " + std::to_string(state.spec.input_dim()) +
              ", got " + std::to_string(inputs.cols()));
}

void check_labels(const MlpState& state, const Matrix& inputs,
                  std::span<const std::size_t> labels) {
  require(labels.size() == inputs.rows(), Errc::shape_mismatch,
          "label count does not match batch size");
  const std::size_t classes = state.spec.output_dim();
  for (std::size_t y : labels)
    require(y < classes, Errc::label_out_of_range,
            "label " + std::to_string(y) + " out of range for " + std::to_string(classes) +
                " classes");
}

// Hidden activations and preactivations of every layer, kept for backprop.
struct Cache {
  std::vector<Matrix> layer_inputs;  // input to linear layer l
  std::vector<Matrix> preactivations;
};

Cache run_forward(const MlpState& state, const Matrix& inputs) {
  check_inputs(state, inputs);
  Cache cache;
  const std::size_t depth = state.layers.size();
  Matrix h = state.spec.leading_relu ? relu(inputs) : inputs;
  for (std::size_t l = 0; l < depth; ++l) {
    Matrix z = matmul_nt(h, state.layers[l].weight);
    add_bias(z, state.layers[l].bias);
    cache.layer_inputs.push_back(std::move(h));
    if (l + 1 < depth) h = apply(state.spec.hidden_activations[l], z);
    cache.preactivations.push_back(std::move(z));
  }
  return cache;
}

}  // namespace

std::string_view to_string(Activation a) noexcept {
  for (const auto& [t, name] : kActivationNames)
    if (t == a) return name;
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  for (const auto& [t, n] : kActivationNames)
    if (n == name) return t;
  fail(Errc::config, "unknown activation '" + std::string(name) + "'");
}

std::vector<Activation> all_activations() {
  std::vector<Activation> out;
  for (const auto& [t, name] : kActivationNames) out.push_back(t);
  return out;
}

double activate(Activation a, double x) noexcept {
  switch (a) {
    case Activation::relu:
      return x > 0.0 ? x : 0.0;
    case Activation::gelu:
      return 0.5 * x * (1.0 + std::tanh(kGeluScale * (x + kGeluCubic * x * x * x)));
    case Activation::silu:
      return x * sigmoid(x);
    case Activation::hardswish:
      return x * std::clamp(x + 3.0, 0.0, 6.0) / 6.0;
    case Activation::tanh:
      return std::tanh(x);
    case Activation::identity:
      return x;
  }
  return x;
}

double activate_derivative(Activation a, double x) noexcept {
  switch (a) {
    case Activation::relu:
      return x > 0.0 ? 1.0 : 0.0;
    case Activation::gelu: {
      const double inner = kGeluScale * (x + kGeluCubic * x * x * x);
      const double t = std::tanh(inner);
      const double dinner = kGeluScale * (1.0 + 3.0 * kGeluCubic * x * x);
      return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * dinner;
    }
    case Activation::silu: {
      const double s = sigmoid(x);
      return s * (1.0 + x * (1.0 - s));
    }
    case Activation::hardswish:
      if (x <= -3.0) return 0.0;
      if (x >= 3.0) return 1.0;
      return (2.0 * x + 3.0) / 6.0;
    case Activation::tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::identity:
      return 1.0;
  }
  return 1.0;
}

std::string_view to_string(InputDistribution d) noexcept {
  return d == InputDistribution::standard_normal ? "normal" : "uniform";
}

InputDistribution parse_input_distribution(std::string_view name) {
  if (name == "normal") return InputDistribution::standard_normal;
  if (name == "uniform") return InputDistribution::uniform_symmetric;
  fail(Errc::config, "unknown input distribution '" + std::string(name) + "'");
}

Matrix sample_inputs(InputDistribution d, Rng& rng, std::size_t rows, std::size_t cols) {
  if (d == InputDistribution::standard_normal) return sample_normal(rng, 0.0, 1.0, {rows, cols});
  const double bound = std::sqrt(3.0);
  return sample_uniform(rng, -bound, bound, {rows, cols});
}

void validate(const MlpSpec& spec) {
  require(spec.layer_sizes.size() >= 2, Errc::invalid_parameter,
          "an MLP needs an input size and at least one linear layer");
  for (std::size_t s : spec.layer_sizes)
    require(s >= 1, Errc::invalid_parameter, "layer sizes must be >= 1");
  require(spec.hidden_activations.size() == spec.linear_layers() - 1, Errc::invalid_parameter,
          "need one activation per hidden layer");
  require(spec.init.size() == spec.linear_layers(), Errc::invalid_parameter,
          "need one init scheme per linear layer");
  for (const auto& s : spec.init) validate(s);
  require(spec.lsuv_probe_size >= 1, Errc::invalid_parameter, "lsuv probe size must be >= 1");
}

MlpSpec make_mlp_spec(std::vector<std::size_t> layer_sizes, Activation hidden,
                      const InitScheme& scheme, bool leading_relu) {
  MlpSpec spec;
  spec.layer_sizes = std::move(layer_sizes);
  const std::size_t linear = spec.linear_layers();
  spec.hidden_activations.assign(linear > 0 ? linear - 1 : 0, hidden);
  spec.init.assign(linear, scheme);
  spec.leading_relu = leading_relu;
  return spec;
}

MlpState build_mlp(const MlpSpec& spec, Rng& rng) {
  validate(spec);
  MlpState state;
  state.spec = spec;
  const std::size_t depth = spec.linear_layers();

  const bool any_lsuv = std::any_of(spec.init.begin(), spec.init.end(),
                                    [](const InitScheme& s) { return s.tag == InitTag::lsuv; });
  Matrix probe;
  if (any_lsuv) {
    Rng probe_rng = rng.child("lsuv-probe");
    probe = sample_inputs(spec.probe_distribution, probe_rng, spec.lsuv_probe_size,
                          spec.input_dim());
    if (spec.leading_relu) probe = relu(probe);
  }

  for (std::size_t l = 0; l < depth; ++l) {
    const LayerShape shape{.fan_in = spec.layer_sizes[l], .fan_out = spec.layer_sizes[l + 1]};
    const InitScheme& scheme = spec.init[l];
    Rng layer_rng = rng.child(static_cast<std::uint64_t>(l));
    DenseLayer layer;
    if (scheme.tag == InitTag::lsuv) {
      layer.weight = lsuv_adjust(orthogonal_matrix(shape, layer_rng, scheme.gain), probe,
                                 scheme.lsuv_tol, scheme.lsuv_max_iters)
                         .weights;
    } else {
      layer.weight = initialize(scheme, shape, layer_rng);
    }
    layer.bias.assign(shape.fan_out, 0.0);

    if (any_lsuv && l + 1 < depth) {
      Matrix z = matmul_nt(probe, layer.weight);
      probe = apply(spec.hidden_activations[l], z);
    }
    state.layers.push_back(std::move(layer));
  }

  auto& opt = state.optimizer;
  for (const auto& layer : state.layers) {
    opt.first_w.emplace_back(layer.weight.rows(), layer.weight.cols());
    opt.second_w.emplace_back(layer.weight.rows(), layer.weight.cols());
    opt.first_b.emplace_back(layer.bias.size(), 0.0);
    opt.second_b.emplace_back(layer.bias.size(), 0.0);
  }
  return state;
}

ForwardResult forward_capture(const MlpState& state, const Matrix& inputs) {
  Cache cache = run_forward(state, inputs);
  ForwardResult result;
  result.outputs = cache.preactivations.back();
  for (auto& z : cache.preactivations) {
    result.trace.states.push_back(binary_states(z));
    result.trace.preactivations.push_back(std::move(z));
  }
  return result;
}

Matrix forward(const MlpState& state, const Matrix& inputs) {
  return std::move(run_forward(state, inputs).preactivations.back());
}

Matrix softmax(const Matrix& logits) {
  Matrix out = logits;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double peak = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& x : row) {
      x = std::exp(x - peak);
      total += x;
    }
    for (double& x : row) x /= total;
  }
  return out;
}

namespace {

double mean_cross_entropy(const Matrix& logits, std::span<const std::size_t> labels) {
  double total = 0.0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto row = logits.row(r);
    const double peak = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double x : row) sum += std::exp(x - peak);
    total += std::log(sum) + peak - row[labels[r]];
  }
  return total / static_cast<double>(logits.rows());
}

}  // namespace

double loss(const MlpState& state, const Matrix& inputs, std::span<const std::size_t> labels) {
  check_inputs(state, inputs);
  check_labels(state, inputs, labels);
  require(inputs.rows() >= 1, Errc::empty_input, "loss: empty batch");
  return mean_cross_entropy(forward(state, inputs), labels);
}

Gradients backward(const MlpState& state, const Matrix& inputs,
                   std::span<const std::size_t> labels) {
  check_inputs(state, inputs);
  check_labels(state, inputs, labels);
  require(inputs.rows() >= 1, Errc::empty_input, "backward: empty batch");

  const Cache cache = run_forward(state, inputs);
  const std::size_t depth = state.layers.size();
  const double inv_batch = 1.0 / static_cast<double>(inputs.rows());

  Gradients grads;
  grads.weight.resize(depth);
  grads.bias.resize(depth);
  grads.loss = mean_cross_entropy(cache.preactivations.back(), labels);

  Matrix delta = softmax(cache.preactivations.back());
  for (std::size_t r = 0; r < delta.rows(); ++r) delta(r, labels[r]) -= 1.0;
  delta *= inv_batch;

  for (std::size_t l = depth; l-- > 0;) {
    grads.weight[l] = matmul_tn(delta, cache.layer_inputs[l]);
    auto& gb = grads.bias[l];
    gb.assign(delta.cols(), 0.0);
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      const auto row = delta.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) gb[c] += row[c];
    }
    if (l == 0) break;
    Matrix upstream = matmul(delta, state.layers[l].weight);
    const Activation act = state.spec.hidden_activations[l - 1];
    const auto z = cache.preactivations[l - 1].values();
    auto u = upstream.values();
    for (std::size_t i = 0; i < u.size(); ++i) u[i] *= activate_derivative(act, z[i]);
    delta = std::move(upstream);
  }
  return grads;
}

std::string_view to_string(OptimizerKind k) noexcept {
  switch (k) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::adam: return "adam";
    case OptimizerKind::adamw: return "adamw";
  }
  return "unknown";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  if (name == "adamw") return OptimizerKind::adamw;
  fail(Errc::config, "unknown optimizer '" + std::string(name) + "'");
}

void validate(const OptimizerConfig& c) {
  require(std::isfinite(c.lr) && c.lr > 0.0, Errc::invalid_parameter,
          "learning rate must be positive");
  require(std::isfinite(c.weight_decay) && c.weight_decay >= 0.0, Errc::invalid_parameter,
          "weight decay must be non-negative");
  require(c.beta1 >= 0.0 && c.beta1 < 1.0 && c.beta2 >= 0.0 && c.beta2 < 1.0,
          Errc::invalid_parameter, "Adam betas must lie in [0, 1)");
  require(c.eps > 0.0, Errc::invalid_parameter, "Adam epsilon must be positive");
}

namespace {

struct AdamScales {
  double first;   // 1 / (1 − β₁ᵗ)
  double second;  // 1 / (1 − β₂ᵗ)
};

void update_params(std::span<double> w, std::span<const double> g, std::span<double> m,
                   std::span<double> v, const OptimizerConfig& c, AdamScales scales) {
  switch (c.kind) {
    case OptimizerKind::sgd:
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= c.lr * (g[i] + c.weight_decay * w[i]);
      return;
    case OptimizerKind::adam:
    case OptimizerKind::adamw: {
      const bool decoupled = c.kind == OptimizerKind::adamw;
      for (std::size_t i = 0; i < w.size(); ++i) {
        double grad = g[i];
        if (decoupled)
          w[i] -= c.lr * c.weight_decay * w[i];
        else
          grad += c.weight_decay * w[i];
        m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * grad;
        v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * grad * grad;
        const double m_hat = m[i] * scales.first;
        const double v_hat = v[i] * scales.second;
        w[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
      }
      return;
    }
  }
}

}  // namespace

void optimizer_step(MlpState& state, const Gradients& grads, const OptimizerConfig& config) {
  validate(config);
  require(grads.weight.size() == state.layers.size() && grads.bias.size() == state.layers.size(),
          Errc::shape_mismatch, "gradient layer count does not match the network");
  auto& opt = state.optimizer;
  ++opt.step;
  const double t = static_cast<double>(opt.step);
  const AdamScales scales{1.0 / (1.0 - std::pow(config.beta1, t)),
                          1.0 / (1.0 - std::pow(config.beta2, t))};
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    auto& layer = state.layers[l];
    require(grads.weight[l].rows() == layer.weight.rows() &&
                grads.weight[l].cols() == layer.weight.cols() &&
                grads.bias[l].size() == layer.bias.size(),
            Errc::shape_mismatch, "gradient shape does not match layer " + std::to_string(l));
    update_params(layer.weight.values(), grads.weight[l].values(), opt.first_w[l].values(),
                  opt.second_w[l].values(), config, scales);
    update_params(layer.bias, grads.bias[l], opt.first_b[l], opt.second_b[l], config, scales);
  }
}

}  // namespace sinit
