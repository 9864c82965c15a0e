#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "sinit/initializers.hpp"
#include "sinit/matrix.hpp"
#include "sinit/rng.hpp"

namespace sinit {

enum class Activation { relu, gelu, silu, hardswish, tanh, identity };

std::string_view to_string(Activation a) noexcept;
Activation parse_activation(std::string_view name);
std::vector<Activation> all_activations();

/// GeLU is the tanh approximation 0.5·x·(1 + tanh(√(2/π)·(x + 0.044715·x³))).
/// SiLU is x·σ(x). Hardswish is x·min(max(x + 3, 0), 6)/6.
double activate(Activation a, double x) noexcept;
double activate_derivative(Activation a, double x) noexcept;

/// Distribution that probe and diagnostic inputs are drawn from.
enum class InputDistribution { standard_normal, uniform_symmetric };

std::string_view to_string(InputDistribution d) noexcept;
InputDistribution parse_input_distribution(std::string_view name);
/// rows × cols draws; uniform_symmetric is Uniform[−√3, √3) (unit variance).
Matrix sample_inputs(InputDistribution d, Rng& rng, std::size_t rows, std::size_t cols);

/// Architecture: [ReLU →] Linear → act → Linear → act → … → Linear.
/// The last linear layer produces logits and has no activation.
struct MlpSpec {
  /// Input dimension first, then the width of every linear layer.
  std::vector<std::size_t> layer_sizes;
  /// One per hidden layer (layer_sizes.size() − 2 entries).
  std::vector<Activation> hidden_activations;
  bool leading_relu = false;
  /// One per linear layer.
  std::vector<InitScheme> init;
  /// Source of the LSUV probe batch.
  InputDistribution probe_distribution = InputDistribution::standard_normal;
  std::size_t lsuv_probe_size = 256;

  [[nodiscard]] std::size_t linear_layers() const noexcept {
    return layer_sizes.empty() ? 0 : layer_sizes.size() - 1;
  }
  [[nodiscard]] std::size_t input_dim() const noexcept {
    return layer_sizes.empty() ? 0 : layer_sizes.front();
  }
  [[nodiscard]] std::size_t output_dim() const noexcept {
    return layer_sizes.empty() ? 0 : layer_sizes.back();
  }
};

void validate(const MlpSpec& spec);

/// Convenience: same scheme on every layer, same activation on every hidden layer.
MlpSpec make_mlp_spec(std::vector<std::size_t> layer_sizes, Activation hidden,
                      const InitScheme& scheme, bool leading_relu = false);

struct DenseLayer {
  Matrix weight;  // fan_out × fan_in
  std::vector<double> bias;
};

struct OptimizerState {
  std::vector<Matrix> first_w;
  std::vector<Matrix> second_w;
  std::vector<std::vector<double>> first_b;
  std::vector<std::vector<double>> second_b;
  std::size_t step = 0;
};

struct MlpState {
  MlpSpec spec;
  std::vector<DenseLayer> layers;
  OptimizerState optimizer;
};

/// Initializes every layer from its scheme with an independent sub-stream
/// (rng.child(layer)). Biases are exactly zero. LSUV layers start
/// orthogonal and are rescaled on a probe batch propagated through the
/// already-initialized preceding layers.
MlpState build_mlp(const MlpSpec& spec, Rng& rng);

struct ForwardTrace {
  /// One samples × neurons matrix per linear layer.
  std::vector<Matrix> preactivations;
  /// Same shapes; entry 1 iff preactivation > 0.
  std::vector<Matrix> states;
};

struct ForwardResult {
  Matrix outputs;  // logits
  ForwardTrace trace;
};

ForwardResult forward_capture(const MlpState& state, const Matrix& inputs);
/// Logits only, without recording the trace.
Matrix forward(const MlpState& state, const Matrix& inputs);

/// Row-wise softmax.
Matrix softmax(const Matrix& logits);

/// Mean softmax cross-entropy of the network on (inputs, labels).
double loss(const MlpState& state, const Matrix& inputs, std::span<const std::size_t> labels);

struct Gradients {
  std::vector<Matrix> weight;
  std::vector<std::vector<double>> bias;
  double loss = 0.0;
};

/// Gradients of the mean softmax cross-entropy with respect to every weight
/// and bias.
Gradients backward(const MlpState& state, const Matrix& inputs,
                   std::span<const std::size_t> labels);

enum class OptimizerKind { sgd, adam, adamw };

std::string_view to_string(OptimizerKind k) noexcept;
OptimizerKind parse_optimizer(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adamw;
  double lr = 1e-3;
  double weight_decay = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

void validate(const OptimizerConfig& config);

/// SGD:   w ← w − lr·(g + wd·w)
/// Adam:  bias-corrected moments of g + wd·w
/// AdamW: w ← w − lr·wd·w, then the Adam update on g
void optimizer_step(MlpState& state, const Gradients& grads, const OptimizerConfig& config);

}  // namespace sinit
