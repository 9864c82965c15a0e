#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sinit/matrix.hpp"
#include "sinit/rng.hpp"

namespace sinit {

/// Layer geometry in the W ∈ ℝ^{m×n} convention: m output neurons (rows),
/// n input features (columns).
struct LayerShape {
  std::size_t fan_in = 0;   // n
  std::size_t fan_out = 0;  // m
};

void validate(const LayerShape& shape);

/// Conv2D kernel (out, in, kh, kw) seen as a dense layer: m = out,
/// n = in·kh·kw.
LayerShape flatten_conv_shape(std::size_t out_channels, std::size_t in_channels, std::size_t kh,
                              std::size_t kw);

enum class InitTag {
  sinusoidal,
  glorot_uniform,
  glorot_normal,
  he_uniform,
  he_normal,
  orthogonal,
  lsuv,
  plain_normal,
  plain_uniform,
  truncated_normal,
  arcsine_random,
};

std::string_view to_string(InitTag tag) noexcept;
/// Accepts the snake_case names returned by to_string. Throws Errc::config.
InitTag parse_init_tag(std::string_view name);
std::vector<InitTag> all_init_tags();

/// One initialization recipe. Only the fields relevant to `tag` are read.
struct InitScheme {
  InitTag tag = InitTag::sinusoidal;
  double gain = 1.0;          // orthogonal, lsuv
  double std = 0.01;          // plain_normal, truncated_normal
  double lo = -0.05;          // plain_uniform
  double hi = 0.05;           // plain_uniform
  double cutoff = 2.0;        // truncated_normal, in units of std
  double lsuv_tol = 0.01;
  std::size_t lsuv_max_iters = 10;

  static InitScheme of(InitTag tag) {
    InitScheme s;
    s.tag = tag;
    return s;
  }
};

void validate(const InitScheme& scheme);

/// True for schemes that consume no randomness.
bool is_deterministic(InitTag tag) noexcept;

// ---------------------------------------------------------------------------
// Sinusoidal

/// a = sqrt(2 / ((m + n) · v)), the amplitude that gives the a = 1 pattern
/// (population variance v) the Glorot variance 2/(m+n).
double compute_amplitude(std::size_t m, std::size_t n, double v);

struct SinusoidalLayer {
  Matrix weights;
  double amplitude = 0.0;
  /// Population variance of the a = 1 pattern.
  double unit_variance = 0.0;
  /// 1-based row indices i with i mod n = 0. Those rows are constant
  /// (a·sin(2πi/m)) and do not cancel.
  std::vector<std::size_t> degenerate_rows;
};

/// W[i,j] = a·sin(2πi·j/n + 2πi/m) for i = 1..m, j = 1..n.
///
/// The phase is reduced exactly in integer arithmetic, ((i·j) mod n)/n and
/// (i mod m)/m, before scaling by 2π, so large i·j do not lose precision.
/// Emits a warning through the installed handler when m ≥ n.
SinusoidalLayer sinusoidal_layer(std::size_t m, std::size_t n);
Matrix sinusoidal_matrix(std::size_t m, std::size_t n);

// ---------------------------------------------------------------------------
// Stochastic baselines

/// Glorot/He/plain normal/uniform/truncated-normal draws.
Matrix random_matrix(const InitScheme& scheme, const LayerShape& shape, Rng& rng);

/// gain × a Haar-orthogonal matrix. Rows are orthonormal when m ≤ n,
/// columns otherwise.
Matrix orthogonal_matrix(const LayerShape& shape, Rng& rng, double gain = 1.0);

/// Entries a·sin(U), U ~ Uniform[0, 2π), with a²/2 = 2/(m+n). Same marginal
/// as the sinusoidal scheme, no row structure.
Matrix arcsine_random_matrix(const LayerShape& shape, Rng& rng);
double arcsine_random_amplitude(const LayerShape& shape);

struct LsuvResult {
  Matrix weights;
  double achieved_variance = 0.0;
  std::size_t iterations = 0;
};

/// Rescale W until the population variance of probe_batch · Wᵀ is within
/// `tol` of 1, or `max_iters` rescalings have been applied.
LsuvResult lsuv_adjust(Matrix weights, const Matrix& probe_batch, double tol,
                       std::size_t max_iters);

/// Any scheme except lsuv, which needs a probe batch (see build_mlp).
Matrix initialize(const InitScheme& scheme, const LayerShape& shape, Rng& rng);

// ---------------------------------------------------------------------------
// Warnings

struct Warning {
  std::string code;
  std::string message;
};

using WarningHandler = std::function<void(const Warning&)>;

/// Installs `handler` and returns the previous one. The default handler
/// writes one JSON object per line to stderr.
WarningHandler set_warning_handler(WarningHandler handler);
void emit_warning(const Warning& warning);

}  // namespace sinit
