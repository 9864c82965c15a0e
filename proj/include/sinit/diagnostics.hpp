#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sinit/matrix.hpp"
#include "sinit/network.hpp"
#include "sinit/rng.hpp"

namespace sinit {

/// Moments of max(Z, 0) for standard normal Z.
inline constexpr double kRectifiedMean = 0.3989422804014326779399460599343819;   // 1/√(2π)
inline constexpr double kRectifiedVariance = 0.3408450569081046;                  // 1/2 − 1/(2π)

/// Draws batches of input vectors of a fixed dimension.
struct InputSampler {
  std::size_t dim = 0;
  /// Fills every row of `out` (rows × dim) with one input vector.
  std::function<void(Rng&, Matrix&)> fill;

  [[nodiscard]] Matrix draw(Rng& rng, std::size_t rows) const;
};

InputSampler gaussian_sampler(std::size_t dim);
InputSampler symmetric_uniform_sampler(std::size_t dim);
/// max(Z, 0) coordinate-wise, Z standard normal.
InputSampler rectified_gaussian_sampler(std::size_t dim);
/// X_i = mean + std·scale_i·(R_i − E R)/sd(R) with R_i rectified Gaussian:
/// common mean, per-coordinate standard deviation std·scale_i.
InputSampler shifted_rectified_sampler(double mean, double std, std::vector<double> scales);
/// Samples from the distribution a network expects at its input.
InputSampler distribution_sampler(InputDistribution d, std::size_t dim);

// ---------------------------------------------------------------------------
// Statistic S and the threshold

/// S_i = Σ_j W[i, j].
std::vector<double> row_sums(const Matrix& weights);

struct ThresholdParams {
  std::size_t n = 0;
  double theta = 0.0;  // weight standard deviation
  double mu = 0.0;     // common input mean
  double sigma = 0.0;  // input standard deviation (σ̄ when heterogeneous)
  double alpha = 0.3;
};

void validate(const ThresholdParams& p);

/// λₙ(α) = θ·σ·√n / µ · Φ⁻¹(1/2 + α).
double lambda_threshold(const ThresholdParams& p);

// ---------------------------------------------------------------------------
// Skewed neurons

/// Fraction of `mc_samples` sampled inputs x with (W x)_i > 0, per row i.
///
/// Inputs are drawn in blocks of kMcBlock rows; block b uses rng.child(b), so
/// the estimate does not depend on how the work is scheduled.
std::vector<double> estimate_activation_prob(const Matrix& weights, const InputSampler& sampler,
                                             std::size_t mc_samples, const Rng& rng);

inline constexpr std::size_t kMcBlock = 512;

struct SkewClassification {
  std::vector<std::uint8_t> is_skewed;
  double skewed_fraction = 0.0;
};

/// Neuron i is skewed iff |p_i − 1/2| > α (strict).
SkewClassification classify_skewed(std::span<const double> p_positive, double alpha);

struct SkewReport {
  std::size_t layer = 0;
  double alpha = 0.0;
  std::size_t mc_samples = 0;
  std::vector<double> s_values;
  std::vector<double> p_positive;
  std::vector<std::uint8_t> is_skewed;
  double skewed_fraction = 0.0;
};

/// Estimated P(preactivation > 0) for every neuron of every linear layer,
/// with inputs pushed through the whole network.
std::vector<std::vector<double>> network_activation_probs(const MlpState& model,
                                                          const InputSampler& sampler,
                                                          std::size_t mc_samples, const Rng& rng);

struct SkewTable {
  std::size_t layer = 0;
  std::vector<double> alphas;
  /// Fraction of skewed neurons per alpha, in [0, 1].
  std::vector<double> skewed_fraction;
  std::vector<double> s_values;
  std::vector<double> p_positive;
};

SkewTable skew_table(const MlpState& model, std::size_t layer, const InputSampler& sampler,
                     std::span<const double> alphas, std::size_t mc_samples, const Rng& rng);

// ---------------------------------------------------------------------------
// Threshold equivalence, Monte Carlo

struct ThresholdMcResult {
  double agreement = 0.0;
  double lambda = 0.0;
  std::size_t n = 0;
  std::size_t neurons = 0;
  std::size_t mc_samples = 0;
  /// Fraction flagged by |p̂ − 1/2| > α.
  double empirical_skewed = 0.0;
  /// Fraction flagged by |S| > λ.
  double predicted_skewed = 0.0;
};

/// Draws `neurons` rows W ~ N(0, θ²) of length n, and compares the two
/// classifications |S| > λ and |p̂ − 1/2| > α. Inputs are rectified Gaussians
/// shifted and scaled to mean µ and per-coordinate std σ·scale_i; with an
/// empty `sigma_scales` every scale is 1. λ uses σ̄ = σ·√(mean scale²).
ThresholdMcResult threshold_equivalence_mc(const ThresholdParams& params, std::size_t neurons,
                                           std::size_t mc_samples, const Rng& rng,
                                           std::span<const double> sigma_scales = {});

/// Scales alternating `low`, `high`, `low`, … over n coordinates.
std::vector<double> alternating_scales(std::size_t n, double low, double high);

// ---------------------------------------------------------------------------
// Activation patterns

struct OuiReport {
  double value = 0.0;
  std::size_t layer = 0;
  std::size_t samples = 0;
  std::size_t neurons = 0;
};

/// Mean over distinct sample pairs of 2·min(h, 1 − h), with h the normalized
/// Hamming distance between the two rows of the binary state matrix.
OuiReport oui(const Matrix& states, std::size_t layer = 0);

struct GrayImage {
  std::size_t height = 0;  // rows = samples
  std::size_t width = 0;   // cols = neurons
  std::vector<std::uint8_t> pixels;

  [[nodiscard]] std::uint8_t at(std::size_t r, std::size_t c) const { return pixels[r * width + c]; }
};

/// Active → 255, inactive → 0, cropped to the first sample_limit rows and
/// neuron_limit columns.
GrayImage activation_bitmap(const ForwardTrace& trace, std::size_t layer,
                            std::size_t sample_limit, std::size_t neuron_limit);

struct SHistogram {
  std::vector<double> edges;  // bins + 1, uniform over [min S, max S]
  std::vector<std::size_t> skewed;
  std::vector<std::size_t> balanced;
};

SHistogram s_histogram(std::span<const double> s_values, std::span<const std::uint8_t> is_skewed,
                       std::size_t bins);

// ---------------------------------------------------------------------------
// Depth propagation

struct LayerSkew {
  std::size_t layer = 0;
  std::vector<double> s_values;
  std::vector<double> p_positive;
  std::vector<std::uint8_t> is_skewed;
  double skewed_fraction = 0.0;
  /// Spearman correlation between |S| and the skew flag.
  double rank_correlation = 0.0;
};

/// Builds ReLU → Linear → ReLU → … → Linear with input_dim followed by
/// `widths`, layer ℓ initialized with schemes[ℓ].
MlpSpec depth_spec(std::size_t input_dim, const std::vector<std::size_t>& widths,
                   const std::vector<InitScheme>& schemes);

std::vector<LayerSkew> depth_propagation(const MlpState& model, const InputSampler& sampler,
                                         double alpha, std::size_t mc_samples, const Rng& rng);

}  // namespace sinit
