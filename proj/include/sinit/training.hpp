#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sinit/matrix.hpp"
#include "sinit/network.hpp"
#include "sinit/rng.hpp"

namespace sinit {

struct Dataset {
  Matrix train_x;
  std::vector<std::size_t> train_y;
  Matrix val_x;
  std::vector<std::size_t> val_y;
  std::size_t classes = 0;
};

/// Gaussian blobs around class means on a centred integer lattice: class c
/// is written in base B (smallest B with B^d ≥ classes for d = min(dim, ⌈log₂ classes⌉)),
/// and its digits are tiled cyclically across the `dim` coordinates. Labels are
/// balanced (sample s has class s mod classes); a seeded shuffle then puts the
/// first 80% into the training split.
Dataset synthetic_blobs(std::size_t classes, std::size_t dim, std::size_t samples, double spread,
                        Rng& rng);

/// Class means used by synthetic_blobs, one row per class.
Matrix blob_means(std::size_t classes, std::size_t dim);

/// Smallest Euclidean distance between two class means.
double min_mean_separation(std::size_t classes, std::size_t dim);

/// Row-wise argmax, ties broken by the lowest index.
std::vector<std::size_t> predict(const MlpState& state, const Matrix& inputs);
double accuracy(const MlpState& state, const Matrix& inputs, std::span<const std::size_t> labels);

struct TrainRecord {
  /// Index e holds epoch e + 1.
  std::vector<double> loss;
  std::vector<double> val_accuracy;
  /// Validation accuracy before the first update.
  double initial_accuracy = 0.0;

  [[nodiscard]] std::size_t epochs() const noexcept { return val_accuracy.size(); }
};

struct TrainConfig {
  OptimizerConfig optimizer;
  std::size_t epochs = 40;
  std::size_t batch_size = 64;
};

/// Mini-batch training without a learning-rate schedule. The network is
/// initialized from rng.child("init"); epoch e shuffles with
/// rng.child("shuffle").child(e). The result is a pure function of
/// (spec, dataset, config, rng seed).
TrainRecord train(const MlpSpec& spec, const Dataset& data, const TrainConfig& config, Rng& rng);

/// Same, starting from an already built network (which is updated in place).
TrainRecord train_state(MlpState& state, const Dataset& data, const TrainConfig& config, Rng& rng);

/// Trapezoidal integral of validation accuracy over unit-spaced epochs.
double auc(const TrainRecord& record);

}  // namespace sinit
