#pragma once

#include <cstddef>

#include "sinit/matrix.hpp"
#include "sinit/rng.hpp"

namespace sinit {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// Entries i.i.d. Normal(mean, std²), filled in row-major order.
Matrix sample_normal(Rng& rng, double mean, double std, Shape shape);

/// Entries i.i.d. Uniform[lo, hi).
Matrix sample_uniform(Rng& rng, double lo, double hi, Shape shape);

/// Normal(0, std²) conditioned on |x| ≤ cutoff·std, by rejection.
Matrix sample_truncated_normal(Rng& rng, double std, double cutoff, Shape shape);

inline constexpr double kDefaultTruncationCutoff = 2.0;

}  // namespace sinit
