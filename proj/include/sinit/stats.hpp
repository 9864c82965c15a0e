#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "sinit/matrix.hpp"

namespace sinit {

struct SummaryStats {
  double mean = 0.0;
  /// Divisor N: the matrix is treated as the whole population.
  double population_variance = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

SummaryStats population_stats(std::span<const double> values);
inline SummaryStats population_stats(const Matrix& m) { return population_stats(m.values()); }

/// One-sample Kolmogorov–Smirnov statistic of ascending `sorted` against
/// `cdf`: D = max_i max(|i/N − F(x_i)|, |(i−1)/N − F(x_i)|).
double ks_statistic(std::span<const double> sorted, const std::function<double(double)>& cdf);

/// Two-sample KS statistic sup_x |F_a(x) − F_b(x)|. Inputs need not be sorted.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Average ranks (1-based, ties share their mean rank).
std::vector<double> ranks(std::span<const double> values);

/// Spearman rank correlation. Returns 0 if either input is constant.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace sinit
