#include "sinit/sampling.hpp"

#include <cmath>
#include <string>

#include "sinit/error.hpp"

namespace sinit {

Matrix sample_normal(Rng& rng, double mean, double std, Shape shape) {
  require(std::isfinite(mean) && std::isfinite(std), Errc::invalid_parameter,
          "sample_normal: parameters must be finite");
  require(std >= 0.0, Errc::invalid_parameter,
          "sample_normal: std must be non-negative, got " + std::to_string(std));
  Matrix out(shape.rows, shape.cols);
  for (double& x : out.values()) x = mean + std * rng.normal();
  return out;
}

Matrix sample_uniform(Rng& rng, double lo, double hi, Shape shape) {
  require(std::isfinite(lo) && std::isfinite(hi), Errc::invalid_parameter,
          "sample_uniform: bounds must be finite");
  require(lo <= hi, Errc::invalid_parameter, "sample_uniform: lo must not exceed hi");
  Matrix out(shape.rows, shape.cols);
  const double width = hi - lo;
  for (double& x : out.values()) x = lo + width * rng.uniform();
  return out;
}

Matrix sample_truncated_normal(Rng& rng, double std, double cutoff, Shape shape) {
  require(std::isfinite(std) && std > 0.0, Errc::invalid_parameter,
          "sample_truncated_normal: std must be positive");
  require(std::isfinite(cutoff) && cutoff > 0.0, Errc::invalid_parameter,
          "sample_truncated_normal: cutoff must be positive");
  Matrix out(shape.rows, shape.cols);
  for (double& x : out.values()) {
    double z = rng.normal();
    while (std::abs(z) > cutoff) z = rng.normal();
    x = std * z;
  }
  return out;
}

}  // namespace sinit
