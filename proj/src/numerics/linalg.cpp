#include "sinit/linalg.hpp"

#include <Eigen/Householder>
#include <Eigen/QR>
#include <algorithm>

#include "sinit/error.hpp"
#include "sinit/sampling.hpp"

namespace sinit {

Matrix qr_orthonormal(Rng& rng, std::size_t rows, std::size_t cols) {
  require(rows >= 1 && cols >= 1, Errc::invalid_parameter, "qr_orthonormal: empty shape");
  const Matrix gaussian = sample_normal(rng, 0.0, 1.0, {rows, cols});

  const auto r = static_cast<Eigen::Index>(rows);
  const auto c = static_cast<Eigen::Index>(cols);
  const auto k = std::min(r, c);
  Eigen::MatrixXd a(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) a(i, j) = gaussian(i, j);

  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(r, k);
  const auto& packed = qr.matrixQR();

  Matrix out(rows, static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) {
    const double sign = packed(j, j) < 0.0 ? -1.0 : 1.0;
    for (Eigen::Index i = 0; i < r; ++i) out(i, j) = sign * q(i, j);
  }
  return out;
}

}  // namespace sinit
