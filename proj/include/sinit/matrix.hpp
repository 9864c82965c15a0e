#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sinit {

/// Dense row-major matrix of doubles. Rows are neurons (for weights) or
/// samples (for activations); columns are input features or neurons.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Takes ownership of `data`; throws if the size does not match or any
  /// entry is non-finite.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  /// Nested-list constructor, mostly for tests: `Matrix::from_rows({{1,2},{3,4}})`.
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  [[nodiscard]] std::span<double> row(std::size_t r) noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  [[nodiscard]] std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  [[nodiscard]] std::span<double> values() noexcept { return data_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return data_; }

  [[nodiscard]] bool all_finite() const noexcept;
  [[nodiscard]] Matrix transposed() const;

  Matrix& operator*=(double s) noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// A · B.
Matrix matmul(const Matrix& a, const Matrix& b);
/// A · Bᵀ. With A = samples × features and B = neurons × features this is the
/// batched preactivation product.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// Aᵀ · B.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

/// Maximum absolute entry of A − B; shapes must agree.
double max_abs_diff(const Matrix& a, const Matrix& b);

Matrix identity(std::size_t n);

}  // namespace sinit
