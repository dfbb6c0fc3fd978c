#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "birkhoff/error.hpp"

namespace birkhoff {

/// Dense row-major matrix. Templated on the scalar so the same kernels can run
/// on plain doubles and on forward-mode tangents.
template <class T>
class BasicMatrix {
 public:
  BasicMatrix() = default;
  BasicMatrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  BasicMatrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) fail(ErrorKind::DimensionMismatch, "matrix data size does not match shape");
  }

  static BasicMatrix identity(std::size_t n) {
    BasicMatrix out(n, n, T(0.0));
    for (std::size_t i = 0; i < n; ++i) out(i, i) = T(1.0);
    return out;
  }

  /// J = (1/n) 1 1^T
  static BasicMatrix uniform(std::size_t n) { return BasicMatrix(n, n, T(1.0 / static_cast<double>(n))); }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = BasicMatrix<double>;
using Vector = std::vector<double>;

template <class T>
BasicMatrix<T> multiply(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  if (a.cols() != b.rows()) fail(ErrorKind::DimensionMismatch, "matrix product shape mismatch");
  BasicMatrix<T> out(a.rows(), b.cols(), T(0.0));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T& aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

template <class T>
BasicMatrix<T> transpose(const BasicMatrix<T>& a) {
  BasicMatrix<T> out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

/// a ⊗ b
template <class T>
BasicMatrix<T> kron(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  BasicMatrix<T> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q) out(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
  return out;
}

Vector row_sums(const Matrix& a);
Vector col_sums(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
double frobenius_distance(const Matrix& a, const Matrix& b);
bool is_symmetric(const Matrix& a, double tol);

/// Largest deviation of row and column sums from prescribed margins.
struct MarginDeviation {
  double row = 0.0;
  double col = 0.0;
  double max() const noexcept { return std::max(row, col); }
};

MarginDeviation margin_deviation(const Matrix& a, std::span<const double> row_targets,
                                 std::span<const double> col_targets);
/// Deviation from the all-ones margins of the Birkhoff polytope.
MarginDeviation ds_deviation(const Matrix& a);

/// Solves A x = b by Gaussian elimination with partial pivoting. Throws on a
/// numerically singular system.
Vector solve_linear(Matrix a, Vector b);

}  // namespace birkhoff
