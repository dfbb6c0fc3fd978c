#include "birkhoff/matrix.hpp"

#include <cmath>

namespace birkhoff {

Vector row_sums(const Matrix& a) {
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j);
  return out;
}

Vector col_sums(const Matrix& a) {
  Vector out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += a(i, j);
  return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) fail(ErrorKind::DimensionMismatch, "shape mismatch");
  double d = 0.0;
  for (std::size_t q = 0; q < a.size(); ++q) d = std::max(d, std::abs(a.data()[q] - b.data()[q]));
  return d;
}

double frobenius_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) fail(ErrorKind::DimensionMismatch, "shape mismatch");
  double s = 0.0;
  for (std::size_t q = 0; q < a.size(); ++q) {
    const double d = a.data()[q] - b.data()[q];
    s += d * d;
  }
  return std::sqrt(s);
}

bool is_symmetric(const Matrix& a, double tol) {
  if (!a.square()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol) return false;
  return true;
}

MarginDeviation margin_deviation(const Matrix& a, std::span<const double> row_targets,
                                 std::span<const double> col_targets) {
  if (row_targets.size() != a.rows() || col_targets.size() != a.cols()) {
    fail(ErrorKind::DimensionMismatch, "margin length does not match matrix shape");
  }
  MarginDeviation dev;
  const auto rs = row_sums(a);
  const auto cs = col_sums(a);
  for (std::size_t i = 0; i < rs.size(); ++i) dev.row = std::max(dev.row, std::abs(rs[i] - row_targets[i]));
  for (std::size_t j = 0; j < cs.size(); ++j) dev.col = std::max(dev.col, std::abs(cs[j] - col_targets[j]));
  return dev;
}

MarginDeviation ds_deviation(const Matrix& a) {
  const Vector r(a.rows(), 1.0), c(a.cols(), 1.0);
  return margin_deviation(a, r, c);
}

Vector solve_linear(Matrix a, Vector b) {
  const std::size_t n = a.rows();
  if (!a.square() || b.size() != n) fail(ErrorKind::DimensionMismatch, "solve_linear expects a square system");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (std::abs(a(i, col)) > std::abs(a(pivot, col))) pivot = i;
    if (std::abs(a(pivot, col)) < 1e-300) fail(ErrorKind::InvalidArgument, "singular linear system");
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t i = col + 1; i < n; ++i) {
      const double f = a(i, col) / a(col, col);
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a(i, j) -= f * a(col, j);
      b[i] -= f * b[col];
    }
  }
  Vector x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

}  // namespace birkhoff
