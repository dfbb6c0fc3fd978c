#include "birkhoff/transport.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "chart_kernels.hpp"

namespace birkhoff {

Margins::Margins(Vector row_sums, Vector col_sums) : rows_(std::move(row_sums)), cols_(std::move(col_sums)) {
  if (rows_.empty() || cols_.empty()) fail(ErrorKind::InvalidArgument, "margins must be non-empty");
  for (const double v : rows_)
    if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorKind::InvalidArgument, "row sums must be finite and positive");
  for (const double v : cols_)
    if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorKind::InvalidArgument, "column sums must be finite and positive");
  mass_ = std::accumulate(rows_.begin(), rows_.end(), 0.0);
  const double col_mass = std::accumulate(cols_.begin(), cols_.end(), 0.0);
  if (std::abs(mass_ - col_mass) > tolerance()) {
    fail(ErrorKind::InvalidArgument, "row mass " + std::to_string(mass_) + " differs from column mass " +
                                         std::to_string(col_mass));
  }
}

Margins Margins::ones(std::size_t n) { return Margins(Vector(n, 1.0), Vector(n, 1.0)); }

bool Margins::is_birkhoff(double tol) const noexcept {
  if (rows_.size() != cols_.size()) return false;
  for (const double v : rows_)
    if (std::abs(v - 1.0) > tol) return false;
  for (const double v : cols_)
    if (std::abs(v - 1.0) > tol) return false;
  return true;
}

double Margins::tolerance() const noexcept { return detail::mass_tolerance(mass_); }

TransportMatrix::TransportMatrix(Matrix entries, Margins margins, Unchecked)
    : entries_(std::move(entries)), margins_(std::move(margins)) {}

TransportMatrix::TransportMatrix(Matrix entries, Margins margins, double tol)
    : entries_(std::move(entries)), margins_(std::move(margins)) {
  if (entries_.rows() != margins_.n() || entries_.cols() != margins_.m()) {
    fail(ErrorKind::DimensionMismatch, "matrix shape does not match margins");
  }
  for (const double v : entries_.data()) {
    if (!std::isfinite(v) || v < 0.0) fail(ErrorKind::InvalidArgument, "transport matrix entries must be >= 0");
  }
  const double scaled = tol * std::max(1.0, margins_.total_mass());
  const auto dev = deviation();
  if (dev.max() > scaled) {
    fail(ErrorKind::NotDoublyStochastic, "margin deviation " + std::to_string(dev.max()) + " exceeds tolerance");
  }
}

TransportMatrix TransportMatrix::adopt(Matrix entries, Margins margins) {
  return TransportMatrix(std::move(entries), std::move(margins), Unchecked{});
}

TransportMatrix TransportMatrix::doubly_stochastic(Matrix entries, double tol) {
  if (!entries.square()) fail(ErrorKind::DimensionMismatch, "doubly stochastic matrices are square");
  const std::size_t n = entries.rows();
  return TransportMatrix(std::move(entries), Margins::ones(n), tol);
}

MarginDeviation TransportMatrix::deviation() const {
  return margin_deviation(entries_, margins_.row_sums(), margins_.col_sums());
}

FeasibleInterval feasible_interval(double row_budget, double col_budget, double row_tail, double col_tail) {
  if (row_budget < 0.0 || col_budget < 0.0 || row_tail < 0.0 || col_tail < 0.0) {
    fail(ErrorKind::InvalidArgument, "budgets and tails must be nonnegative");
  }
  const auto iv = detail::cell_interval(row_budget, col_budget, row_tail, col_tail, kMarginTolerance);
  return {iv.lower, iv.upper, iv.width};
}

TransportMatrix tbp_forward(const Margins& margins, const ChartParams& params, const SquashSpec& squash) {
  squash.validate();
  auto x = detail::tbp_sweep<double>(margins.row_sums(), margins.col_sums(), params.span(), squash,
                                     margins.tolerance());
  return TransportMatrix::adopt(std::move(x), margins);
}

ChartParams tbp_inverse(const TransportMatrix& matrix, const SquashSpec& squash) {
  squash.validate();
  const auto& margins = matrix.margins();
  const std::size_t n = margins.n();
  const std::size_t m = margins.m();
  const double tol = margins.tolerance();
  const Matrix& x = matrix.entries();
  using DD = detail::DoubleDouble;
  std::vector<DD> below(n, DD(0.0));
  for (std::size_t i = n - 1; i-- > 0;) below[i] = below[i + 1] + margins.row_sums()[i + 1];

  // Budgets are read off the matrix: what is left of row i from column j on,
  // and of column j from row i down.
  BasicMatrix<DD> row_left(n, m + 1, DD(0.0));
  BasicMatrix<DD> col_left(n + 1, m, DD(0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = m; j-- > 0;) row_left(i, j) = row_left(i, j + 1) + x(i, j);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = n; i-- > 0;) col_left(i, j) = col_left(i + 1, j) + x(i, j);

  Vector t;
  t.reserve(chart_dimension(n, m));
  std::vector<DD> right(m, DD(0.0));
  std::vector<DD> under_left(m + 1, DD(0.0));   // Σ_{k<j} col_left(i + 1, k)
  std::vector<DD> under_right(m + 1, DD(0.0));  // Σ_{k>j} col_left(i + 1, k)
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = m - 1; j-- > 0;) right[j] = right[j + 1] + col_left(i, j + 1);
    under_right[m - 1] = DD(0.0);
    for (std::size_t j = m - 1; j-- > 0;) under_right[j] = under_right[j + 1] + col_left(i + 1, j + 1);
    for (std::size_t j = 0; j < m; ++j) under_left[j + 1] = under_left[j] + col_left(i + 1, j);
    for (std::size_t j = 0; j + 1 < m; ++j) {
      const auto b = detail::cell_bounds(row_left(i, j), col_left(i, j), right[j], below[i], tol);
      const double width = b.iv.width.value();
      if (is_degenerate(width, b.iv.upper.value())) {
        fail(ErrorKind::DegenerateInterval, "cell (" + std::to_string(i) + ", " + std::to_string(j) +
                                                ") has no freedom; its parameter is not identifiable");
      }
      // slacks as sums of entries, never as differences
      const DD hi = b.upper_is_row ? row_left(i, j + 1) : col_left(i + 1, j);
      DD lo = x(i, j);
      if (b.lower_by == detail::LowerBy::RowTail) lo = under_right[j];
      if (b.lower_by == detail::LowerBy::ColTail) lo = under_left[j] + under_right[j];
      try {
        t.push_back(detail::unsquash_slack(lo.value(), hi.value(), width, squash));
      } catch (const Error& e) {
        fail(e.kind(), "cell (" + std::to_string(i) + ", " + std::to_string(j) + "): " + e.what());
      }
    }
  }
  return ChartParams(std::move(t));
}

Matrix tbp_jacobian(const Margins& margins, const ChartParams& params, const SquashSpec& squash) {
  squash.validate();
  const auto seeds = detail::seed_variables(params.span());
  auto x = detail::tbp_sweep<detail::Dual>(detail::lift<detail::Dual>(margins.row_sums()),
                                           detail::lift<detail::Dual>(margins.col_sums()), seeds, squash,
                                           margins.tolerance());
  return detail::jacobian_of(x, params.size());
}

}  // namespace birkhoff
