#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "birkhoff/matrix.hpp"
#include "birkhoff/squash.hpp"

namespace birkhoff {

inline constexpr double kMarginTolerance = 1e-12;
inline constexpr double kDegenerateWidth = 1e-14;

/// A cell has no freedom when Δ ≤ 1e-14·U. Measured against the upper bound,
/// so a small budget with L = 0 keeps its parameter.
inline bool is_degenerate(double width, double upper) noexcept { return !(width > kDegenerateWidth * upper); }

/// Row and column sums of a transportation polytope T(r, c).
class Margins {
 public:
  /// Validates strict positivity and mass balance (|Σr − Σc| ≤ 1e-12·max(1, M)).
  Margins(Vector row_sums, Vector col_sums);

  /// r = 1_n, c = 1_m. Only balanced when n == m.
  static Margins ones(std::size_t n);

  std::size_t n() const noexcept { return rows_.size(); }
  std::size_t m() const noexcept { return cols_.size(); }
  const Vector& row_sums() const noexcept { return rows_; }
  const Vector& col_sums() const noexcept { return cols_; }
  double total_mass() const noexcept { return mass_; }
  /// True when every margin equals 1 (the Birkhoff polytope).
  bool is_birkhoff(double tol = kMarginTolerance) const noexcept;
  /// Tolerance for margin checks, scaled to the total mass.
  double tolerance() const noexcept;

 private:
  Vector rows_;
  Vector cols_;
  double mass_ = 0.0;
};

/// A nonnegative matrix whose row and column sums match its margins.
class TransportMatrix {
 public:
  /// Validates nonnegativity and margin sums within tol·max(1, M).
  TransportMatrix(Matrix entries, Margins margins, double tol = kMarginTolerance);

  /// Wraps output of an exact construction without re-validating it.
  static TransportMatrix adopt(Matrix entries, Margins margins);

  /// Doubly stochastic matrix from raw entries (margins all ones).
  static TransportMatrix doubly_stochastic(Matrix entries, double tol = kMarginTolerance);

  const Matrix& entries() const noexcept { return entries_; }
  const Margins& margins() const noexcept { return margins_; }
  std::size_t n() const noexcept { return entries_.rows(); }
  std::size_t m() const noexcept { return entries_.cols(); }
  double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }
  MarginDeviation deviation() const;

 private:
  struct Unchecked {};
  TransportMatrix(Matrix entries, Margins margins, Unchecked);

  Matrix entries_;
  Margins margins_;
};

struct FeasibleInterval {
  double lower = 0.0;
  double upper = 0.0;
  double width = 0.0;
};

/// Free chart coordinates, row-major over the leading (n−1)×(m−1) cells.
struct ChartParams {
  Vector values;

  ChartParams() = default;
  explicit ChartParams(Vector v) : values(std::move(v)) {}
  static ChartParams zeros(std::size_t n, std::size_t m) { return ChartParams(Vector((n - 1) * (m - 1), 0.0)); }

  std::size_t size() const noexcept { return values.size(); }
  std::span<const double> span() const noexcept { return values; }
};

inline std::size_t chart_dimension(std::size_t n, std::size_t m) { return (n - 1) * (m - 1); }

/// Interval of values a cell may take given the remaining budgets of its row
/// and column and the remaining capacity after it:
///   lower = max(0, row_budget − row_tail, col_budget − col_tail)
///   upper = min(row_budget, col_budget)
/// row_tail is the budget of the columns to the right of the cell; col_tail
/// the budget of the rows below it. Throws InfeasibleState if lower exceeds
/// upper by more than 1e-12.
FeasibleInterval feasible_interval(double row_budget, double col_budget, double row_tail, double col_tail);

/// Sequential north-west corner chart (TBP).
TransportMatrix tbp_forward(const Margins& margins, const ChartParams& params, const SquashSpec& squash = {});

/// Constructive inverse of tbp_forward on the interior of T(r, c).
ChartParams tbp_inverse(const TransportMatrix& matrix, const SquashSpec& squash = {});

/// ∂x_ij/∂t_kl, rows indexed by i·m + j, columns by the parameter index.
Matrix tbp_jacobian(const Margins& margins, const ChartParams& params, const SquashSpec& squash = {});

}  // namespace birkhoff
