#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "birkhoff/transport.hpp"

namespace birkhoff {

/// One 2×2 block decomposition performed by the recursive chart.
///
/// Rows [row_offset, row_offset + n) are cut after k rows, columns
/// [col_offset, col_offset + m) after l columns. r_prime/r_dprime and
/// c_prime/c_dprime are the margin splits (r' + r'' = r, c' + c'' = c).
struct BlockSplit {
  std::size_t row_offset = 0;
  std::size_t col_offset = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t l = 0;
  int depth = 0;
  int parent = -1;  // index into RtbpTrace::nodes, -1 for the root

  Vector row_sums;
  Vector col_sums;
  double m11 = 0.0, m12 = 0.0, m21 = 0.0, m22 = 0.0;
  Vector r_prime, r_dprime, c_prime, c_dprime;
};

/// A last-row or last-column fill applied before recursing on an even
/// remainder.
struct ChipOff {
  enum class Axis { Row, Column } axis = Axis::Row;
  std::size_t index = 0;
  Vector values;
};

struct RtbpTrace {
  std::vector<ChipOff> chips;
  std::vector<BlockSplit> nodes;
};

struct RtbpOptions {
  /// Collect every split into the trace when non-null.
  RtbpTrace* trace = nullptr;
  /// Throw InfeasibleState if a split violates block balance.
  bool check_balance = false;
  double balance_tolerance = kMarginTolerance;
};

struct MassSplit {
  double m11 = 0.0, m12 = 0.0, m21 = 0.0, m22 = 0.0;
};

/// Chooses M11 within [max(0, R1 − C2, C1 − R2), min(R1, C1)] and derives
/// the other three block masses.
MassSplit split_mass(double r1, double r2, double c1, double c2, double t0, const SquashSpec& squash = {});

/// Splits target_mass over a group with per-entry caps by a sequential
/// bounded fill; consumes caps.size() − 1 parameters.
Vector split_margins(std::span<const double> caps, double target_mass, std::span<const double> params,
                     const SquashSpec& squash = {});

/// Recursive block-decomposition chart (RTBP). Odd top-level dimensions are
/// first reduced by filling the last row and/or column.
///
/// Parameter order: [last-row chip][last-column chip] then, per split in
/// pre-order: M11, row split of I1, row split of I2, column split of J1,
/// column split of J2, followed by blocks 11, 12, 21, 22.
TransportMatrix rtbp_forward(const Margins& margins, const ChartParams& params, const SquashSpec& squash = {},
                             const RtbpOptions& options = {});

Matrix rtbp_jacobian(const Margins& margins, const ChartParams& params, const SquashSpec& squash = {});

/// Number of parameters the recursion consumes on an n×m instance, obtained
/// by running the recursion's bookkeeping rather than a closed form.
std::size_t count_params(std::size_t n, std::size_t m);

/// Largest violation among the margin-split identities, the four block
/// balance equalities (each checked on both sides) and the M11 interval.
double block_balance_violation(const BlockSplit& split);

struct RtbpFit {
  ChartParams params;
  double max_entry_error = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Finds RTBP parameters reproducing a target matrix by damped Gauss–Newton
/// (Levenberg–Marquardt) on the entrywise residuals.
RtbpFit rtbp_fit(const TransportMatrix& target, const SquashSpec& squash = {}, int max_iterations = 500,
                 double tolerance = 1e-8);

}  // namespace birkhoff
