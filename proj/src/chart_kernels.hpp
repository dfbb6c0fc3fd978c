#pragma once

// Scalar-generic chart sweeps. Instantiated with double for evaluation and
// with Dual for exact Jacobians.

#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "birkhoff/error.hpp"
#include "birkhoff/matrix.hpp"
#include "birkhoff/rtbp.hpp"
#include "birkhoff/squash.hpp"
#include "birkhoff/transport.hpp"
#include "double_double.hpp"
#include "dual.hpp"

namespace birkhoff::detail {

template <class T>
struct Interval {
  T lower;
  T upper;
  T width;
};

template <class T>
Interval<T> make_interval(T lower, T upper, double tol) {
  const double gap = value_of(lower) - value_of(upper);
  if (gap > tol) {
    fail(ErrorKind::InfeasibleState, "feasible interval is empty: lower " + std::to_string(value_of(lower)) +
                                         " > upper " + std::to_string(value_of(upper)));
  }
  if (gap > 0.0) lower = upper;
  T width = upper - lower;
  return {std::move(lower), std::move(upper), std::move(width)};
}

template <class T>
Interval<T> cell_interval(const T& row_budget, const T& col_budget, const T& row_tail, const T& col_tail,
                          double tol) {
  T lower = max_of(max_of(T(0.0), row_budget - row_tail), col_budget - col_tail);
  return make_interval(std::move(lower), min_of(row_budget, col_budget), tol);
}

/// Relative position in [0, 1] produced by the squash.
template <class T>
T squash_unit(const T& t, const T& width, const SquashSpec& spec) {
  switch (spec.kind) {
    case SquashKind::Sigmoid:
      return sigmoid(t);
    case SquashKind::Scaled:
      return sigmoid(T(spec.beta) * t / (width + T(spec.epsilon)));
    case SquashKind::MarginedScaled:
      return T(spec.rho) + T(1.0 - 2.0 * spec.rho) * sigmoid(T(spec.beta) * t / (width + T(spec.epsilon)));
    case SquashKind::LinearClipped: {
      const double v = value_of(t);
      if (v <= 0.0) return T(0.0);
      if (v >= 1.0) return T(1.0);
      return t;
    }
  }
  return T(0.5);
}

/// x = L + Δ·u(t), clamped into [L, U]; degenerate intervals pin x to L.
template <class T>
T place(const Interval<T>& iv, const T& t, const SquashSpec& spec) {
  if (is_degenerate(value_of(iv.width), value_of(iv.upper))) return iv.lower;
  T x = iv.lower + iv.width * squash_unit(t, iv.width, spec);
  if (value_of(x) > value_of(iv.upper)) return iv.upper;
  if (value_of(x) < value_of(iv.lower)) return iv.lower;
  return x;
}

inline double mass_tolerance(double mass) { return kMarginTolerance * std::max(1.0, mass); }

template <class T>
T sum_of(std::span<const T> v) {
  T s(0.0);
  for (const auto& x : v) s += x;
  return s;
}

/// Relative position u together with 1 − u, each evaluated without
/// cancellation.
template <class T>
std::pair<T, T> squash_pair(const T& t, const T& width, const SquashSpec& spec) {
  switch (spec.kind) {
    case SquashKind::Sigmoid:
      return {sigmoid(t), sigmoid(-t)};
    case SquashKind::Scaled: {
      const T z = T(spec.beta) * t / (width + T(spec.epsilon));
      return {sigmoid(z), sigmoid(-z)};
    }
    case SquashKind::MarginedScaled: {
      const T z = T(spec.beta) * t / (width + T(spec.epsilon));
      const T k(1.0 - 2.0 * spec.rho);
      return {T(spec.rho) + k * sigmoid(z), T(spec.rho) + k * sigmoid(-z)};
    }
    case SquashKind::LinearClipped: {
      const double v = value_of(t);
      if (v <= 0.0) return {T(0.0), T(1.0)};
      if (v >= 1.0) return {T(1.0), T(0.0)};
      return {t, T(1.0) - t};
    }
  }
  return {T(0.5), T(0.5)};
}

/// Which term sets each bound of a cell interval.
enum class LowerBy { Zero, RowTail, ColTail };

template <class T>
struct CellBounds {
  Interval<T> iv;
  LowerBy lower_by = LowerBy::Zero;
  bool upper_is_row = false;
  bool upper_is_col = false;
};

template <class T>
CellBounds<T> cell_bounds(const T& r, const T& c, const T& right, const T& below, double tol) {
  CellBounds<T> b;
  T lower(0.0);
  const T from_row = r - right;
  const T from_col = c - below;
  if (value_of(from_row) > 0.0) {
    lower = from_row;
    b.lower_by = LowerBy::RowTail;
  }
  if (value_of(from_col) > value_of(lower)) {
    lower = from_col;
    b.lower_by = LowerBy::ColTail;
  }
  b.upper_is_row = value_of(r) <= value_of(c);
  b.upper_is_col = value_of(c) <= value_of(r);
  b.iv = make_interval(std::move(lower), b.upper_is_row ? r : c, tol);
  return b;
}

template <class T>
struct CellFill {
  T x;
  T row_left;
  T col_left;
  T lo;
  LowerBy lower_by;
};

/// Places one cell and returns the budgets left in its row and column. The
/// budgets come from the slacks x − L and U − x of the bound that is active,
/// not from subtracting x, so small remainders keep full relative precision.
template <class T>
CellFill<T> fill_cell(const T& r, const T& c, const T& right, const T& below, const T& t, const SquashSpec& spec,
                      double tol) {
  const auto b = cell_bounds(r, c, right, below, tol);
  const auto& iv = b.iv;
  T lo(0.0);
  T hi = iv.width;
  if (!is_degenerate(value_of(iv.width), value_of(iv.upper))) {
    auto [u, v] = squash_pair(t, iv.width, spec);
    if (value_of(u) <= value_of(v)) {
      v = T(1.0) - u;
    } else {
      u = T(1.0) - v;
    }
    lo = iv.width * u;
    hi = iv.width * v;
  }
  T x = value_of(lo) <= value_of(hi) ? iv.lower + lo : iv.upper - hi;
  if (value_of(x) > value_of(iv.upper)) x = iv.upper;
  if (value_of(x) < value_of(iv.lower)) x = iv.lower;

  T row_left = b.upper_is_row ? hi : b.lower_by == LowerBy::RowTail ? right - lo : r - x;
  T col_left = b.upper_is_col ? hi : b.lower_by == LowerBy::ColTail ? below - lo : c - x;
  if (value_of(row_left) < 0.0) row_left = T(0.0);
  if (value_of(col_left) < 0.0) col_left = T(0.0);
  return {std::move(x), std::move(row_left), std::move(col_left), std::move(lo), b.lower_by};
}

/// North-west corner sweep. The capacity of the columns to the right is a
/// suffix sum taken once per row; the budget of the rows below never changes
/// during the sweep, so it is a suffix sum of the original row margins.
template <class T>
BasicMatrix<T> tbp_sweep_impl(std::vector<T> r, std::vector<T> c, std::span<const T> params, const SquashSpec& spec,
                              double tol) {
  const std::size_t n = r.size();
  const std::size_t m = c.size();
  if (params.size() != chart_dimension(n, m)) {
    fail(ErrorKind::DimensionMismatch, "expected " + std::to_string(chart_dimension(n, m)) + " chart parameters, got " +
                                           std::to_string(params.size()));
  }
  BasicMatrix<T> x(n, m, T(0.0));
  std::vector<T> below(n, T(0.0));
  for (std::size_t i = n - 1; i-- > 0;) below[i] = below[i + 1] + r[i + 1];
  std::vector<T> right(m, T(0.0));

  std::size_t p = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = m - 1; j-- > 0;) right[j] = right[j + 1] + c[j + 1];
    bool last_by_row_tail = false;
    T last_lo(0.0);
    for (std::size_t j = 0; j + 1 < m; ++j) {
      auto cell = fill_cell(r[i], c[j], right[j], below[i], params[p++], spec, tol);
      x(i, j) = std::move(cell.x);
      r[i] = std::move(cell.row_left);
      c[j] = std::move(cell.col_left);
      last_by_row_tail = cell.lower_by == LowerBy::RowTail;
      last_lo = std::move(cell.lo);
    }
    // c_last − (c_last − lo) when the last free cell was bound by the tail
    if (last_by_row_tail) {
      c[m - 1] = last_lo;
    } else {
      c[m - 1] -= r[i];
    }
    x(i, m - 1) = r[i];
    r[i] = T(0.0);
  }
  for (std::size_t j = 0; j < m; ++j) x(n - 1, j) = max_of(c[j], T(0.0));
  return x;
}

/// Plain doubles run the sweep in double-double and round each entry once.
template <class T>
BasicMatrix<T> tbp_sweep(std::vector<T> r, std::vector<T> c, std::span<const T> params, const SquashSpec& spec,
                         double tol) {
  if constexpr (std::is_same_v<T, double>) {
    using DD = DoubleDouble;
    const std::vector<DD> t(params.begin(), params.end());
    std::vector<DD> rows(r.begin(), r.end());
    std::vector<DD> cols(c.begin(), c.end());
    // spread any tolerated mass imbalance over the columns in proportion
    DD row_mass(0.0), col_mass(0.0);
    for (const auto& v : rows) row_mass += v;
    for (const auto& v : cols) col_mass += v;
    if (col_mass.value() > 0.0 && (row_mass.hi() != col_mass.hi() || row_mass.lo() != col_mass.lo())) {
      const DD scale = row_mass / col_mass;
      for (auto& v : cols) v *= scale;
    }
    const auto x = tbp_sweep_impl<DD>(std::move(rows), std::move(cols), std::span<const DD>(t), spec, tol);
    BasicMatrix<double> out(x.rows(), x.cols(), 0.0);
    for (std::size_t q = 0; q < x.size(); ++q) out.data()[q] = x.data()[q].value();
    return out;
  } else {
    return tbp_sweep_impl<T>(std::move(r), std::move(c), params, spec, tol);
  }
}

/// Inverse of the squash from the two slacks lo = x − L and hi = U − x.
double unsquash_slack(double lo, double hi, double width, const SquashSpec& spec);

template <class T>
struct RtbpState {
  std::span<const T> params;
  const SquashSpec& spec;
  double tol;
  BasicMatrix<T>& out;
  const RtbpOptions& options;
  bool counting = false;
  std::size_t cursor = 0;

  T next() {
    if (counting) {
      ++cursor;
      return T(0.0);
    }
    if (cursor >= params.size()) fail(ErrorKind::DimensionMismatch, "recursive chart ran out of parameters");
    return params[cursor++];
  }
};

/// Sequential bounded fill of target over caps; the last entry absorbs the
/// remainder.
template <class T>
std::vector<T> split_group(RtbpState<T>& st, std::span<const T> caps, const T& target) {
  const std::size_t g = caps.size();
  std::vector<T> v(g, T(0.0));
  if (g == 0) return v;
  std::vector<T> after(g, T(0.0));
  for (std::size_t i = g - 1; i-- > 0;) after[i] = after[i + 1] + caps[i + 1];
  const double total = value_of(after[0] + caps[0]);
  if (value_of(target) < -st.tol || value_of(target) > total + st.tol) {
    fail(ErrorKind::InfeasibleState, "split target " + std::to_string(value_of(target)) + " outside [0, " +
                                         std::to_string(total) + "]");
  }
  T remaining = max_of(target, T(0.0));
  for (std::size_t i = 0; i + 1 < g; ++i) {
    const auto iv = make_interval(max_of(T(0.0), remaining - after[i]), min_of(caps[i], remaining), st.tol);
    v[i] = place(iv, st.next(), st.spec);
    remaining -= v[i];
  }
  v[g - 1] = min_of(remaining, caps[g - 1]);
  return v;
}

inline void record_chip(const RtbpOptions& options, ChipOff::Axis axis, std::size_t index, const auto& values) {
  if (options.trace == nullptr) return;
  ChipOff chip;
  chip.axis = axis;
  chip.index = index;
  for (const auto& v : values) chip.values.push_back(value_of(v));
  options.trace->chips.push_back(std::move(chip));
}

template <class T>
Vector values_of(const std::vector<T>& v) {
  Vector out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(value_of(x));
  return out;
}

template <class T>
void rtbp_block(RtbpState<T>& st, std::vector<T> r, std::vector<T> c, std::size_t r0, std::size_t c0, int depth,
                int parent) {
  const std::size_t n = r.size();
  const std::size_t m = c.size();
  if (n == 1) {
    for (std::size_t j = 0; j < m; ++j) st.out(r0, c0 + j) = c[j];
    return;
  }
  if (m == 1) {
    for (std::size_t i = 0; i < n; ++i) st.out(r0 + i, c0) = r[i];
    return;
  }
  if (n == 2 && m == 2) {
    const auto iv = cell_interval(r[0], c[0], c[1], r[1], st.tol);
    T x00 = place(iv, st.next(), st.spec);
    T x01 = r[0] - x00;
    T x10 = c[0] - x00;
    st.out(r0 + 1, c0 + 1) = max_of(c[1] - x01, T(0.0));
    st.out(r0, c0) = std::move(x00);
    st.out(r0, c0 + 1) = std::move(x01);
    st.out(r0 + 1, c0) = std::move(x10);
    return;
  }

  const std::size_t k = n % 2 == 0 ? n / 2 : (n + 1) / 2;
  const std::size_t l = m % 2 == 0 ? m / 2 : (m + 1) / 2;
  const std::span<const T> rs(r), cs(c);
  const T R1 = sum_of(rs.first(k));
  const T R2 = sum_of(rs.subspan(k));
  const T C1 = sum_of(cs.first(l));
  const T C2 = sum_of(cs.subspan(l));

  const auto iv = make_interval(max_of(max_of(T(0.0), R1 - C2), C1 - R2), min_of(R1, C1), st.tol);
  T m11 = place(iv, st.next(), st.spec);
  T m12 = R1 - m11;
  T m21 = C1 - m11;
  T m22 = max_of(R2 - m21, T(0.0));

  auto rp1 = split_group(st, rs.first(k), m11);
  auto rp2 = split_group(st, rs.subspan(k), m21);
  auto cp1 = split_group(st, cs.first(l), m11);
  auto cp2 = split_group(st, cs.subspan(l), m12);

  std::vector<T> r_prime(rp1);
  r_prime.insert(r_prime.end(), rp2.begin(), rp2.end());
  std::vector<T> c_prime(cp1);
  c_prime.insert(c_prime.end(), cp2.begin(), cp2.end());
  std::vector<T> r_dprime(n, T(0.0)), c_dprime(m, T(0.0));
  for (std::size_t i = 0; i < n; ++i) r_dprime[i] = max_of(r[i] - r_prime[i], T(0.0));
  for (std::size_t j = 0; j < m; ++j) c_dprime[j] = max_of(c[j] - c_prime[j], T(0.0));

  int self = parent;
  if (st.options.trace != nullptr || st.options.check_balance) {
    BlockSplit split;
    split.row_offset = r0;
    split.col_offset = c0;
    split.n = n;
    split.m = m;
    split.k = k;
    split.l = l;
    split.depth = depth;
    split.parent = parent;
    split.row_sums = values_of(r);
    split.col_sums = values_of(c);
    split.m11 = value_of(m11);
    split.m12 = value_of(m12);
    split.m21 = value_of(m21);
    split.m22 = value_of(m22);
    split.r_prime = values_of(r_prime);
    split.r_dprime = values_of(r_dprime);
    split.c_prime = values_of(c_prime);
    split.c_dprime = values_of(c_dprime);
    if (st.options.check_balance) {
      const double violation = block_balance_violation(split);
      if (violation > st.options.balance_tolerance) {
        fail(ErrorKind::InfeasibleState, "block balance violated by " + std::to_string(violation));
      }
    }
    if (st.options.trace != nullptr) {
      self = static_cast<int>(st.options.trace->nodes.size());
      st.options.trace->nodes.push_back(std::move(split));
    }
  }

  auto slice = [](const std::vector<T>& v, std::size_t from, std::size_t to) {
    return std::vector<T>(v.begin() + static_cast<std::ptrdiff_t>(from), v.begin() + static_cast<std::ptrdiff_t>(to));
  };
  rtbp_block(st, slice(r_prime, 0, k), slice(c_prime, 0, l), r0, c0, depth + 1, self);
  rtbp_block(st, slice(r_dprime, 0, k), slice(c_prime, l, m), r0, c0 + l, depth + 1, self);
  rtbp_block(st, slice(r_prime, k, n), slice(c_dprime, 0, l), r0 + k, c0, depth + 1, self);
  rtbp_block(st, slice(r_dprime, k, n), slice(c_dprime, l, m), r0 + k, c0 + l, depth + 1, self);
}

/// Full recursive chart including the odd-dimension chip-off.
template <class T>
BasicMatrix<T> rtbp_sweep(std::vector<T> r, std::vector<T> c, std::span<const T> params, const SquashSpec& spec,
                          double tol, const RtbpOptions& options, bool counting = false,
                          std::size_t* consumed = nullptr) {
  std::size_t rows = r.size();
  std::size_t cols = c.size();
  BasicMatrix<T> out(rows, cols, T(0.0));
  RtbpState<T> st{params, spec, tol, out, options, counting};

  if (rows >= 3 && rows % 2 == 1 && cols >= 2) {
    auto v = split_group(st, std::span<const T>(c), r[rows - 1]);
    for (std::size_t j = 0; j < cols; ++j) {
      c[j] = max_of(c[j] - v[j], T(0.0));
      out(rows - 1, j) = v[j];
    }
    record_chip(options, ChipOff::Axis::Row, rows - 1, v);
    --rows;
  }
  if (cols >= 3 && cols % 2 == 1 && rows >= 2) {
    auto w = split_group(st, std::span<const T>(r).first(rows), c[cols - 1]);
    for (std::size_t i = 0; i < rows; ++i) {
      r[i] = max_of(r[i] - w[i], T(0.0));
      out(i, cols - 1) = w[i];
    }
    record_chip(options, ChipOff::Axis::Column, cols - 1, w);
    --cols;
  }
  r.resize(rows);
  c.resize(cols);
  rtbp_block(st, std::move(r), std::move(c), 0, 0, 0, -1);

  if (consumed != nullptr) *consumed = st.cursor;
  if (!counting && st.cursor != params.size()) {
    fail(ErrorKind::DimensionMismatch, "recursive chart consumed " + std::to_string(st.cursor) + " of " +
                                           std::to_string(params.size()) + " parameters");
  }
  return out;
}

template <class T>
std::vector<T> lift(std::span<const double> v) {
  return std::vector<T>(v.begin(), v.end());
}

inline std::vector<Dual> seed_variables(std::span<const double> v) {
  std::vector<Dual> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(Dual::variable(v[i], i, v.size()));
  return out;
}

inline Matrix jacobian_of(const BasicMatrix<Dual>& x, std::size_t dim) {
  Matrix jac(x.size(), dim, 0.0);
  for (std::size_t q = 0; q < x.size(); ++q) {
    const auto& g = x.data()[q].grad();
    for (std::size_t p = 0; p < g.size() && p < dim; ++p) jac(q, p) = g[p];
  }
  return jac;
}

inline Matrix values_matrix(const BasicMatrix<Dual>& x) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t q = 0; q < x.size(); ++q) out.data()[q] = x.data()[q].value();
  return out;
}

}  // namespace birkhoff::detail
