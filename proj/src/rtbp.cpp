#include "birkhoff/rtbp.hpp"

#include <cmath>
#include <numeric>

#include "chart_kernels.hpp"

namespace birkhoff {

namespace {

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

MassSplit split_mass(double r1, double r2, double c1, double c2, double t0, const SquashSpec& squash) {
  squash.validate();
  const double tol = detail::mass_tolerance(r1 + r2);
  if (std::abs((r1 + r2) - (c1 + c2)) > tol) fail(ErrorKind::InvalidArgument, "R1 + R2 must equal C1 + C2");
  if (r1 < 0.0 || r2 < 0.0 || c1 < 0.0 || c2 < 0.0) fail(ErrorKind::InvalidArgument, "block masses must be >= 0");
  const auto iv = detail::make_interval(std::max({0.0, r1 - c2, c1 - r2}), std::min(r1, c1), tol);
  MassSplit out;
  out.m11 = detail::place(iv, t0, squash);
  out.m12 = r1 - out.m11;
  out.m21 = c1 - out.m11;
  out.m22 = std::max(r2 - out.m21, 0.0);
  return out;
}

Vector split_margins(std::span<const double> caps, double target_mass, std::span<const double> params,
                     const SquashSpec& squash) {
  squash.validate();
  if (caps.empty()) fail(ErrorKind::InvalidArgument, "split_margins needs at least one cap");
  if (params.size() + 1 != caps.size()) {
    fail(ErrorKind::DimensionMismatch, "a group of " + std::to_string(caps.size()) + " needs " +
                                           std::to_string(caps.size() - 1) + " parameters");
  }
  for (const double v : caps)
    if (v < 0.0) fail(ErrorKind::InvalidArgument, "caps must be nonnegative");
  Matrix scratch;
  const RtbpOptions options;
  detail::RtbpState<double> st{params, squash, detail::mass_tolerance(sum(caps)), scratch, options};
  return detail::split_group(st, caps, target_mass);
}

TransportMatrix rtbp_forward(const Margins& margins, const ChartParams& params, const SquashSpec& squash,
                             const RtbpOptions& options) {
  squash.validate();
  auto x = detail::rtbp_sweep<double>(margins.row_sums(), margins.col_sums(), params.span(), squash,
                                      margins.tolerance(), options);
  return TransportMatrix::adopt(std::move(x), margins);
}

Matrix rtbp_jacobian(const Margins& margins, const ChartParams& params, const SquashSpec& squash) {
  squash.validate();
  const auto seeds = detail::seed_variables(params.span());
  auto x = detail::rtbp_sweep<detail::Dual>(detail::lift<detail::Dual>(margins.row_sums()),
                                            detail::lift<detail::Dual>(margins.col_sums()), seeds, squash,
                                            margins.tolerance(), RtbpOptions{});
  return detail::jacobian_of(x, params.size());
}

std::size_t count_params(std::size_t n, std::size_t m) {
  if (n == 0 || m == 0) fail(ErrorKind::InvalidArgument, "dimensions must be positive");
  // Balanced margins of total mass n·m; the values do not affect the count.
  const Vector rows(n, static_cast<double>(m));
  const Vector cols(m, static_cast<double>(n));
  std::size_t consumed = 0;
  detail::rtbp_sweep<double>(rows, cols, std::span<const double>{}, SquashSpec{},
                             detail::mass_tolerance(static_cast<double>(n * m)), RtbpOptions{}, true, &consumed);
  return consumed;
}

double block_balance_violation(const BlockSplit& s) {
  const std::span<const double> rp(s.r_prime), rpp(s.r_dprime), cp(s.c_prime), cpp(s.c_dprime);
  if (rp.size() != s.n || rpp.size() != s.n || cp.size() != s.m || cpp.size() != s.m) {
    fail(ErrorKind::DimensionMismatch, "block split vectors do not match block shape");
  }
  double v = 0.0;
  for (std::size_t i = 0; i < s.n; ++i) {
    v = std::max(v, std::abs(rp[i] + rpp[i] - s.row_sums[i]));
    v = std::max({v, -rp[i], -rpp[i]});
  }
  for (std::size_t j = 0; j < s.m; ++j) {
    v = std::max(v, std::abs(cp[j] + cpp[j] - s.col_sums[j]));
    v = std::max({v, -cp[j], -cpp[j]});
  }
  const std::size_t k = s.k, l = s.l, n2 = s.n - s.k, m2 = s.m - s.l;
  const double pairs[4][3] = {
      {sum(rp.first(k)), sum(cp.first(l)), s.m11},
      {sum(rpp.first(k)), sum(cp.last(m2)), s.m12},
      {sum(rp.last(n2)), sum(cpp.first(l)), s.m21},
      {sum(rpp.last(n2)), sum(cpp.last(m2)), s.m22},
  };
  for (const auto& p : pairs) v = std::max({v, std::abs(p[0] - p[2]), std::abs(p[1] - p[2])});

  const std::span<const double> rs(s.row_sums), cs(s.col_sums);
  const double r1 = sum(rs.first(k)), r2 = sum(rs.last(n2)), c1 = sum(cs.first(l)), c2 = sum(cs.last(m2));
  const double lower = std::max({0.0, r1 - c2, c1 - r2});
  const double upper = std::min(r1, c1);
  v = std::max({v, lower - s.m11, s.m11 - upper});
  return v;
}

RtbpFit rtbp_fit(const TransportMatrix& target, const SquashSpec& squash, int max_iterations, double tolerance) {
  const auto& margins = target.margins();
  const std::size_t dim = chart_dimension(margins.n(), margins.m());
  const std::size_t cells = margins.n() * margins.m();
  const auto& goal = target.entries().storage();

  RtbpFit fit;
  fit.params = ChartParams(Vector(dim, 0.0));
  auto residual_of = [&](const Matrix& x) {
    Vector res(cells);
    for (std::size_t q = 0; q < cells; ++q) res[q] = x.data()[q] - goal[q];
    return res;
  };
  auto sq = [](const Vector& v) { return std::inner_product(v.begin(), v.end(), v.begin(), 0.0); };
  auto max_abs = [](const Vector& v) {
    double a = 0.0;
    for (const double x : v) a = std::max(a, std::abs(x));
    return a;
  };

  Vector res = residual_of(rtbp_forward(margins, fit.params, squash).entries());
  double cost = sq(res);
  double damping = 1e-3;
  for (fit.iterations = 0; fit.iterations < max_iterations; ++fit.iterations) {
    fit.max_entry_error = max_abs(res);
    if (fit.max_entry_error < tolerance) {
      fit.converged = true;
      break;
    }
    const Matrix jac = rtbp_jacobian(margins, fit.params, squash);
    Matrix normal(dim, dim, 0.0);
    Vector grad(dim, 0.0);
    for (std::size_t q = 0; q < cells; ++q) {
      for (std::size_t a = 0; a < dim; ++a) {
        grad[a] += jac(q, a) * res[q];
        for (std::size_t b = 0; b < dim; ++b) normal(a, b) += jac(q, a) * jac(q, b);
      }
    }
    bool improved = false;
    while (!improved && damping < 1e12) {
      Matrix damped = normal;
      for (std::size_t a = 0; a < dim; ++a) damped(a, a) += damping * std::max(normal(a, a), 1e-12);
      Vector step;
      try {
        step = solve_linear(damped, grad);
      } catch (const Error&) {
        damping *= 10.0;
        continue;
      }
      ChartParams trial = fit.params;
      for (std::size_t a = 0; a < dim; ++a) trial.values[a] -= step[a];
      Vector trial_res = residual_of(rtbp_forward(margins, trial, squash).entries());
      const double trial_cost = sq(trial_res);
      if (trial_cost < cost) {
        fit.params = std::move(trial);
        res = std::move(trial_res);
        cost = trial_cost;
        damping = std::max(damping / 3.0, 1e-12);
        improved = true;
      } else {
        damping *= 4.0;
      }
    }
    if (!improved) break;
  }
  fit.max_entry_error = max_abs(res);
  fit.converged = fit.max_entry_error < tolerance;
  return fit;
}

}  // namespace birkhoff
