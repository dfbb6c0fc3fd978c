#include <doctest.h>

#include <Eigen/Dense>

#include "birkhoff/rtbp.hpp"
#include "oracles.hpp"

using namespace birkhoff;

namespace {

Eigen::MatrixXd to_eigen(const Matrix& a) {
  Eigen::MatrixXd e(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) e(i, j) = a(i, j);
  return e;
}

}  // namespace

TEST_CASE("rtbp forward examples") {
  auto h = rtbp_forward(Margins::ones(2), ChartParams({0.0}));
  CHECK(max_abs_diff(h.entries(), Matrix(2, 2, 0.5)) == 0.0);

  h = rtbp_forward(Margins::ones(4), ChartParams::zeros(4, 4));
  CHECK(max_abs_diff(h.entries(), Matrix(4, 4, 0.25)) < 1e-15);

  h = rtbp_forward(Margins::ones(3), ChartParams::zeros(3, 3));
  CHECK(ds_deviation(h.entries()).max() < 1e-15);
  for (double v : h.entries().data()) CHECK(v > 0.0);
}

TEST_CASE("split mass examples") {
  auto s = split_mass(2, 2, 2, 2, 0.0);
  CHECK(s.m11 == 1.0);
  CHECK(s.m12 == 1.0);
  CHECK(s.m21 == 1.0);
  CHECK(s.m22 == 1.0);
  s = split_mass(2, 2, 2, 2, 20.0);
  CHECK(std::abs(s.m11 - 2.0) < 1e-8);
  CHECK(std::abs(s.m12) < 1e-8);
  CHECK(std::abs(s.m21) < 1e-8);
  CHECK(std::abs(s.m22 - 2.0) < 1e-8);
  s = split_mass(1, 3, 2, 2, 0.0);
  CHECK(s.m11 == 0.5);
  CHECK(s.m12 == 0.5);
  CHECK(s.m21 == 1.5);
  CHECK(s.m22 == 1.5);
}

TEST_CASE("split margins examples") {
  const Vector two{1, 1}, three{1, 1, 1};
  auto v = split_margins(two, 1.0, Vector{0.0});
  CHECK(v == Vector{0.5, 0.5});
  v = split_margins(two, 2.0, Vector{3.7});
  CHECK(v == Vector{1.0, 1.0});
  v = split_margins(three, 1.5, Vector{0.0, 0.0});
  CHECK(v == Vector{0.5, 0.5, 0.5});
  CHECK_THROWS_AS(split_margins(two, 2.5, Vector{0.0}), Error);
}

TEST_CASE("count params follows the recursion") {
  CHECK(count_params(4, 4) == 9);
  CHECK(count_params(1, 7) == 0);
  CHECK(count_params(6, 1) == 0);
  CHECK(count_params(7, 5) == 24);
  for (std::size_t n = 1; n <= 16; ++n)
    for (std::size_t m = 1; m <= 16; ++m) REQUIRE(count_params(n, m) == (n - 1) * (m - 1));
}

TEST_CASE("rtbp exactness and block balance") {
  Xoshiro256 rng(21);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + rng.below(11), m = 2 + rng.below(11);
    const Matrix base = oracle::random_positive(rng, n, m);
    const Margins margins(row_sums(base), col_sums(base));
    RtbpTrace trace;
    RtbpOptions opts;
    opts.trace = &trace;
    opts.check_balance = true;
    const auto h = rtbp_forward(margins, ChartParams(oracle::normals(rng, chart_dimension(n, m), 2.0)), {}, opts);
    REQUIRE(h.deviation().max() < 1e-12 * margins.total_mass());
    for (const auto& split : trace.nodes) REQUIRE(block_balance_violation(split) < 1e-12 * margins.total_mass());
    for (double v : h.entries().data()) REQUIRE(v >= 0.0);
  }
}

TEST_CASE("rtbp trace records every split") {
  RtbpTrace trace;
  RtbpOptions opts;
  opts.trace = &trace;
  rtbp_forward(Margins::ones(8), ChartParams::zeros(8, 8), {}, opts);
  // 8 → four 4×4 blocks → sixteen 2×2 leaves
  CHECK(trace.nodes.size() == 5);
  CHECK(trace.chips.empty());
  CHECK(trace.nodes[0].parent == -1);
  CHECK(trace.nodes[0].k == 4);
  CHECK(trace.nodes[0].l == 4);
  for (std::size_t q = 1; q < trace.nodes.size(); ++q) CHECK(trace.nodes[q].parent == 0);

  RtbpTrace odd;
  opts.trace = &odd;
  rtbp_forward(Margins::ones(5), ChartParams::zeros(5, 5), {}, opts);
  CHECK(odd.chips.size() == 2);
}

TEST_CASE("rtbp jacobian matches finite differences") {
  Xoshiro256 rng(8);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 2 + rng.below(5), m = 2 + rng.below(5);
    const Matrix base = oracle::random_positive(rng, n, m);
    const Margins margins(row_sums(base), col_sums(base));
    const Vector t = oracle::normals(rng, chart_dimension(n, m));
    const Matrix jac = rtbp_jacobian(margins, ChartParams(t));
    const Matrix fd = oracle::central_differences(
        [&](const Vector& p) {
          const auto x = rtbp_forward(margins, ChartParams(p));
          return Vector(x.entries().data().begin(), x.entries().data().end());
        },
        t);
    REQUIRE(oracle::relative_error(jac, fd) < 1e-5);
  }
}

TEST_CASE("rtbp jacobian has full rank at random points") {
  Xoshiro256 rng(4);
  for (std::size_t n = 2; n <= 9; ++n) {
    const Vector t = oracle::normals(rng, chart_dimension(n, n));
    const Matrix jac = rtbp_jacobian(Margins::ones(n), ChartParams(t));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(jac));
    svd.setThreshold(1e-10);
    CHECK(static_cast<std::size_t>(svd.rank()) == (n - 1) * (n - 1));
  }
}

TEST_CASE("rtbp reaches tbp matrices at n = 3") {
  Xoshiro256 rng(30);
  int converged = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto target = tbp_forward(Margins::ones(3), ChartParams(oracle::normals(rng, 4)));
    const auto fit = rtbp_fit(target);
    CHECK(fit.max_entry_error < 1e-6);
    converged += fit.converged;
  }
  CHECK(converged == 200);
}
