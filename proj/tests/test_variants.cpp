#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <complex>

#include "birkhoff/spectral.hpp"
#include "birkhoff/variants.hpp"
#include "oracles.hpp"

using namespace birkhoff;

namespace {

using Cvec = std::vector<std::complex<double>>;

Cvec eigen_values(const Matrix& a) {
  Eigen::MatrixXd e(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) e(i, j) = a(i, j);
  Eigen::EigenSolver<Eigen::MatrixXd> es(e, false);
  Cvec out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return out;
}

// greedy nearest matching of two multisets
double multiset_distance(Cvec a, Cvec b) {
  double worst = 0.0;
  for (const auto& x : a) {
    auto it = std::min_element(b.begin(), b.end(),
                               [&](const auto& p, const auto& q) { return std::abs(p - x) < std::abs(q - x); });
    worst = std::max(worst, std::abs(*it - x));
    b.erase(it);
  }
  return worst;
}

TransportMatrix ds(const Matrix& h) { return TransportMatrix::doubly_stochastic(h, 1e-12); }

Matrix cycle3() {
  Matrix p(3, 3, 0.0);
  p(0, 1) = p(1, 2) = p(2, 0) = 1.0;
  return p;
}

}  // namespace

TEST_CASE("squash examples") {
  const FeasibleInterval unit{0, 1, 1};
  CHECK(squash(0.0, unit, SquashSpec::sigmoid()) == 0.5);
  const FeasibleInterval narrow{0.3, 0.31, 0.01};
  const double x = squash(1.0, narrow, SquashSpec::scaled());
  CHECK(x == doctest::Approx(0.31).epsilon(1e-12));
  CHECK(x <= 0.31);
  const FeasibleInterval lin{0.2, 0.6, 0.4};
  CHECK(squash(1.7, lin, SquashSpec::linear()) == 0.6);
  CHECK(squash(-1.0, lin, SquashSpec::linear()) == 0.2);
  CHECK(squash(0.25, lin, SquashSpec::linear()) == doctest::Approx(0.3));
}

TEST_CASE("squash spec validation") {
  CHECK_THROWS_AS(SquashSpec::margined(0.5).validate(), Error);
  CHECK_THROWS_AS(SquashSpec::scaled(0.0).validate(), Error);
  CHECK_THROWS_AS(SquashSpec::scaled(4.0, 0.0).validate(), Error);
  CHECK_NOTHROW(SquashSpec::margined().validate());
}

TEST_CASE("unsquash inverts every kind") {
  Xoshiro256 rng(2);
  for (const auto& spec : {SquashSpec::sigmoid(), SquashSpec::scaled(), SquashSpec::margined(), SquashSpec::linear()}) {
    for (int rep = 0; rep < 100; ++rep) {
      const double lo = rng.uniform(0, 1), width = rng.uniform(0.01, 1);
      double t = spec.kind == SquashKind::LinearClipped ? rng.uniform(0.05, 0.95) : rng.uniform(-3, 3);
      // keep the scaled argument β t / (Δ + ε) out of saturation
      if (spec.kind == SquashKind::Scaled || spec.kind == SquashKind::MarginedScaled) t *= width / spec.beta;
      const FeasibleInterval iv{lo, lo + width, width};
      const double u = (squash(t, iv, spec) - lo) / width;
      REQUIRE(unsquash(u, width, spec) == doctest::Approx(t).epsilon(1e-8));
    }
  }
}

TEST_CASE("lazyfy examples and spectral law") {
  Matrix swap(2, 2, 0.0);
  swap(0, 1) = swap(1, 0) = 1.0;
  CHECK(max_abs_diff(lazyfy(ds(swap), 0.5).entries(), Matrix(2, 2, 0.5)) == 0.0);

  Xoshiro256 rng(3);
  const auto h = ds(oracle::random_doubly_stochastic(rng, 4));
  CHECK(max_abs_diff(lazyfy(h, 1.0).entries(), h.entries()) == 0.0);
  CHECK_THROWS_AS(lazyfy(h, 0.0), Error);

  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rng.below(7);
    const auto a = ds(oracle::random_doubly_stochastic(rng, n));
    const double alpha = rng.uniform(0.05, 1.0);
    const auto lazy = lazyfy(a, alpha);
    REQUIRE(lazy.deviation().max() < 1e-12);
    Cvec expect = eigen_values(a.entries());
    for (auto& v : expect) v = (1.0 - alpha) + alpha * v;
    REQUIRE(multiset_distance(eigenvalues(lazy.entries()), expect) < 1e-8);
  }
}

TEST_CASE("minorize examples and gap law") {
  const auto m = minorize(ds(Matrix::identity(2)), 0.5);
  CHECK(max_abs_diff(m.entries(), Matrix(2, 2, std::vector<double>{.75, .25, .25, .75})) == 0.0);
  Xoshiro256 rng(6);
  const auto h = ds(oracle::random_doubly_stochastic(rng, 5));
  CHECK(max_abs_diff(minorize(h, 0.0).entries(), h.entries()) == 0.0);

  // cube roots of unity scaled by 0.9
  const auto cyc = analyze(minorize(ds(cycle3()), 0.1).entries());
  CHECK(cyc.eigenvalue_moduli[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cyc.eigenvalue_moduli[1] == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(cyc.eigenvalue_moduli[2] == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(cyc.absolute_gap == doctest::Approx(0.1).epsilon(1e-12));

  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rng.below(7);
    const auto a = ds(oracle::random_doubly_stochastic(rng, n));
    const double eps = rng.uniform(0.0, 0.9);
    const auto me = minorize(a, eps);
    REQUIRE(me.deviation().max() < 1e-12);
    for (double v : me.entries().data()) REQUIRE(v >= eps / static_cast<double>(n) - 1e-15);
    double top = 0.0;
    for (const auto& v : nontrivial_eigenvalues(eigen_values(a.entries()))) top = std::max(top, std::abs(v));
    REQUIRE(std::abs(analyze(me.entries()).absolute_gap - (1.0 - (1.0 - eps) * top)) < 1e-8);
  }
}

TEST_CASE("shaping from logits stays on the simplex") {
  const auto s = SpectralShaping::from_logits(0.0, 0.0, 0.0, -8.0);
  CHECK(s.identity_weight == doctest::Approx(1.0 / 3.0));
  CHECK(s.uniform_weight == doctest::Approx(1.0 / 3.0));
  CHECK(s.post_delta == doctest::Approx(default_post_delta()));
  CHECK(default_post_delta() == doctest::Approx(3.3535e-4).epsilon(1e-4));
  Xoshiro256 rng(9);
  const auto h = ds(oracle::random_doubly_stochastic(rng, 4));
  CHECK(apply_shaping(h, s).deviation().max() < 1e-12);
}

TEST_CASE("averaged charts") {
  const auto m3 = Margins::ones(3);
  const std::vector<std::size_t> id{0, 1, 2}, rev{2, 1, 0};
  const auto zero = ChartParams::zeros(3, 3);

  AveragingSpec single{{id}, {1.0}};
  CHECK(max_abs_diff(average_charts(m3, {zero}, single).entries(), tbp_forward(m3, zero).entries()) == 0.0);

  const auto pair = AveragingSpec::identity_and_reverse(3);
  const auto avg = average_charts(m3, {zero, zero}, pair);
  const Matrix fwd = oracle::nw_corner({1, 1, 1}, {1, 1, 1}, zero.values);
  Matrix expect(3, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) expect(i, j) = 0.5 * fwd(i, j) + 0.5 * fwd(2 - i, 2 - j);
  CHECK(max_abs_diff(avg.entries(), expect) < 1e-15);

  Xoshiro256 rng(12);
  const ChartParams a(oracle::normals(rng, 4)), b(oracle::normals(rng, 4));
  AveragingSpec hot{{id, rev}, {0.0, 1.0}};
  const Matrix one = conjugate(tbp_forward(m3, b).entries(), rev);
  CHECK(max_abs_diff(average_charts(m3, {a, b}, hot).entries(), one) < 1e-15);

  const Margins general({1.0, 2.0, 3.0}, {2.5, 0.5, 3.0});
  for (auto kind : {ChartKind::Tbp, ChartKind::Rtbp}) {
    const auto g = average_charts(general, {a, b}, pair, kind);
    CHECK(g.deviation().max() < 1e-12);
  }
  CHECK_THROWS_AS(average_charts(m3, {a}, pair), Error);
  CHECK_THROWS_AS((AveragingSpec{{id, {0, 0, 1}}, {0.5, 0.5}}.validate(3)), Error);
  CHECK_THROWS_AS((AveragingSpec{{id, rev}, {0.5, 0.6}}.validate(3)), Error);
}

TEST_CASE("margined charts keep away from the bounds") {
  Xoshiro256 rng(13);
  const auto spec = SquashSpec::margined(1e-2);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rng.below(5);
    const Vector t = oracle::normals(rng, chart_dimension(n, n), 30.0);
    const Matrix x = tbp_forward(Margins::ones(n), ChartParams(t), spec).entries();
    Vector r(n, 1.0), c(n, 1.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = 0; j + 1 < n; ++j) {
        double right = 0.0, below = 0.0;
        for (std::size_t k = j + 1; k < n; ++k) right += c[k];
        for (std::size_t k = i + 1; k < n; ++k) below += r[k];
        const double lo = std::max({0.0, r[i] - right, c[j] - below}), hi = std::min(r[i], c[j]);
        const double gap = spec.rho * (hi - lo);
        REQUIRE(x(i, j) >= lo + gap * (1 - 1e-9) - 1e-15);
        REQUIRE(x(i, j) <= hi - gap * (1 - 1e-9) + 1e-15);
        r[i] -= x(i, j);
        c[j] -= x(i, j);
      }
      c[n - 1] -= r[i];
      r[i] = 0.0;
    }
  }
}

TEST_CASE("linear chart is affine along each coordinate") {
  Xoshiro256 rng(14);
  const auto spec = SquashSpec::linear();
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + rng.below(5);
    const std::size_t d = chart_dimension(n, n);
    const Vector t = oracle::uniforms(rng, d, 0.2, 0.8);
    const double h = 1e-3;
    for (std::size_t k = 0; k < d; ++k) {
      auto at = [&](double s) {
        Vector p = t;
        p[k] += s;
        return tbp_forward(Margins::ones(n), ChartParams(p), spec).entries();
      };
      const Matrix a = at(-h), b = at(0.0), c = at(h);
      double second = 0.0;
      for (std::size_t q = 0; q < a.size(); ++q)
        second = std::max(second, std::abs(a.data()[q] - 2 * b.data()[q] + c.data()[q]));
      REQUIRE(second < 1e-9);
    }
  }
}

TEST_CASE("linear chart has zero derivative outside the unit range") {
  const Matrix j = tbp_jacobian(Margins::ones(2), ChartParams({1.5}), SquashSpec::linear());
  for (double v : j.data()) CHECK(v == 0.0);
  const Matrix k = tbp_jacobian(Margins::ones(2), ChartParams({0.5}), SquashSpec::linear());
  CHECK(k(0, 0) == 1.0);
}
