// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>

#include "birkhoff/baselines.hpp"
#include "birkhoff/hc_layer.hpp"
#include "birkhoff/rtbp.hpp"
#include "birkhoff/spectral.hpp"
#include "birkhoff/variants.hpp"
#include "oracles.hpp"

using namespace birkhoff;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

char buf[512];

template <class... A>
std::string fmt(const char* f, A... a) {
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vector flat(const Matrix& m) { return Vector(m.data().begin(), m.data().end()); }

// interior doubly stochastic matrix independent of the chart
Matrix interior_ds(Xoshiro256& rng, std::size_t n) {
  const Matrix a = oracle::random_doubly_stochastic(rng, n, 2 * n);
  Matrix h(n, n);
  const double eps = rng.uniform(0.02, 0.3);
  for (std::size_t q = 0; q < h.size(); ++q) h.data()[q] = (1 - eps) * a.data()[q] + eps / static_cast<double>(n);
  return h;
}

Outcome exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  Xoshiro256 rng(101);
  double worst = 0.0;
  for (std::size_t n : {2, 3, 4, 8, 16}) {
    const auto margins = Margins::ones(n);
    for (int rep = 0; rep < 1000; ++rep) {
      const ChartParams t(oracle::normals(rng, chart_dimension(n, n), 3.0));
      worst = std::max(worst, tbp_forward(margins, t).deviation().max());
      worst = std::max(worst, rtbp_forward(margins, t).deviation().max());
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 30.0, fmt("max margin deviation %.3g, %.2f s", worst, secs)};
}

Outcome bijectivity() {
  Xoshiro256 rng(102);
  double params_err = 0.0, matrix_err = 0.0;
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t n = 2 + rep % 7;
    const Vector t = oracle::uniforms(rng, chart_dimension(n, n), -10.0, 10.0);
    const auto h = tbp_forward(Margins::ones(n), ChartParams(t));
    const auto back = tbp_inverse(h);
    for (std::size_t k = 0; k < t.size(); ++k) params_err = std::max(params_err, std::abs(back.values[k] - t[k]));

    const auto x = TransportMatrix::doubly_stochastic(interior_ds(rng, n));
    const auto again = tbp_forward(x.margins(), tbp_inverse(x));
    matrix_err = std::max(matrix_err, max_abs_diff(again.entries(), x.entries()));
  }
  return {params_err <= 1e-8 && matrix_err <= 1e-10,
          fmt("params->matrix->params %.3g, matrix->params->matrix %.3g", params_err, matrix_err)};
}

Outcome parameter_count() {
  int mismatches = 0;
  for (std::size_t n = 2; n <= 16; ++n)
    for (std::size_t m = 2; m <= 16; ++m) mismatches += count_params(n, m) != (n - 1) * (m - 1);
  return {mismatches == 0, fmt("%d of 225 sizes disagree with (n-1)(m-1)", mismatches)};
}

Outcome block_balance() {
  Xoshiro256 rng(104);
  double worst = 0.0;
  std::size_t splits = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 2 + rng.below(15), m = 2 + rng.below(15);
    const bool ds = rep % 2 == 0;
    const std::size_t cols = ds ? n : m;
    Margins margins = Margins::ones(n);
    if (!ds) {
      const Matrix base = oracle::random_positive(rng, n, cols);
      margins = Margins(row_sums(base), col_sums(base));
    }
    RtbpTrace trace;
    RtbpOptions opts;
    opts.trace = &trace;
    rtbp_forward(margins, ChartParams(oracle::normals(rng, chart_dimension(n, cols), 2.0)), {}, opts);
    for (const auto& s : trace.nodes) worst = std::max(worst, block_balance_violation(s));
    splits += trace.nodes.size();
  }
  return {worst <= 1e-12, fmt("%zu splits, max violation %.3g", splits, worst)};
}

Outcome spectral_laws() {
  Xoshiro256 rng(105);
  double lazy_err = 0.0, minor_err = 0.0, uniform_err = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rng.below(7);
    const auto h = TransportMatrix::doubly_stochastic(oracle::random_doubly_stochastic(rng, n));
    const auto base = eigenvalues(h.entries());

    const double alpha = rng.uniform(0.05, 1.0);
    auto mapped = base;
    for (auto& v : mapped) v = (1.0 - alpha) + alpha * v;
    auto got = eigenvalues(lazyfy(h, alpha).entries());
    sort_by_modulus(mapped);
    sort_by_modulus(got);
    std::vector<bool> used(n, false);
    for (const auto& v : mapped) {
      std::size_t best = 0;
      double d = INFINITY;
      for (std::size_t k = 0; k < n; ++k)
        if (!used[k] && std::abs(got[k] - v) < d) d = std::abs(got[k] - v), best = k;
      used[best] = true;
      lazy_err = std::max(lazy_err, d);
    }

    const double eps = rng.uniform(0.0, 0.9);
    double top = 0.0;
    for (const auto& v : nontrivial_eigenvalues(base)) top = std::max(top, std::abs(v));
    double top_eps = 0.0;
    for (const auto& v : nontrivial_eigenvalues(eigenvalues(minorize(h, eps).entries())))
      top_eps = std::max(top_eps, std::abs(v));
    minor_err = std::max(minor_err, std::abs(top_eps - (1.0 - eps) * top));
  }
  for (std::size_t n = 2; n <= 16; ++n) {
    const auto moduli = analyze(Matrix::uniform(n)).eigenvalue_moduli;
    uniform_err = std::max(uniform_err, std::abs(moduli[0] - 1.0));
    for (std::size_t i = 1; i < n; ++i) uniform_err = std::max(uniform_err, moduli[i]);
  }
  return {lazy_err <= 1e-8 && minor_err <= 1e-8 && uniform_err <= 1e-10,
          fmt("lazy %.3g, minorize %.3g, J_n %.3g", lazy_err, minor_err, uniform_err)};
}

Outcome sinkhorn_contrast() {
  const Vector scales{4.0, 8.0, 16.0};
  const auto gap = find_sinkhorn_gap(4, 20, scales, 1e-4);
  if (!gap) return {false, "no scale in {4, 8, 16} crossed 1e-4"};
  const auto tbp = tbp_forward(Margins::ones(4), ChartParams::zeros(4, 4));
  Xoshiro256 rng(106);
  double tbp_dev = tbp.deviation().max();
  for (int rep = 0; rep < 100; ++rep)
    tbp_dev = std::max(tbp_dev,
                       tbp_forward(Margins::ones(4), ChartParams(oracle::normals(rng, 9, 4.0))).deviation().max());
  return {gap->residual.max() > 1e-4 && tbp_dev <= 1e-12,
          fmt("scale %g: sinkhorn K=20 residual %.3g, tbp residual %.3g", gap->scale, gap->residual.max(), tbp_dev)};
}

Outcome expressivity() {
  Matrix target(4, 4, 0.1 * 0.25);
  for (std::size_t i = 0; i < 4; ++i) target(i, (i + 1) % 4) += 0.9;
  const auto fit = kronecker_best_fit(target, 2);
  bool inverse_ok = true;
  double round_trip = 0.0;
  try {
    const auto t = TransportMatrix::doubly_stochastic(target);
    round_trip = max_abs_diff(tbp_forward(t.margins(), tbp_inverse(t)).entries(), target);
  } catch (const Error&) {
    inverse_ok = false;
  }
  return {fit.distance > 0.1 && fit.distance >= 0.05 && inverse_ok && round_trip <= 1e-10,
          fmt("0.9 P_cycle + 0.1 J: kronecker distance %.6f, tbp round trip %.3g", fit.distance, round_trip)};
}

double jacobian_error(ChartKind kind, const Margins& margins, const Vector& t, const SquashSpec& spec) {
  const Matrix jac = chart_jacobian(kind, margins, ChartParams(t), spec);
  const Matrix fd = oracle::central_differences(
      [&](const Vector& p) { return flat(chart_forward(kind, margins, ChartParams(p), spec).entries()); }, t);
  return oracle::relative_error(jac, fd);
}

Outcome gradients() {
  Xoshiro256 rng(108);
  double worst = 0.0;
  int cases = 0;
  const SquashSpec specs[] = {SquashSpec::sigmoid(), SquashSpec::scaled(), SquashSpec::margined(),
                              SquashSpec::linear()};
  for (auto kind : {ChartKind::Tbp, ChartKind::Rtbp}) {
    for (const auto& spec : specs) {
      for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 2 + rng.below(5);
        const Vector t = spec.kind == SquashKind::LinearClipped
                             ? oracle::uniforms(rng, chart_dimension(n, n), 0.05, 0.95)
                             : oracle::normals(rng, chart_dimension(n, n));
        worst = std::max(worst, jacobian_error(kind, Margins::ones(n), t, spec));
        ++cases;
      }
    }
  }
  return {worst < 1e-5, fmt("%d cases, max relative error %.3g", cases, worst)};
}

Outcome depth() {
  Xoshiro256 rng(109);
  std::vector<Matrix> chain;
  for (int k = 0; k < 100; ++k)
    chain.push_back(tbp_forward(Margins::ones(4), ChartParams(oracle::normals(rng, 9, 2.0))).entries());
  const double product_dev = ds_deviation(compose_chain(chain).product).max();

  MixerSpec spec;
  spec.n = 4;
  Matrix x(4, 8);
  for (auto& v : x.data()) v = rng.normal();
  const Vector start = col_sums(x);
  double mean_dev = 0.0;
  for (int l = 0; l < 32; ++l) {
    auto w = LayerWeights::initial(4, 8, spec, true);
    for (auto& v : w.w_res.data()) v = 0.5 * rng.normal();
    x = layer_forward(x, w);
    const Vector now = col_sums(x);
    for (std::size_t j = 0; j < now.size(); ++j) mean_dev = std::max(mean_dev, std::abs(now[j] - start[j]));
  }
  return {product_dev <= 1e-12 && mean_dev <= 1e-12,
          fmt("100-fold product deviation %.3g, 32-layer stream-sum drift %.3g", product_dev, mean_dev)};
}

Outcome baseline_exactness() {
  Xoshiro256 rng(110);
  double bvn = 0.0, krn = 0.0, soft = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + rep % 4;
    const Vector z = oracle::normals(rng, bvn_logit_count(n), 4.0);
    bvn = std::max(bvn, ds_deviation(bvn_combination(z)).max());
    const Vector w = softmax(z);
    soft = std::max(soft, std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0));

    KroneckerFactors f;
    static const std::vector<std::vector<std::size_t>> shapes{{2, 2}, {2, 3}, {3, 2}, {2, 2, 2}, {2, 2, 2, 2}};
    f.factor_sizes = shapes[rep % shapes.size()];
    for (auto s : f.factor_sizes) f.logits.push_back(oracle::normals(rng, bvn_logit_count(s), 4.0));
    krn = std::max(krn, ds_deviation(kronecker_mix(f)).max());
  }
  return {bvn <= 1e-12 && krn <= 1e-12 && soft <= 1e-12,
          fmt("bvn %.3g, kronecker %.3g, softmax sum %.3g", bvn, krn, soft)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"exactness", exactness},
      {"tbp round trip", bijectivity},
      {"recursive parameter count", parameter_count},
      {"block balance", block_balance},
      {"spectral laws", spectral_laws},
      {"sinkhorn contrast", sinkhorn_contrast},
      {"kronecker separation", expressivity},
      {"jacobians", gradients},
      {"depth composition", depth},
      {"baseline exactness", baseline_exactness},
  };
  int failed = 0, index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
