// birkhoff-lab: generate, check and compare doubly stochastic mixers.
//
// exit status: 0 ok, 1 a tolerance check failed, 2 bad usage or input

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <thread>

#include "birkhoff/io.hpp"
#include "birkhoff/rng.hpp"
#include "birkhoff/rtbp.hpp"

using namespace birkhoff;
using io::Json;

namespace {

constexpr int kOk = 0;
constexpr int kTolerance = 1;
constexpr int kUsage = 2;

struct MixerFlags {
  std::string kind = "tbp";
  std::size_t n = 4;
  std::string factors;
  int iters = kReferenceSinkhornIterations;
  std::string squash = "sigmoid";
  double beta = 4.0, epsilon = 1e-6, rho = 1e-4;
  bool average = false;
  double lazy = 0.0, minorize = 0.0, post_delta = 0.0;
  std::string spec_path;
};

void add_mixer_flags(CLI::App* cmd, MixerFlags& f) {
  cmd->add_option("--kind", f.kind, "tbp, rtbp, bvn, kron or sinkhorn")
      ->check(CLI::IsMember({"tbp", "rtbp", "bvn", "kron", "sinkhorn"}));
  cmd->add_option("--n", f.n, "matrix size")->check(CLI::Range(1, 64));
  cmd->add_option("--factors", f.factors, "kron factor sizes, e.g. 2,2");
  cmd->add_option("--iters", f.iters, "sinkhorn iterations")->check(CLI::PositiveNumber);
  cmd->add_option("--squash", f.squash, "sigmoid, scaled, margined_scaled or linear_clipped");
  cmd->add_option("--beta", f.beta);
  cmd->add_option("--epsilon", f.epsilon);
  cmd->add_option("--rho", f.rho);
  cmd->add_flag("--average", f.average, "average the identity and reversed charts");
  cmd->add_option("--lazy", f.lazy, "identity weight λ");
  cmd->add_option("--minorize", f.minorize, "uniform weight μ");
  cmd->add_option("--post-delta", f.post_delta, "post-minorization δ");
  cmd->add_option("--spec", f.spec_path, "mixer spec JSON; overrides the flags above");
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      fail(ErrorKind::InvalidArgument, "bad factor list \"" + text + "\"");
    }
  }
  return out;
}

MixerSpec mixer_spec(const MixerFlags& f) {
  if (!f.spec_path.empty()) {
    auto s = io::mixer_from_json(io::read_json(f.spec_path));
    s.validate();
    return s;
  }
  MixerSpec s;
  s.kind = mixer_kind_from_string(f.kind);
  s.n = f.n;
  s.squash = {squash_kind_from_string(f.squash), f.beta, f.epsilon, f.rho};
  s.shaping = {f.lazy, f.minorize, f.post_delta};
  s.sinkhorn_iterations = f.iters;
  if (s.kind == MixerKind::Kron) {
    if (f.factors.empty()) fail(ErrorKind::InvalidArgument, "--kind kron needs --factors");
    s.kron_factors = parse_sizes(f.factors);
    s.n = 1;
    for (auto k : s.kron_factors) s.n *= k;
  }
  if (f.average) s.averaging = AveragingSpec::identity_and_reverse(s.n);
  s.validate();
  return s;
}

Vector standard_normals(std::uint64_t seed, std::size_t count) {
  Xoshiro256 rng(seed);
  Vector v(count);
  for (auto& x : v) x = rng.normal();
  return v;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
  } else {
    io::write_text(path, text);
  }
}

// a gen output wraps the matrix; plain matrix files are accepted too
TransportMatrix load_matrix(const std::string& path) {
  const Json j = io::read_json(path);
  const Json& m = j.is_object() && j.contains("matrix") ? j.at("matrix") : j;
  if (m.is_array()) return TransportMatrix::adopt(io::matrix_from_json(m), Margins::ones(m.size()));
  return io::transport_from_json(m, INFINITY);
}

int threads_allowed() {
  int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("BIRKHOFF_LAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) hw = std::min(hw, cap);
  }
  return hw;
}

struct GenFlags {
  MixerFlags mixer;
  std::string params;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_gen(const GenFlags& g) {
  const MixerSpec spec = mixer_spec(g.mixer);
  Vector logits;
  std::string source;
  if (g.seed) {
    if (!g.params.empty()) fail(ErrorKind::InvalidArgument, "use either --params or --seed");
    logits = standard_normals(*g.seed, spec.param_count());
    source = "seed";
  } else if (g.params == "zeros") {
    logits = Vector(spec.param_count(), 0.0);
    source = "zeros";
  } else if (!g.params.empty()) {
    logits = io::params_from_json(io::read_json(g.params)).values;
    source = "file";
  } else {
    logits = default_logits(spec);
    source = "default";
  }
  const auto out = build_mixer(spec, logits);
  Json j;
  j["spec"] = io::to_json(spec);
  j["params_source"] = source;
  j["seed"] = g.seed ? Json(*g.seed) : Json(nullptr);
  j["generator"] = "xoshiro256** seeded by splitmix64, Box-Muller normals";
  j["params"] = logits;
  j["matrix"] = io::to_json(TransportMatrix::adopt(out.matrix, Margins::ones(spec.n)));
  if (out.residual) j["residual"] = io::to_json(*out.residual);
  j["ds_deviation"] = ds_deviation(out.matrix).max();
  emit(io::dump(j), g.out);
  return kOk;
}

int cmd_verify(const std::string& path, bool roundtrip, double tol) {
  const auto x = load_matrix(path);
  const auto dev = x.deviation();
  double low = INFINITY;
  for (double v : x.entries().data()) low = std::min(low, v);
  const double scale = std::max(1.0, x.margins().total_mass());
  bool ok = dev.max() <= tol * scale && low >= 0.0;
  Json j{{"path", path},
         {"tolerance", tol},
         {"row_deviation", dev.row},
         {"col_deviation", dev.col},
         {"min_entry", low}};
  if (roundtrip) {
    try {
      const auto back = tbp_forward(x.margins(), tbp_inverse(x));
      const double err = max_abs_diff(back.entries(), x.entries());
      j["roundtrip_error"] = err;
      ok = ok && err <= 1e-10;
    } catch (const Error& e) {
      j["roundtrip_error"] = nullptr;
      j["roundtrip_failure"] = e.what();
      ok = false;
    }
  }
  j["pass"] = ok;
  emit(io::dump(j), "");
  return ok ? kOk : kTolerance;
}

int cmd_spectral(const std::string& path, const std::string& out) {
  const auto x = load_matrix(path);
  const auto rep = analyze(x.entries());
  emit(io::dump(io::to_json(rep)), out);
  return kOk;
}

int cmd_compose(const MixerFlags& f, std::size_t depth, std::uint64_t seed, const std::string& out) {
  const MixerSpec spec = mixer_spec(f);
  Xoshiro256 rng(seed);
  std::vector<Matrix> chain;
  chain.reserve(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    Vector z(spec.param_count());
    for (auto& v : z) v = rng.normal();
    chain.push_back(build_mixer(spec, z).matrix);
  }
  const auto result = compose_chain(chain);
  std::string text = "# seed " + std::to_string(seed) + "\n" + io::chain_csv(result.trace);
  emit(text, out);
  if (!spec.exact() || result.trace.empty()) return kOk;
  const auto& last = result.trace.back();
  const double bound = std::max(1e-12, static_cast<double>(depth) * 1e-14);
  return std::max(last.row_deviation, last.col_deviation) <= bound ? kOk : kTolerance;
}

int cmd_compare_sk(std::size_t n, int iters, std::optional<double> scale, std::uint64_t seed) {
  Vector scales = scale ? Vector{*scale} : Vector{4.0, 8.0, 16.0};
  const auto gap = find_sinkhorn_gap(n, iters, scales, 1e-4);
  const ChartParams t(standard_normals(seed, chart_dimension(n, n)));
  const auto tbp = tbp_forward(Margins::ones(n), t);
  const double tbp_dev = tbp.deviation().max();
  Json j{{"n", n}, {"iterations", iters}, {"seed", seed}, {"tbp_residual", tbp_dev}, {"threshold", 1e-4}};
  if (gap) {
    j["scale"] = gap->scale;
    j["pattern"] = "triangular";
    j["logits"] = io::to_json(gap->logits);
    j["sinkhorn_residual"] = io::to_json(gap->residual);
  } else {
    const auto last = sinkhorn(triangular_logits(n, scales.back()), iters);
    j["scale"] = scales.back();
    j["pattern"] = "triangular";
    j["sinkhorn_residual"] = io::to_json(last.residual);
  }
  const bool ok = gap.has_value() && tbp_dev <= 1e-12;
  j["contrast_found"] = ok;
  emit(io::dump(j), "");
  return ok ? kOk : kTolerance;
}

int cmd_bench(const MixerFlags& f, std::size_t batch, int reps, int warmup) {
  const MixerSpec spec = mixer_spec(f);
  std::vector<Vector> inputs(batch);
  Xoshiro256 rng(0);
  for (auto& z : inputs) {
    z.resize(spec.param_count());
    for (auto& v : z) v = rng.normal();
  }
  const int threads = std::min<int>(threads_allowed(), static_cast<int>(std::max<std::size_t>(batch, 1)));
  std::atomic<double> sink{0.0};
  auto run_batch = [&] {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      double local = 0.0;
      for (std::size_t k; (k = next.fetch_add(1)) < batch;) local += build_mixer(spec, inputs[k]).matrix(0, 0);
      double cur = sink.load();
      while (!sink.compare_exchange_weak(cur, cur + local)) {
      }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
  };
  for (int w = 0; w < warmup; ++w) run_batch();
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) run_batch();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double rate = static_cast<double>(batch) * reps / std::max(secs, 1e-12);
  Json j{{"kind", to_string(spec.kind)},
         {"n", spec.n},
         {"batch", batch},
         {"reps", reps},
         {"warmup", warmup},
         {"threads", threads},
         {"seconds", secs},
         {"matrices_per_sec", rate},
         {"checksum", sink.load()}};
  emit(io::dump(j), "");
  return kOk;
}

int cmd_sweep(const MixerFlags& f, std::size_t width, std::size_t depth, std::uint64_t seed, bool dynamic,
              const std::string& out) {
  const MixerSpec spec = mixer_spec(f);
  Xoshiro256 rng(seed);
  std::vector<LayerWeights> layers;
  for (std::size_t l = 0; l < depth; ++l) {
    auto w = LayerWeights::initial(spec.n, width, spec, dynamic);
    for (auto& v : w.w_res.data()) v = 0.1 * rng.normal();
    layers.push_back(std::move(w));
  }
  Matrix x0(spec.n, width);
  for (auto& v : x0.data()) v = rng.normal();
  const auto trace = depth_sweep(layers, x0);
  emit("# seed " + std::to_string(seed) + "\n" + io::sweep_csv(trace), out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Charts of the Birkhoff and transportation polytopes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "birkhoff-lab 0.1.0");

  GenFlags gen;
  auto* g = app.add_subcommand("gen", "write a mixer matrix as JSON");
  add_mixer_flags(g, gen.mixer);
  g->add_option("--params", gen.params, "zeros or a JSON file holding a flat array");
  g->add_option("--seed", gen.seed, "draw standard normal parameters");
  g->add_option("--out", gen.out, "output path (default stdout)");

  std::string verify_path;
  bool roundtrip = false;
  double tol = kMarginTolerance;
  auto* v = app.add_subcommand("verify", "check margins, optionally the chart round trip");
  v->add_option("matrix", verify_path)->required();
  v->add_flag("--roundtrip", roundtrip);
  v->add_option("--tol", tol, "margin tolerance")->check(CLI::NonNegativeNumber);

  std::string spectral_path, spectral_out;
  auto* s = app.add_subcommand("spectral", "eigenvalues and gaps of a matrix");
  s->add_option("matrix", spectral_path)->required();
  s->add_option("--out", spectral_out);

  MixerFlags compose;
  std::size_t depth = 100;
  std::uint64_t seed = 0;
  std::string compose_out;
  auto* c = app.add_subcommand("compose", "deviation trace of a product of random mixers (CSV)");
  add_mixer_flags(c, compose);
  c->add_option("--depth", depth)->check(CLI::Range(1, 100000));
  c->add_option("--seed", seed);
  c->add_option("--out", compose_out);

  std::size_t sk_n = 4;
  int sk_iters = kReferenceSinkhornIterations;
  std::optional<double> sk_scale;
  std::uint64_t sk_seed = 0;
  auto* k = app.add_subcommand("compare-sk", "find logits where Sinkhorn stays visibly off the polytope");
  k->add_option("--n", sk_n)->check(CLI::Range(2, 64));
  k->add_option("--iters", sk_iters)->check(CLI::PositiveNumber);
  k->add_option("--scale", sk_scale, "try only this logit scale (default 4, 8, 16)");
  k->add_option("--seed", sk_seed);

  std::size_t cp_n = 4, cp_m = 4;
  auto* p = app.add_subcommand("count-params", "parameters consumed by the recursive chart");
  p->add_option("--n", cp_n)->check(CLI::Range(1, 4096));
  p->add_option("--m", cp_m)->check(CLI::Range(1, 4096));

  MixerFlags bench;
  std::size_t batch = 256;
  int reps = 5, warmup = 1;
  auto* b = app.add_subcommand("bench", "mixer construction throughput");
  add_mixer_flags(b, bench);
  b->add_option("--batch", batch)->check(CLI::Range(1, 1 << 24));
  b->add_option("--reps", reps)->check(CLI::PositiveNumber);
  b->add_option("--warmup", warmup)->check(CLI::NonNegativeNumber);

  MixerFlags sweep;
  std::size_t width = 4, sweep_depth = 32;
  std::uint64_t sweep_seed = 0;
  bool dynamic = false;
  std::string sweep_out;
  auto* w = app.add_subcommand("sweep", "depth sweep of hyper-connection layers (CSV)");
  add_mixer_flags(w, sweep);
  w->add_option("--width", width)->check(CLI::Range(1, 16));
  w->add_option("--depth", sweep_depth)->check(CLI::Range(1, 64));
  w->add_option("--seed", sweep_seed);
  w->add_flag("--dynamic", dynamic, "input-dependent residual logits");
  w->add_option("--out", sweep_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*v) return cmd_verify(verify_path, roundtrip, tol);
    if (*s) return cmd_spectral(spectral_path, spectral_out);
    if (*c) return cmd_compose(compose, depth, seed, compose_out);
    if (*k) return cmd_compare_sk(sk_n, sk_iters, sk_scale, sk_seed);
    if (*p) {
      std::printf("%zu\n", count_params(cp_n, cp_m));
      return kOk;
    }
    if (*b) return cmd_bench(bench, batch, reps, warmup);
    if (*w) return cmd_sweep(sweep, width, sweep_depth, sweep_seed, dynamic, sweep_out);
  } catch (const Error& e) {
    std::fprintf(stderr, "birkhoff-lab: %s\n", e.what());
    switch (e.kind()) {
      case ErrorKind::InvalidArgument:
      case ErrorKind::DimensionMismatch:
      case ErrorKind::Io:
        return kUsage;
      default:
        return kTolerance;
    }
  }
  return kUsage;
}
