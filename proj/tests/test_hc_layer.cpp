#include <doctest.h>

#include "birkhoff/hc_layer.hpp"
#include "birkhoff/transport.hpp"
#include "oracles.hpp"

using namespace birkhoff;

namespace {

MixerSpec mixer(MixerKind kind, std::size_t n = 4) {
  MixerSpec s;
  s.kind = kind;
  s.n = n;
  return s;
}

Matrix random_stream(Xoshiro256& rng, std::size_t n, std::size_t c) {
  Matrix x(n, c);
  for (auto& v : x.data()) v = rng.normal();
  return x;
}

Sublayer random_sublayer(Xoshiro256& rng, std::size_t c) {
  Matrix w(c, c);
  for (auto& v : w.data()) v = 0.5 * rng.normal();
  return Sublayer::tanh_affine(std::move(w), oracle::normals(rng, c, 0.1));
}

void randomize(Xoshiro256& rng, LayerWeights& w, double scale) {
  for (auto* m : {&w.w_pre, &w.w_post, &w.w_res})
    for (auto& v : m->data()) v = scale * rng.normal();
  for (auto& v : w.b_res) v += scale * rng.normal();
  w.alpha_pre = w.alpha_post = 0.5;
}

}  // namespace

TEST_CASE("layer maps at initialization") {
  const auto w = LayerWeights::initial(4, 3, mixer(MixerKind::Tbp));
  Xoshiro256 rng(1);
  const Vector x = oracle::normals(rng, 12);
  const auto maps = layer_maps(x, w);
  const double lo = 1.0 / (1.0 + std::exp(1.0)), hi = 1.0 / (1.0 + std::exp(-1.0));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(maps.h_pre[i] == doctest::Approx(0.26894142).epsilon(1e-8));
    CHECK(maps.h_pre[i] == doctest::Approx(lo).epsilon(1e-15));
    CHECK(maps.h_post[i] == doctest::Approx(2 * lo).epsilon(1e-15));
  }
  CHECK(maps.h_pre[3] == doctest::Approx(0.73105858).epsilon(1e-8));
  CHECK(maps.h_pre[3] == doctest::Approx(hi).epsilon(1e-15));
  CHECK(max_abs_diff(maps.h_res, tbp_forward(Margins::ones(4), ChartParams::zeros(4, 4)).entries()) == 0.0);
  CHECK_FALSE(maps.residual.has_value());

  auto sk = LayerWeights::initial(4, 3, mixer(MixerKind::Sinkhorn));
  const auto skm = layer_maps(x, sk);
  REQUIRE(skm.residual.has_value());
  CHECK(max_abs_diff(skm.h_res, Matrix::identity(4)) < 2e-3);
  // balanced after the first row pass
  CHECK(skm.residual->max() == ds_deviation(skm.h_res).max());
  CHECK(skm.residual->iterations == 20);
}

TEST_CASE("hc gate form") {
  auto w = LayerWeights::initial(2, 1, mixer(MixerKind::Tbp, 2));
  w.gate = GateForm::Hc;
  w.w_pre(0, 0) = 1.0;
  w.alpha_pre = 0.5;
  const auto maps = layer_maps(Vector{2.0, 0.0}, w, {NormKind::Identity});
  CHECK(maps.h_pre[0] == doctest::Approx(0.5 * std::tanh(2.0) - 1.0));
  CHECK(maps.h_pre[1] == doctest::Approx(1.0));
  CHECK(maps.h_post[0] == doctest::Approx(-1.0));
}

TEST_CASE("layer forward examples") {
  auto w = LayerWeights::initial(2, 1, mixer(MixerKind::Tbp, 2));
  Matrix x(2, 1, std::vector<double>{1.0, 3.0});
  CHECK(max_abs_diff(layer_forward(x, w), Matrix(2, 1, 2.0)) < 1e-15);

  auto id = LayerWeights::initial(3, 2, mixer(MixerKind::Bvn, 3));
  id.b_res = identity_biased_bvn_logits(3, -60.0);
  Xoshiro256 rng(2);
  const Matrix y = random_stream(rng, 3, 2);
  CHECK(max_abs_diff(layer_forward(y, id), y) == 0.0);

  auto dyn = LayerWeights::initial(4, 5, mixer(MixerKind::Rtbp), true);
  randomize(rng, dyn, 0.3);
  const Matrix z = random_stream(rng, 4, 5);
  const Vector before = col_sums(z), after = col_sums(layer_forward(z, dyn));
  for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(before[j] - after[j]) < 1e-12);

  CHECK_THROWS_AS(layer_forward(Matrix(3, 5, 0.0), dyn), Error);
}

TEST_CASE("layer weights validation") {
  auto w = LayerWeights::initial(4, 2, mixer(MixerKind::Tbp));
  w.b_res.pop_back();
  CHECK_THROWS_AS(w.validate(), Error);
  auto v = LayerWeights::initial(4, 2, mixer(MixerKind::Tbp), true);
  v.w_res = Matrix(8, 3, 0.0);
  CHECK_THROWS_AS(v.validate(), Error);
}

TEST_CASE("depth sweep with identity mixers") {
  auto w = LayerWeights::initial(4, 3, mixer(MixerKind::Bvn));
  w.b_res = identity_biased_bvn_logits(4, -60.0);
  Xoshiro256 rng(3);
  const Matrix x0 = random_stream(rng, 4, 3);
  const auto trace = depth_sweep(std::vector<LayerWeights>(16, w), x0);
  REQUIRE(trace.layers.size() == 16);
  const double g0 = trace.layers[0].grad_norm;
  for (const auto& rec : trace.layers) CHECK(rec.grad_norm == doctest::Approx(g0).epsilon(1e-14));
  CHECK(g0 == doctest::Approx(std::sqrt(2 * sweep_loss(x0))).epsilon(1e-14));
}

TEST_CASE("depth sweep keeps exact charts exact") {
  const auto w = LayerWeights::initial(4, 2, mixer(MixerKind::Tbp));
  Xoshiro256 rng(4);
  const Matrix x0 = random_stream(rng, 4, 2);
  const auto trace = depth_sweep(std::vector<LayerWeights>(32, w), x0);
  for (const auto& rec : trace.layers) CHECK(rec.ds_deviation <= 1e-12);
  const Vector before = col_sums(x0), after = col_sums(trace.output);
  for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(before[j] - after[j]) < 1e-12);
}

TEST_CASE("depth sweep shows sinkhorn drift") {
  auto spec = mixer(MixerKind::Sinkhorn);
  spec.sinkhorn_iterations = 3;
  auto w = LayerWeights::initial(4, 2, spec);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) w.b_res[i * 4 + j] = j >= i ? 8.0 : 0.0;
  Xoshiro256 rng(5);
  const auto trace = depth_sweep(std::vector<LayerWeights>(32, w), random_stream(rng, 4, 2));
  const double first = trace.layers.front().ds_deviation;
  MESSAGE("sinkhorn K=3 deviation " << first << " -> " << trace.layers.back().ds_deviation);
  CHECK(first == trace.layers.front().mixer_deviation);
  CHECK(first > 1e-4);
  CHECK(trace.layers.back().ds_deviation > first);
  for (std::size_t l = 1; l < trace.layers.size(); ++l)
    CHECK(trace.layers[l].ds_deviation >= trace.layers[l - 1].ds_deviation);
}

TEST_CASE("depth sweep gradient matches finite differences") {
  Xoshiro256 rng(6);
  for (auto kind : {MixerKind::Tbp, MixerKind::Rtbp, MixerKind::Sinkhorn, MixerKind::Kron}) {
    for (int rep = 0; rep < 4; ++rep) {
      const std::size_t n = 4, c = 1 + rng.below(4), depth = 1 + rng.below(8);
      auto spec = mixer(kind, n);
      if (kind == MixerKind::Kron) spec.kron_factors = {2, 2};
      std::vector<LayerWeights> layers;
      for (std::size_t l = 0; l < depth; ++l) {
        auto w = LayerWeights::initial(n, c, spec, true);
        randomize(rng, w, 0.3);
        layers.push_back(std::move(w));
      }
      const Sublayer f = random_sublayer(rng, c);
      const Matrix x0 = random_stream(rng, n, c);
      const auto trace = depth_sweep(layers, x0, f);

      auto loss = [&](const Vector& flat) {
        Matrix x(n, c, flat);
        for (const auto& w : layers) x = layer_forward(x, w, f);
        return Vector{sweep_loss(x)};
      };
      const Vector at(x0.data().begin(), x0.data().end());
      const Matrix fd = oracle::central_differences(loss, at);
      const Matrix analytic(1, at.size(), trace.gradient.storage());
      REQUIRE(oracle::relative_error(analytic, fd) < 1e-4);
    }
  }
}

TEST_CASE("depth sweep limits") {
  const auto w = LayerWeights::initial(4, 2, mixer(MixerKind::Tbp));
  CHECK_THROWS_AS(depth_sweep(std::vector<LayerWeights>(65, w), Matrix(4, 2, 0.0)), Error);
  const auto wide = LayerWeights::initial(9, 1, mixer(MixerKind::Tbp, 9));
  CHECK_THROWS_AS(depth_sweep({wide}, Matrix(9, 1, 0.0)), Error);
}
