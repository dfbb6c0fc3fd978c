#include "birkhoff/hc_layer.hpp"

#include <cmath>

#include "mixer_kernels.hpp"

namespace birkhoff {

namespace {

using detail::Dual;
using detail::value_of;

template <class T>
std::vector<T> normalize(std::span<const T> x, const Normalization& norm) {
  std::vector<T> out(x.begin(), x.end());
  if (norm.kind == NormKind::Identity) return out;
  using std::sqrt;
  using detail::sqrt;
  T ms(0.0);
  for (const auto& v : x) ms += v * v;
  ms /= T(static_cast<double>(x.size()));
  const T scale = sqrt(ms + T(norm.epsilon));
  for (auto& v : out) v /= scale;
  return out;
}

/// y = x W for a row vector x.
template <class T>
std::vector<T> row_times(std::span<const T> x, const Matrix& w) {
  std::vector<T> y(w.cols(), T(0.0));
  for (std::size_t i = 0; i < w.rows(); ++i) {
    for (std::size_t j = 0; j < w.cols(); ++j) {
      const double wij = w(i, j);
      if (wij != 0.0) y[j] += x[i] * T(wij);
    }
  }
  return y;
}

template <class T>
struct Maps {
  std::vector<T> pre, post;
  BasicMatrix<T> res;
};

template <class T>
Maps<T> maps_of(std::span<const T> x_flat, const LayerWeights& w, const Normalization& norm,
                SinkhornResidual* report) {
  using std::tanh;
  using detail::tanh;
  using detail::sigmoid;
  const auto xn = normalize<T>(x_flat, norm);
  const std::span<const T> xs(xn);
  Maps<T> m;
  auto zpre = row_times<T>(xs, w.w_pre);
  auto zpost = row_times<T>(xs, w.w_post);
  m.pre.resize(w.n, T(0.0));
  m.post.resize(w.n, T(0.0));
  for (std::size_t i = 0; i < w.n; ++i) {
    if (w.gate == GateForm::Mhc) {
      m.pre[i] = sigmoid(T(w.alpha_pre) * zpre[i] + T(w.b_pre[i]));
      m.post[i] = T(2.0) * sigmoid(T(w.alpha_post) * zpost[i] + T(w.b_post[i]));
    } else {
      m.pre[i] = T(w.alpha_pre) * tanh(zpre[i]) + T(w.b_pre[i]);
      m.post[i] = T(w.alpha_post) * tanh(zpost[i]) + T(w.b_post[i]);
    }
  }
  std::vector<T> z(w.b_res.begin(), w.b_res.end());
  if (w.dynamic()) {
    const auto zr = row_times<T>(xs, w.w_res);
    for (std::size_t p = 0; p < z.size(); ++p) z[p] += T(w.alpha_res) * zr[p];
  }
  m.res = detail::mixer_of<T>(w.mixer, std::span<const T>(z), report);
  return m;
}

template <class T>
BasicMatrix<T> forward_of(const BasicMatrix<T>& x, const Maps<T>& maps, const Sublayer& f) {
  using std::tanh;
  using detail::tanh;
  const std::size_t n = x.rows();
  const std::size_t c = x.cols();
  BasicMatrix<T> out = multiply(maps.res, x);
  if (f.kind == SublayerKind::Zero) return out;
  std::vector<T> pooled(c, T(0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) pooled[j] += maps.pre[i] * x(i, j);
  auto y = row_times<T>(std::span<const T>(pooled), f.weight);
  for (std::size_t j = 0; j < c; ++j) y[j] = tanh(y[j] + T(f.bias[j]));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) out(i, j) += maps.post[i] * y[j];
  return out;
}

void check_sublayer(const Sublayer& f, std::size_t width) {
  if (f.kind == SublayerKind::TanhAffine &&
      (f.weight.rows() != width || f.weight.cols() != width || f.bias.size() != width)) {
    fail(ErrorKind::DimensionMismatch, "sublayer weight must be C x C and bias length C");
  }
}

void check_shape(const Matrix& x, const LayerWeights& w) {
  if (x.rows() != w.n || x.cols() != w.width) fail(ErrorKind::DimensionMismatch, "stream state must be n x C");
  for (const double v : x.data())
    if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "stream state must be finite");
}

}  // namespace

void LayerWeights::validate() const {
  const std::size_t nc = n * width;
  if (n == 0 || width == 0) fail(ErrorKind::InvalidArgument, "n and C must be positive");
  if (mixer.n != n) fail(ErrorKind::DimensionMismatch, "mixer size must equal n");
  mixer.validate();
  auto shape = [](const Matrix& m, std::size_t r, std::size_t c, const char* name) {
    if (m.rows() != r || m.cols() != c) {
      fail(ErrorKind::DimensionMismatch, std::string(name) + " must be " + std::to_string(r) + " x " + std::to_string(c));
    }
  };
  shape(w_pre, nc, n, "W_pre");
  shape(w_post, nc, n, "W_post");
  if (b_pre.size() != n || b_post.size() != n) fail(ErrorKind::DimensionMismatch, "b_pre and b_post must have length n");
  const std::size_t p = mixer.param_count();
  if (b_res.size() != p) fail(ErrorKind::DimensionMismatch, "b_res must have length " + std::to_string(p));
  if (dynamic()) shape(w_res, nc, p, "W_res");
}

LayerWeights LayerWeights::initial(std::size_t n, std::size_t width, const MixerSpec& mixer, bool dynamic) {
  LayerWeights w;
  w.n = n;
  w.width = width;
  w.mixer = mixer;
  w.mixer.n = n;
  w.w_pre = Matrix(n * width, n, 0.0);
  w.w_post = Matrix(n * width, n, 0.0);
  w.b_pre = Vector(n, -1.0);
  w.b_post = Vector(n, -1.0);
  w.b_pre.back() = 1.0;
  w.b_post.back() = 1.0;
  w.b_res = default_logits(w.mixer);
  if (dynamic) w.w_res = Matrix(n * width, w.mixer.param_count(), 0.0);
  return w;
}

LayerMaps layer_maps(std::span<const double> x_flat, const LayerWeights& weights, const Normalization& norm) {
  weights.validate();
  if (x_flat.size() != weights.n * weights.width) fail(ErrorKind::DimensionMismatch, "x must have length nC");
  SinkhornResidual report;
  auto m = maps_of<double>(x_flat, weights, norm, &report);
  LayerMaps out{std::move(m.pre), std::move(m.post), std::move(m.res), std::nullopt};
  if (weights.mixer.kind == MixerKind::Sinkhorn) out.residual = report;
  return out;
}

Matrix layer_forward(const Matrix& x, const LayerWeights& weights, const Sublayer& sublayer,
                     const Normalization& norm) {
  weights.validate();
  check_shape(x, weights);
  check_sublayer(sublayer, weights.width);
  const auto maps = maps_of<double>(x.data(), weights, norm, nullptr);
  return forward_of(x, maps, sublayer);
}

double sweep_loss(const Matrix& x) {
  double s = 0.0;
  for (const double v : x.data()) s += v * v;
  return 0.5 * s;
}

SweepTrace depth_sweep(const std::vector<LayerWeights>& layers, const Matrix& x0, const Sublayer& sublayer,
                       const Normalization& norm) {
  if (layers.empty() || layers.size() > 64) fail(ErrorKind::InvalidArgument, "depth sweep supports 1..64 layers");
  const std::size_t n = x0.rows();
  const std::size_t c = x0.cols();
  if (n > 8 || c > 16) fail(ErrorKind::InvalidArgument, "depth sweep supports n <= 8 and C <= 16");
  for (const auto& w : layers) {
    w.validate();
    check_shape(x0, w);
  }
  check_sublayer(sublayer, c);

  const std::size_t dim = n * c;
  BasicMatrix<Dual> x(n, c, detail::seed_variables(x0.data()));
  Matrix product = Matrix::identity(n);
  SweepTrace trace;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto maps = maps_of<Dual>(x.data(), layers[l], norm, nullptr);
    x = forward_of(x, maps, sublayer);
    const Matrix h = detail::values_matrix(maps.res);
    product = multiply(h, product);

    Vector grad(dim, 0.0);
    for (const auto& v : x.data())
      for (std::size_t p = 0; p < dim; ++p) grad[p] += v.value() * v.grad(p);
    double g2 = 0.0;
    for (const double g : grad) g2 += g * g;

    SweepRecord rec;
    rec.layer = l + 1;
    rec.ds_deviation = ds_deviation(product).max();
    rec.grad_norm = std::sqrt(g2);
    rec.mixer_deviation = ds_deviation(h).max();
    trace.layers.push_back(rec);
    if (l + 1 == layers.size()) trace.gradient = Matrix(n, c, std::move(grad));
  }
  trace.output = detail::values_matrix(x);
  return trace;
}

}  // namespace birkhoff
