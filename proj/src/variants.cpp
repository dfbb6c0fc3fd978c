#include "birkhoff/variants.hpp"

#include <cmath>
#include <numeric>

#include "chart_kernels.hpp"
#include "mixer_kernels.hpp"

namespace birkhoff {

std::string to_string(ChartKind kind) { return kind == ChartKind::Tbp ? "tbp" : "rtbp"; }

TransportMatrix chart_forward(ChartKind kind, const Margins& margins, const ChartParams& params,
                              const SquashSpec& squash) {
  return kind == ChartKind::Tbp ? tbp_forward(margins, params, squash) : rtbp_forward(margins, params, squash);
}

Matrix chart_jacobian(ChartKind kind, const Margins& margins, const ChartParams& params, const SquashSpec& squash) {
  return kind == ChartKind::Tbp ? tbp_jacobian(margins, params, squash) : rtbp_jacobian(margins, params, squash);
}

void SpectralShaping::validate() const {
  if (identity_weight < 0.0 || uniform_weight < 0.0) fail(ErrorKind::InvalidArgument, "shaping weights must be >= 0");
  if (identity_weight + uniform_weight > 1.0 + 1e-15) {
    fail(ErrorKind::InvalidArgument, "identity and uniform weights must satisfy 1 - lambda - mu >= 0");
  }
  if (post_delta < 0.0 || post_delta >= 1.0) fail(ErrorKind::InvalidArgument, "post_delta must lie in [0, 1)");
}

SpectralShaping SpectralShaping::from_logits(double h_logit, double i_logit, double j_logit, double post_logit) {
  const double z[3] = {h_logit, i_logit, j_logit};
  const auto w = detail::softmax_of<double>(z);
  return {w[1], w[2], detail::sigmoid(post_logit)};
}

double default_post_delta() { return detail::sigmoid(-8.0); }

namespace {

bool is_permutation_of(const std::vector<std::size_t>& perm, std::size_t n) {
  if (perm.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (const std::size_t p : perm) {
    if (p >= n || seen[p]) return false;
    seen[p] = true;
  }
  return true;
}

const Matrix& require_ds(const TransportMatrix& h) {
  if (!h.entries().square()) fail(ErrorKind::DimensionMismatch, "expected a square matrix");
  if (!h.margins().is_birkhoff()) fail(ErrorKind::NotDoublyStochastic, "expected doubly stochastic margins");
  return h.entries();
}

}  // namespace

void AveragingSpec::validate(std::size_t n) const {
  if (permutations.empty()) fail(ErrorKind::InvalidArgument, "averaging needs at least one permutation");
  if (permutations.size() != weights.size()) {
    fail(ErrorKind::DimensionMismatch, "one weight per permutation is required");
  }
  for (const auto& p : permutations)
    if (!is_permutation_of(p, n)) fail(ErrorKind::InvalidArgument, "averaging permutation is not a bijection");
  double total = 0.0;
  for (const double w : weights) {
    if (w < 0.0) fail(ErrorKind::InvalidArgument, "averaging weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) fail(ErrorKind::InvalidArgument, "averaging weights must sum to 1");
}

AveragingSpec AveragingSpec::from_logits(std::vector<std::vector<std::size_t>> perms, const Vector& logits) {
  AveragingSpec spec;
  spec.permutations = std::move(perms);
  spec.weights = softmax(logits);
  return spec;
}

AveragingSpec AveragingSpec::identity_and_reverse(std::size_t n) {
  std::vector<std::size_t> id(n), rev(n);
  std::iota(id.begin(), id.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) rev[i] = n - 1 - i;
  return from_logits({id, rev}, {0.0, 0.0});
}

TransportMatrix lazyfy(const TransportMatrix& h, double alpha) {
  const Matrix& x = require_ds(h);
  if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorKind::InvalidArgument, "alpha must lie in (0, 1]");
  Matrix out = x;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = alpha * x(i, j) + (i == j ? 1.0 - alpha : 0.0);
  return TransportMatrix::adopt(std::move(out), h.margins());
}

TransportMatrix minorize(const TransportMatrix& h, double eps) {
  const Matrix& x = require_ds(h);
  if (!(eps >= 0.0 && eps < 1.0)) fail(ErrorKind::InvalidArgument, "eps must lie in [0, 1)");
  const double u = eps / static_cast<double>(x.rows());
  Matrix out = x;
  for (auto& v : out.data()) v = (1.0 - eps) * v + u;
  return TransportMatrix::adopt(std::move(out), h.margins());
}

TransportMatrix apply_shaping(const TransportMatrix& h, const SpectralShaping& shaping) {
  shaping.validate();
  const Matrix& x = require_ds(h);
  return TransportMatrix::adopt(detail::shape_of(x, shaping), h.margins());
}

Matrix conjugate(const Matrix& h, const std::vector<std::size_t>& permutation) {
  if (!h.square() || !is_permutation_of(permutation, h.rows())) {
    fail(ErrorKind::InvalidArgument, "conjugation needs a square matrix and a matching permutation");
  }
  return detail::conjugate_of(h, permutation);
}

TransportMatrix average_charts(const Margins& margins, const std::vector<ChartParams>& per_chart_params,
                               const AveragingSpec& spec, ChartKind base, const SquashSpec& squash) {
  squash.validate();
  if (margins.n() != margins.m()) fail(ErrorKind::DimensionMismatch, "averaged charts need square margins");
  if (per_chart_params.size() != spec.permutations.size()) {
    fail(ErrorKind::DimensionMismatch, "one parameter vector per permutation is required");
  }
  spec.validate(margins.n());
  Vector flat;
  for (const auto& p : per_chart_params) flat.insert(flat.end(), p.values.begin(), p.values.end());
  auto x = detail::average_of<double>(base, margins.row_sums(), margins.col_sums(), flat, spec, squash,
                                      margins.tolerance());
  return TransportMatrix::adopt(std::move(x), margins);
}

}  // namespace birkhoff
