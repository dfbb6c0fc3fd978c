#include "birkhoff/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mixer_kernels.hpp"

namespace birkhoff {

SinkhornResult sinkhorn(const Matrix& logits, int iterations) {
  if (logits.empty()) fail(ErrorKind::InvalidArgument, "sinkhorn needs a non-empty matrix");
  SinkhornResult out;
  out.matrix = detail::sinkhorn_of<double>(logits, iterations, &out.residual);
  return out;
}

Matrix identity_biased_logits(std::size_t n, double off_diagonal) {
  Matrix z(n, n, off_diagonal);
  for (std::size_t i = 0; i < n; ++i) z(i, i) = 0.0;
  return z;
}

Matrix triangular_logits(std::size_t n, double s) {
  Matrix z(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) z(i, j) = s;
  return z;
}

std::optional<SinkhornGap> find_sinkhorn_gap(std::size_t n, int iterations, std::span<const double> scales,
                                             double threshold) {
  for (const double s : scales) {
    auto z = triangular_logits(n, s);
    const auto r = sinkhorn(z, iterations);
    if (r.residual.max() > threshold) return SinkhornGap{std::move(z), s, r.residual};
  }
  return std::nullopt;
}

std::vector<std::vector<std::size_t>> permutations(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::vector<std::vector<std::size_t>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

Matrix permutation_matrix(const std::vector<std::size_t>& perm) {
  Matrix p(perm.size(), perm.size(), 0.0);
  for (std::size_t i = 0; i < perm.size(); ++i) p(i, perm[i]) = 1.0;
  return p;
}

Vector softmax(std::span<const double> logits) { return detail::softmax_of(logits); }

std::size_t bvn_logit_count(std::size_t n) {
  if (n == 0 || n > kMaxBvnSize) fail(ErrorKind::InvalidArgument, "BvN combinations are limited to n <= 6");
  std::size_t f = 1;
  for (std::size_t k = 2; k <= n; ++k) f *= k;
  return f;
}

Matrix bvn_combination(std::span<const double> logits) { return detail::bvn_of(logits); }

Vector identity_biased_bvn_logits(std::size_t n, double others) {
  Vector z(bvn_logit_count(n), others);
  z[0] = 0.0;  // lexicographically first permutation is the identity
  return z;
}

void KroneckerFactors::validate() const {
  if (factor_sizes.empty()) fail(ErrorKind::InvalidArgument, "at least one Kronecker factor is required");
  if (factor_sizes.size() != logits.size()) fail(ErrorKind::DimensionMismatch, "one logit vector per factor");
  for (std::size_t k = 0; k < factor_sizes.size(); ++k) {
    if (factor_sizes[k] < 2) fail(ErrorKind::InvalidArgument, "Kronecker factors must have size >= 2");
    if (logits[k].size() != bvn_logit_count(factor_sizes[k])) {
      fail(ErrorKind::DimensionMismatch, "factor logits must have i_k! entries");
    }
  }
}

std::size_t KroneckerFactors::size() const {
  std::size_t n = 1;
  for (const std::size_t s : factor_sizes) n *= s;
  return n;
}

Matrix kronecker_mix(const KroneckerFactors& factors) {
  factors.validate();
  Vector flat;
  for (const auto& z : factors.logits) flat.insert(flat.end(), z.begin(), z.end());
  return detail::kron_of<double>(factors.factor_sizes, flat);
}

namespace {

Matrix two_by_two_product(const Vector& weights) {
  Matrix h = Matrix::identity(1);
  for (const double a : weights) {
    Matrix u(2, 2, 1.0 - a);
    u(0, 0) = u(1, 1) = a;
    h = kron(u, h);
  }
  return h;
}

}  // namespace

KroneckerFit kronecker_best_fit(const Matrix& target, std::size_t factor_count, std::size_t grid) {
  if (factor_count == 0 || factor_count > 4) fail(ErrorKind::InvalidArgument, "factor_count must be in 1..4");
  if (target.rows() != (std::size_t{1} << factor_count) || !target.square()) {
    fail(ErrorKind::DimensionMismatch, "target must be 2^K x 2^K");
  }
  if (grid < 2) fail(ErrorKind::InvalidArgument, "grid needs at least two points per axis");

  KroneckerFit fit;
  fit.distance = INFINITY;
  Vector w(factor_count, 0.0);
  std::size_t total = 1;
  for (std::size_t k = 0; k < factor_count; ++k) total *= grid;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t k = 0; k < factor_count; ++k) {
      w[k] = static_cast<double>(rest % grid) / static_cast<double>(grid - 1);
      rest /= grid;
    }
    const double d = frobenius_distance(two_by_two_product(w), target);
    if (d < fit.distance) {
      fit.distance = d;
      fit.identity_weights = w;
    }
  }
  // Pattern search from the best grid point.
  double step = 1.0 / static_cast<double>(grid - 1);
  while (step > 1e-12) {
    bool moved = false;
    for (std::size_t k = 0; k < factor_count; ++k) {
      for (const double dir : {-1.0, 1.0}) {
        Vector trial = fit.identity_weights;
        trial[k] = std::clamp(trial[k] + dir * step, 0.0, 1.0);
        const double d = frobenius_distance(two_by_two_product(trial), target);
        if (d < fit.distance) {
          fit.distance = d;
          fit.identity_weights = std::move(trial);
          moved = true;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
  fit.best = two_by_two_product(fit.identity_weights);
  return fit;
}

}  // namespace birkhoff
