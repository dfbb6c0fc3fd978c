#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "birkhoff/baselines.hpp"
#include "birkhoff/mixer.hpp"
#include "birkhoff/variants.hpp"
#include "chart_kernels.hpp"

namespace birkhoff::detail {

using std::exp;

template <class T>
std::vector<T> softmax_of(std::span<const T> logits) {
  double top = -INFINITY;
  for (const auto& z : logits) top = std::max(top, value_of(z));
  std::vector<T> w;
  w.reserve(logits.size());
  T total(0.0);
  for (const auto& z : logits) {
    w.push_back(exp(z - T(top)));
    total += w.back();
  }
  for (auto& v : w) v /= total;
  return w;
}

template <class T>
BasicMatrix<T> sinkhorn_of(const BasicMatrix<T>& logits, int iterations, SinkhornResidual* report) {
  if (iterations < 1) fail(ErrorKind::InvalidArgument, "sinkhorn needs at least one iteration");
  const std::size_t n = logits.rows();
  const std::size_t m = logits.cols();
  BasicMatrix<T> h(n, m, T(0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double top = -INFINITY;
    for (std::size_t j = 0; j < m; ++j) top = std::max(top, value_of(logits(i, j)));
    if (!std::isfinite(top)) fail(ErrorKind::InvalidArgument, "sinkhorn logits must be finite");
    for (std::size_t j = 0; j < m; ++j) h(i, j) = exp(logits(i, j) - T(top));
  }
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      T s(0.0);
      for (std::size_t j = 0; j < m; ++j) s += h(i, j);
      for (std::size_t j = 0; j < m; ++j) h(i, j) /= s;
    }
    for (std::size_t j = 0; j < m; ++j) {
      T s(0.0);
      for (std::size_t i = 0; i < n; ++i) s += h(i, j);
      for (std::size_t i = 0; i < n; ++i) h(i, j) /= s;
    }
  }
  for (const auto& v : h.data())
    if (!std::isfinite(value_of(v))) fail(ErrorKind::InvalidArgument, "sinkhorn produced non-finite entries");
  if (report != nullptr) {
    report->iterations = iterations;
    report->row_residual = 0.0;
    report->col_residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += value_of(h(i, j));
      report->row_residual = std::max(report->row_residual, std::abs(s - 1.0));
    }
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += value_of(h(i, j));
      report->col_residual = std::max(report->col_residual, std::abs(s - 1.0));
    }
  }
  return h;
}

inline std::size_t bvn_size_for(std::size_t logit_count) {
  std::size_t f = 1;
  for (std::size_t n = 1; n <= kMaxBvnSize; ++n) {
    f *= n;
    if (f == logit_count) return n;
  }
  fail(ErrorKind::InvalidArgument, "BvN logit count must be n! for some n <= 6");
}

template <class T>
BasicMatrix<T> bvn_of(std::span<const T> logits) {
  const std::size_t n = bvn_size_for(logits.size());
  const auto perms = permutations(n);
  const auto w = softmax_of(logits);
  BasicMatrix<T> h(n, n, T(0.0));
  for (std::size_t k = 0; k < perms.size(); ++k)
    for (std::size_t i = 0; i < n; ++i) h(i, perms[k][i]) += w[k];
  return h;
}

template <class T>
BasicMatrix<T> kron_of(const std::vector<std::size_t>& sizes, std::span<const T> logits) {
  std::vector<BasicMatrix<T>> factors;
  std::size_t offset = 0;
  for (const std::size_t s : sizes) {
    const std::size_t count = bvn_logit_count(s);
    if (offset + count > logits.size()) fail(ErrorKind::DimensionMismatch, "too few Kronecker factor logits");
    factors.push_back(bvn_of<T>(logits.subspan(offset, count)));
    offset += count;
  }
  if (offset != logits.size()) fail(ErrorKind::DimensionMismatch, "too many Kronecker factor logits");
  BasicMatrix<T> h = factors.back();
  for (std::size_t k = factors.size() - 1; k-- > 0;) h = kron(h, factors[k]);
  return h;
}

template <class T>
BasicMatrix<T> shape_of(const BasicMatrix<T>& h, const SpectralShaping& s) {
  if (s.is_identity()) return h;
  const std::size_t n = h.rows();
  const double keep = 1.0 - s.identity_weight - s.uniform_weight;
  const double u = 1.0 / static_cast<double>(n);
  BasicMatrix<T> out(n, n, T(0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T v = T(keep) * h(i, j) + T(s.uniform_weight * u + (i == j ? s.identity_weight : 0.0));
      out(i, j) = T(1.0 - s.post_delta) * v + T(s.post_delta * u);
    }
  }
  return out;
}

template <class T>
BasicMatrix<T> conjugate_of(const BasicMatrix<T>& h, const std::vector<std::size_t>& perm) {
  const std::size_t n = h.rows();
  BasicMatrix<T> out(n, n, T(0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = h(perm[i], perm[j]);
  return out;
}

template <class T>
BasicMatrix<T> chart_of(ChartKind kind, std::vector<T> r, std::vector<T> c, std::span<const T> params,
                        const SquashSpec& squash, double tol) {
  if (kind == ChartKind::Tbp) return tbp_sweep<T>(std::move(r), std::move(c), params, squash, tol);
  return rtbp_sweep<T>(std::move(r), std::move(c), params, squash, tol, RtbpOptions{});
}

/// Σ_k w_k P_k^T H_k P_k with H_k built on the permuted margins r∘π_k^{-1}.
template <class T>
BasicMatrix<T> average_of(ChartKind kind, const Vector& rows, const Vector& cols, std::span<const T> params,
                          const AveragingSpec& spec, const SquashSpec& squash, double tol) {
  const std::size_t n = rows.size();
  const std::size_t dim = chart_dimension(n, n);
  if (params.size() != dim * spec.permutations.size()) {
    fail(ErrorKind::DimensionMismatch, "averaged chart expects one parameter block per permutation");
  }
  BasicMatrix<T> acc(n, n, T(0.0));
  for (std::size_t k = 0; k < spec.permutations.size(); ++k) {
    const auto& perm = spec.permutations[k];
    std::vector<T> r(n, T(0.0)), c(n, T(0.0));
    for (std::size_t i = 0; i < n; ++i) {
      r[perm[i]] = T(rows[i]);
      c[perm[i]] = T(cols[i]);
    }
    const auto h = chart_of<T>(kind, std::move(r), std::move(c), params.subspan(k * dim, dim), squash, tol);
    const auto hc = conjugate_of(h, perm);
    const T w(spec.weights[k]);
    for (std::size_t q = 0; q < acc.size(); ++q) acc.data()[q] += w * hc.data()[q];
  }
  return acc;
}

/// Residual mixer from a logit vector according to the spec.
template <class T>
BasicMatrix<T> mixer_of(const MixerSpec& spec, std::span<const T> logits, SinkhornResidual* report) {
  if (logits.size() != spec.param_count()) {
    fail(ErrorKind::DimensionMismatch, "mixer expects " + std::to_string(spec.param_count()) + " logits, got " +
                                           std::to_string(logits.size()));
  }
  const std::size_t n = spec.n;
  const Vector ones(n, 1.0);
  const double tol = mass_tolerance(static_cast<double>(n));
  BasicMatrix<T> h;
  switch (spec.kind) {
    case MixerKind::Tbp:
    case MixerKind::Rtbp: {
      const ChartKind chart = spec.kind == MixerKind::Tbp ? ChartKind::Tbp : ChartKind::Rtbp;
      if (spec.averaging) {
        h = average_of<T>(chart, ones, ones, logits, *spec.averaging, spec.squash, tol);
      } else {
        h = chart_of<T>(chart, lift<T>(ones), lift<T>(ones), logits, spec.squash, tol);
      }
      break;
    }
    case MixerKind::Bvn:
      h = bvn_of<T>(logits);
      break;
    case MixerKind::Kron:
      h = kron_of<T>(spec.kron_factors, logits);
      break;
    case MixerKind::Sinkhorn:
      h = sinkhorn_of<T>(BasicMatrix<T>(n, n, std::vector<T>(logits.begin(), logits.end())),
                         spec.sinkhorn_iterations, report);
      break;
  }
  return shape_of(h, spec.shaping);
}

}  // namespace birkhoff::detail
