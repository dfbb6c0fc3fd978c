#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "birkhoff/transport.hpp"

namespace birkhoff {

enum class ChartKind { Tbp, Rtbp };

std::string to_string(ChartKind kind);

/// Evaluates the chosen chart.
TransportMatrix chart_forward(ChartKind kind, const Margins& margins, const ChartParams& params,
                              const SquashSpec& squash = {});
Matrix chart_jacobian(ChartKind kind, const Margins& margins, const ChartParams& params,
                      const SquashSpec& squash = {});

/// Post-processing of a doubly stochastic mixer:
///   H ← (1 − λ − μ) H + λ I + μ J,   then   H ← (1 − δ) H + δ J
/// with λ = identity_weight, μ = uniform_weight, δ = post_delta.
struct SpectralShaping {
  double identity_weight = 0.0;
  double uniform_weight = 0.0;
  double post_delta = 0.0;

  void validate() const;
  bool is_identity() const noexcept {
    return identity_weight == 0.0 && uniform_weight == 0.0 && post_delta == 0.0;
  }

  /// λ, μ from a softmax over the logits of {H, I, J}; δ = σ(post_logit).
  static SpectralShaping from_logits(double h_logit, double i_logit, double j_logit, double post_logit);
};

/// σ(−8): initial post-minorization constant.
double default_post_delta();

/// Convex combination of permutation-conjugated charts,
///   Σ_k w_k P_k^T H_k P_k,   (P_k)_{π_k(i), i} = 1.
struct AveragingSpec {
  std::vector<std::vector<std::size_t>> permutations;
  Vector weights;

  /// Throws unless each permutation is a bijection on {0..n−1} and the
  /// weights are a probability vector (sum 1 within 1e-12).
  void validate(std::size_t n) const;

  static AveragingSpec from_logits(std::vector<std::vector<std::size_t>> permutations, const Vector& logits);
  /// {identity, reverse} with equal weights.
  static AveragingSpec identity_and_reverse(std::size_t n);
};

/// H^(α) = (1 − α) I + α H.
TransportMatrix lazyfy(const TransportMatrix& h, double alpha);

/// H_ε = (1 − ε) H + ε J.
TransportMatrix minorize(const TransportMatrix& h, double eps);

TransportMatrix apply_shaping(const TransportMatrix& h, const SpectralShaping& shaping);

/// Each chart k is built on the margins seen through π_k so that the
/// conjugated result lies in T(r, c).
TransportMatrix average_charts(const Margins& margins, const std::vector<ChartParams>& per_chart_params,
                               const AveragingSpec& spec, ChartKind base = ChartKind::Tbp,
                               const SquashSpec& squash = {});

/// P^T H P for the permutation π, i.e. entry (i, j) = H(π(i), π(j)).
Matrix conjugate(const Matrix& h, const std::vector<std::size_t>& permutation);

}  // namespace birkhoff
