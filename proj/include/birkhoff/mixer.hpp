#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "birkhoff/baselines.hpp"
#include "birkhoff/squash.hpp"
#include "birkhoff/variants.hpp"

namespace birkhoff {

enum class MixerKind { Tbp, Rtbp, Bvn, Kron, Sinkhorn };

std::string to_string(MixerKind kind);
MixerKind mixer_kind_from_string(const std::string& name);

/// Which parameterization produces a residual mixing matrix, and how.
///
/// Logit layout consumed by build_mixer:
///   tbp / rtbp   (n−1)² per chart, one block per averaging permutation
///   bvn          n! over the lexicographic permutation enumeration
///   kron         Σ i_k!, factor 1 first
///   sinkhorn     n², row-major
struct MixerSpec {
  MixerKind kind = MixerKind::Tbp;
  std::size_t n = 4;
  SquashSpec squash;
  SpectralShaping shaping;
  std::optional<AveragingSpec> averaging;
  int sinkhorn_iterations = kReferenceSinkhornIterations;
  std::vector<std::size_t> kron_factors;

  void validate() const;
  std::size_t param_count() const;
  /// True for parameterizations that are exactly doubly stochastic.
  bool exact() const noexcept { return kind != MixerKind::Sinkhorn; }
};

struct MixerOutput {
  Matrix matrix;
  std::optional<SinkhornResidual> residual;
};

MixerOutput build_mixer(const MixerSpec& spec, std::span<const double> logits);

/// ∂vec(H)/∂logits, rows row-major over H.
Matrix mixer_jacobian(const MixerSpec& spec, std::span<const double> logits);

/// The initialization used for each family: identity-biased logits for
/// sinkhorn/bvn/kron, zeros for the charts (0.5 for the linear squash).
Vector default_logits(const MixerSpec& spec);

}  // namespace birkhoff
