#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "birkhoff/matrix.hpp"

namespace birkhoff {

inline constexpr int kReferenceSinkhornIterations = 20;
inline constexpr std::size_t kMaxBvnSize = 6;

struct SinkhornResidual {
  double row_residual = 0.0;
  double col_residual = 0.0;
  int iterations = 0;
  double max() const noexcept { return std::max(row_residual, col_residual); }
};

struct SinkhornResult {
  Matrix matrix;
  SinkhornResidual residual;
};

/// exp(logits) followed by `iterations` rounds of row then column
/// normalization. Rows are shifted by their maximum before exponentiation.
SinkhornResult sinkhorn(const Matrix& logits, int iterations = kReferenceSinkhornIterations);

/// Identity-biased logits: 0 on the diagonal, off_diagonal elsewhere.
Matrix identity_biased_logits(std::size_t n, double off_diagonal = -8.0);

/// s on and above the diagonal, 0 below. Its only perfect matching is the
/// identity, so Sinkhorn creeps toward I and is slow to balance.
Matrix triangular_logits(std::size_t n, double s);

struct SinkhornGap {
  Matrix logits;
  double scale = 0.0;
  SinkhornResidual residual;
};

/// First scale (in the order given) whose triangular logits leave a Sinkhorn
/// residual above threshold after `iterations` rounds.
std::optional<SinkhornGap> find_sinkhorn_gap(std::size_t n, int iterations, std::span<const double> scales,
                                             double threshold);

/// All permutations of {0..n−1} in lexicographic order.
std::vector<std::vector<std::size_t>> permutations(std::size_t n);

Matrix permutation_matrix(const std::vector<std::size_t>& perm);

/// Numerically stable softmax.
Vector softmax(std::span<const double> logits);

/// Σ_k softmax(logits)_k P_k over the lexicographic permutation enumeration.
/// The size n is inferred from logits.size() == n!, n ≤ 6.
Matrix bvn_combination(std::span<const double> logits);

/// Number of logits a BvN combination of size n takes (n!).
std::size_t bvn_logit_count(std::size_t n);

/// Logits putting weight on the identity permutation: 0 for it, `others`
/// for the rest.
Vector identity_biased_bvn_logits(std::size_t n, double others = -8.0);

struct KroneckerFactors {
  std::vector<std::size_t> factor_sizes;
  std::vector<Vector> logits;  // logits[k].size() == factor_sizes[k]!

  void validate() const;
  std::size_t size() const;
};

/// H = U^(K) ⊗ … ⊗ U^(1), each U^(k) a BvN combination.
Matrix kronecker_mix(const KroneckerFactors& factors);

struct KroneckerFit {
  double distance = 0.0;
  Vector identity_weights;  // weight of the identity in each 2×2 factor
  Matrix best;
};

/// Frobenius distance from target to the closest U^(K) ⊗ … ⊗ U^(1) with every
/// factor 2×2, by a grid scan of the identity weights followed by a
/// shrinking pattern search.
KroneckerFit kronecker_best_fit(const Matrix& target, std::size_t factor_count, std::size_t grid = 101);

}  // namespace birkhoff
