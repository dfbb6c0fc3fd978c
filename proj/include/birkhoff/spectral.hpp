#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "birkhoff/matrix.hpp"

namespace birkhoff {

using Complex = std::complex<double>;

/// Eigenvalues of a general real square matrix: Householder reduction to
/// upper Hessenberg form followed by Francis double-shift QR. Complex pairs
/// come out of 2×2 diagonal blocks of the real Schur form. Intended for
/// small dense matrices (n ≤ 64).
std::vector<Complex> eigenvalues(const Matrix& a);

/// Sorted by modulus, largest first; ties broken by real then imaginary part.
void sort_by_modulus(std::vector<Complex>& values);

struct SpectralReport {
  std::vector<Complex> eigenvalues;  // sorted by modulus, descending
  Vector eigenvalue_moduli;          // same order
  /// γ = 1 − max_{i≥2} Re λ_i; only reported for symmetric input.
  std::optional<double> spectral_gap;
  /// γ* = 1 − max_{i≥2} |λ_i|, excluding the eigenvalue closest to 1.
  double absolute_gap = 0.0;
  bool is_ergodic = false;  // every entry strictly positive
  bool is_symmetric = false;
  bool doubly_stochastic = false;
  double ds_deviation = 0.0;
  std::vector<std::string> warnings;
};

SpectralReport analyze(const Matrix& h);

/// Eigenvalues other than the one closest to 1 (the Perron eigenvalue of a
/// doubly stochastic matrix).
std::vector<Complex> nontrivial_eigenvalues(std::vector<Complex> values);

struct ChainStep {
  std::size_t step = 0;
  double row_deviation = 0.0;
  double col_deviation = 0.0;
};

struct ChainResult {
  Matrix product;
  std::vector<ChainStep> trace;
};

/// Left-to-right product H_1 H_2 … H_L with the deviation of each partial
/// product's row and column sums from 1.
ChainResult compose_chain(const std::vector<Matrix>& mixers);

}  // namespace birkhoff
