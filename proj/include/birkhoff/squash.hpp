#pragma once

#include <string>

namespace birkhoff {

/// How a free parameter is mapped into its feasible interval [L, U].
///
///   sigmoid          x = L + Δ σ(t)
///   scaled           x = L + Δ σ(β t / (Δ + ε))
///   margined_scaled  x = L + Δ (ρ + (1 − 2ρ) σ(β t / (Δ + ε)))
///   linear_clipped   x = L + Δ clip(t, 0, 1)
enum class SquashKind { Sigmoid, Scaled, MarginedScaled, LinearClipped };

struct SquashSpec {
  SquashKind kind = SquashKind::Sigmoid;
  double beta = 4.0;
  double epsilon = 1e-6;
  double rho = 1e-4;

  /// Throws InvalidArgument unless beta > 0, epsilon > 0 and rho in (0, 0.5).
  void validate() const;

  static SquashSpec sigmoid() { return {}; }
  static SquashSpec scaled(double beta = 4.0, double epsilon = 1e-6) {
    return {SquashKind::Scaled, beta, epsilon, 1e-4};
  }
  static SquashSpec margined(double rho = 1e-4, double beta = 4.0, double epsilon = 1e-6) {
    return {SquashKind::MarginedScaled, beta, epsilon, rho};
  }
  static SquashSpec linear() { return {SquashKind::LinearClipped, 4.0, 1e-6, 1e-4}; }
};

std::string to_string(SquashKind kind);
SquashKind squash_kind_from_string(const std::string& name);

struct FeasibleInterval;

/// Maps t into the interval according to the spec; the result lies in
/// [lower, upper] (or [lower + ρΔ, upper − ρΔ] for the margined kind).
double squash(double t, const FeasibleInterval& interval, const SquashSpec& spec);

/// Inverse of the squash on an interval of the given width: takes the
/// relative position u = (x − L)/Δ and returns t. Throws BoundaryPoint when u
/// is outside the open range the squash can reach (δ = 1e-12 guard).
double unsquash(double u, double width, const SquashSpec& spec);

inline constexpr double kBoundaryGuard = 1e-12;

}  // namespace birkhoff
