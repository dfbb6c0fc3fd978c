#include "birkhoff/squash.hpp"

#include <cmath>

#include "birkhoff/error.hpp"
#include "birkhoff/transport.hpp"
#include "chart_kernels.hpp"

namespace birkhoff {

void SquashSpec::validate() const {
  if (!(beta > 0.0)) fail(ErrorKind::InvalidArgument, "squash beta must be positive");
  if (!(epsilon > 0.0)) fail(ErrorKind::InvalidArgument, "squash epsilon must be positive");
  if (!(rho > 0.0 && rho < 0.5)) fail(ErrorKind::InvalidArgument, "squash rho must lie in (0, 0.5)");
}

std::string to_string(SquashKind kind) {
  switch (kind) {
    case SquashKind::Sigmoid: return "sigmoid";
    case SquashKind::Scaled: return "scaled";
    case SquashKind::MarginedScaled: return "margined_scaled";
    case SquashKind::LinearClipped: return "linear_clipped";
  }
  return "sigmoid";
}

SquashKind squash_kind_from_string(const std::string& name) {
  if (name == "sigmoid") return SquashKind::Sigmoid;
  if (name == "scaled") return SquashKind::Scaled;
  if (name == "margined_scaled" || name == "margined") return SquashKind::MarginedScaled;
  if (name == "linear_clipped" || name == "linear") return SquashKind::LinearClipped;
  fail(ErrorKind::InvalidArgument, "unknown squash kind '" + name + "'");
}

double squash(double t, const FeasibleInterval& interval, const SquashSpec& spec) {
  spec.validate();
  const detail::Interval<double> iv{interval.lower, interval.upper, interval.width};
  return detail::place(iv, t, spec);
}

namespace {

double logit_checked(double u) {
  if (!(u > kBoundaryGuard && u < 1.0 - kBoundaryGuard)) {
    fail(ErrorKind::BoundaryPoint, "relative position " + std::to_string(u) + " is not interior");
  }
  return std::log(u) - std::log1p(-u);
}

}  // namespace

double unsquash(double u, double width, const SquashSpec& spec) {
  switch (spec.kind) {
    case SquashKind::Sigmoid:
      return logit_checked(u);
    case SquashKind::Scaled:
      return logit_checked(u) * (width + spec.epsilon) / spec.beta;
    case SquashKind::MarginedScaled:
      return logit_checked((u - spec.rho) / (1.0 - 2.0 * spec.rho)) * (width + spec.epsilon) / spec.beta;
    case SquashKind::LinearClipped:
      if (u < -kBoundaryGuard || u > 1.0 + kBoundaryGuard) {
        fail(ErrorKind::BoundaryPoint, "relative position outside [0, 1]");
      }
      return std::clamp(u, 0.0, 1.0);
  }
  return 0.0;
}

namespace detail {

double unsquash_slack(double lo, double hi, double width, const SquashSpec& spec) {
  lo = std::max(lo, 0.0);
  hi = std::max(hi, 0.0);
  const double total = lo + hi;
  if (!(total > 0.0)) fail(ErrorKind::DegenerateInterval, "interval has no width");
  if (spec.kind == SquashKind::LinearClipped) return lo / total;
  double a = lo;
  double b = hi;
  if (spec.kind == SquashKind::MarginedScaled) {
    a = (1.0 - spec.rho) * lo - spec.rho * hi;
    b = (1.0 - spec.rho) * hi - spec.rho * lo;
  }
  const double floor = kBoundaryGuard * (a + b);
  if (!(a > floor && b > floor)) {
    fail(ErrorKind::BoundaryPoint, "relative position " + std::to_string(lo / total) + " is not interior");
  }
  const double z = std::log(a) - std::log(b);
  if (spec.kind == SquashKind::Sigmoid) return z;
  return z * (width + spec.epsilon) / spec.beta;
}

}  // namespace detail

}  // namespace birkhoff
