#pragma once

// Forward-mode tangent used to evaluate exact Jacobians of the chart
// sweeps. A Dual carries a value and its gradient with respect to a fixed
// set of seed variables; an empty gradient means "constant".

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace birkhoff::detail {

class Dual {
 public:
  Dual() = default;
  Dual(double value) : value_(value) {}  // NOLINT: implicit lift of constants
  Dual(double value, std::vector<double> grad) : value_(value), grad_(std::move(grad)) {}

  static Dual variable(double value, std::size_t index, std::size_t dim) {
    std::vector<double> g(dim, 0.0);
    g[index] = 1.0;
    return {value, std::move(g)};
  }

  double value() const noexcept { return value_; }
  const std::vector<double>& grad() const noexcept { return grad_; }
  double grad(std::size_t i) const noexcept { return i < grad_.size() ? grad_[i] : 0.0; }

  Dual& operator+=(const Dual& o) {
    value_ += o.value_;
    axpy(1.0, o.grad_);
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    value_ -= o.value_;
    axpy(-1.0, o.grad_);
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    // d(ab) = a db + b da
    if (&o == this) return *this *= Dual(o);
    const double a = value_;
    scale(o.value_);
    axpy(a, o.grad_);
    value_ *= o.value_;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    // d(a/b) = da/b − a db / b²
    if (&o == this) return *this /= Dual(o);
    const double inv = 1.0 / o.value_;
    const double q = value_ * inv;
    scale(inv);
    if (!o.grad_.empty()) {
      if (grad_.size() < o.grad_.size()) grad_.resize(o.grad_.size(), 0.0);
      for (std::size_t i = 0; i < o.grad_.size(); ++i) grad_[i] -= q * inv * o.grad_[i];
    }
    value_ = q;
    return *this;
  }

  Dual operator-() const {
    Dual r(-value_, grad_);
    for (auto& g : r.grad_) g = -g;
    return r;
  }

  /// f(x) given f(value) and f'(value).
  Dual apply(double f, double df) const {
    Dual r(f, grad_);
    for (auto& g : r.grad_) g *= df;
    return r;
  }

 private:
  void scale(double s) {
    for (auto& g : grad_) g *= s;
  }
  void axpy(double a, const std::vector<double>& x) {
    if (x.empty() || a == 0.0) return;
    if (grad_.size() < x.size()) grad_.resize(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) grad_[i] += a * x[i];
  }

  double value_ = 0.0;
  std::vector<double> grad_;
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }

inline double value_of(double x) noexcept { return x; }
inline double value_of(const Dual& x) noexcept { return x.value(); }

inline double sigmoid(double t) noexcept {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}
inline Dual sigmoid(const Dual& t) {
  const double s = sigmoid(t.value());
  return t.apply(s, s * (1.0 - s));
}

inline Dual exp(const Dual& x) {
  const double e = std::exp(x.value());
  return x.apply(e, e);
}
inline Dual tanh(const Dual& x) {
  const double th = std::tanh(x.value());
  return x.apply(th, 1.0 - th * th);
}
inline Dual sqrt(const Dual& x) {
  const double s = std::sqrt(x.value());
  return x.apply(s, s > 0.0 ? 0.5 / s : 0.0);
}

/// Branch selection by value; the derivative follows the selected branch.
template <class T>
T max_of(const T& a, const T& b) {
  return value_of(a) >= value_of(b) ? a : b;
}
template <class T>
T min_of(const T& a, const T& b) {
  return value_of(a) <= value_of(b) ? a : b;
}

}  // namespace birkhoff::detail
