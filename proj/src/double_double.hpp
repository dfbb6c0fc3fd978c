#pragma once

// Unevaluated sum hi + lo of two doubles (about 32 significant digits).
// Used for the budget bookkeeping of the sweep so that every stored entry is
// the correctly rounded value of the chart.

#include <cmath>
#include <tuple>
#include <utility>

namespace birkhoff::detail {

class DoubleDouble {
 public:
  DoubleDouble() = default;
  DoubleDouble(double v) : hi_(v) {}  // NOLINT: implicit lift of constants
  DoubleDouble(double hi, double lo) : hi_(hi), lo_(lo) {}

  double value() const noexcept { return hi_ + lo_; }
  double hi() const noexcept { return hi_; }
  double lo() const noexcept { return lo_; }

  DoubleDouble& operator+=(const DoubleDouble& o) {
    auto [s, e] = two_sum(hi_, o.hi_);
    auto [t, f] = two_sum(lo_, o.lo_);
    e += t;
    std::tie(s, e) = quick_two_sum(s, e);
    e += f;
    std::tie(hi_, lo_) = quick_two_sum(s, e);
    return *this;
  }
  DoubleDouble& operator-=(const DoubleDouble& o) { return *this += -o; }
  DoubleDouble& operator*=(const DoubleDouble& o) {
    double p = hi_ * o.hi_;
    double e = std::fma(hi_, o.hi_, -p);
    e += hi_ * o.lo_ + lo_ * o.hi_;
    std::tie(hi_, lo_) = quick_two_sum(p, e);
    return *this;
  }
  DoubleDouble& operator/=(const DoubleDouble& o) {
    const double q1 = hi_ / o.hi_;
    DoubleDouble r = *this;
    r -= o * DoubleDouble(q1);
    const double q2 = r.hi_ / o.hi_;
    std::tie(hi_, lo_) = quick_two_sum(q1, q2);
    return *this;
  }
  DoubleDouble operator-() const { return {-hi_, -lo_}; }

  friend DoubleDouble operator+(DoubleDouble a, const DoubleDouble& b) { return a += b; }
  friend DoubleDouble operator-(DoubleDouble a, const DoubleDouble& b) { return a -= b; }
  friend DoubleDouble operator*(DoubleDouble a, const DoubleDouble& b) { return a *= b; }
  friend DoubleDouble operator/(DoubleDouble a, const DoubleDouble& b) { return a /= b; }

 private:
  static std::pair<double, double> two_sum(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    return {s, (a - (s - bb)) + (b - bb)};
  }
  static std::pair<double, double> quick_two_sum(double a, double b) {
    const double s = a + b;
    return {s, b - (s - a)};
  }

  double hi_ = 0.0;
  double lo_ = 0.0;
};

inline double value_of(const DoubleDouble& x) noexcept { return x.value(); }

/// σ is evaluated in double precision; relative accuracy is all the chart
/// needs from it.
inline DoubleDouble sigmoid(const DoubleDouble& t) {
  const double v = t.value();
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace birkhoff::detail
