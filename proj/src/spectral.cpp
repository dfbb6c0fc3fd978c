#include "birkhoff/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace birkhoff {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxSweepsPerEigenvalue = 100;

void to_hessenberg(Matrix& a) {
  const std::size_t n = a.rows();
  Vector v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double norm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) norm += a(i, k) * a(i, k);
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    const double alpha = a(k + 1, k) > 0.0 ? -norm : norm;
    double vnorm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      v[i] = a(i, k) - (i == k + 1 ? alpha : 0.0);
      vnorm += v[i] * v[i];
    }
    if (vnorm == 0.0) continue;
    vnorm = std::sqrt(vnorm);
    for (std::size_t i = k + 1; i < n; ++i) v[i] /= vnorm;
    // A ← (I − 2vvᵀ) A
    for (std::size_t j = k; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) dot += v[i] * a(i, j);
      for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= 2.0 * v[i] * dot;
    }
    // A ← A (I − 2vvᵀ)
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) dot += a(i, j) * v[j];
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= 2.0 * dot * v[j];
    }
    for (std::size_t i = k + 2; i < n; ++i) a(i, k) = 0.0;
  }
}

double sign_of(double magnitude, double sign) { return sign >= 0.0 ? std::abs(magnitude) : -std::abs(magnitude); }

// Francis double-shift QR on an upper Hessenberg matrix (eigenvalues only).
std::vector<Complex> hessenberg_qr(Matrix& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<Complex> out(static_cast<std::size_t>(n));
  auto at = [&a](int i, int j) -> double& { return a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)); };

  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(at(i, j));

  int nn = n - 1;
  double shift = 0.0;
  while (nn >= 0) {
    int its = 0;
    int l = 0;
    do {
      // Look for a negligible subdiagonal element.
      for (l = nn; l >= 1; --l) {
        double s = std::abs(at(l - 1, l - 1)) + std::abs(at(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(at(l, l - 1)) <= kEps * s) {
          at(l, l - 1) = 0.0;
          break;
        }
      }
      double x = at(nn, nn);
      if (l == nn) {
        out[static_cast<std::size_t>(nn)] = {x + shift, 0.0};
        --nn;
      } else {
        double y = at(nn - 1, nn - 1);
        double w = at(nn, nn - 1) * at(nn - 1, nn);
        if (l == nn - 1) {
          const double p = 0.5 * (y - x);
          const double q = p * p + w;
          double z = std::sqrt(std::abs(q));
          x += shift;
          if (q >= 0.0) {
            z = p + sign_of(z, p);
            const double hi = x + z;
            const double lo = z != 0.0 ? x - w / z : hi;
            out[static_cast<std::size_t>(nn - 1)] = {hi, 0.0};
            out[static_cast<std::size_t>(nn)] = {lo, 0.0};
          } else {
            out[static_cast<std::size_t>(nn - 1)] = {x + p, -z};
            out[static_cast<std::size_t>(nn)] = {x + p, z};
          }
          nn -= 2;
        } else {
          if (its == kMaxSweepsPerEigenvalue) fail(ErrorKind::InvalidArgument, "QR iteration did not converge");
          if (its > 0 && its % 10 == 0) {
            // Exceptional shift.
            shift += x;
            for (int i = 0; i <= nn; ++i) at(i, i) -= x;
            const double s = std::abs(at(nn, nn - 1)) + std::abs(at(nn - 1, nn - 2));
            x = y = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
          for (; m >= l; --m) {
            z = at(m, m);
            r = x - z;
            double s = y - z;
            p = (r * s - w) / at(m + 1, m) + at(m, m + 1);
            q = at(m + 1, m + 1) - z - r - s;
            r = at(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(at(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v = std::abs(p) * (std::abs(at(m - 1, m - 1)) + std::abs(z) + std::abs(at(m + 1, m + 1)));
            if (u <= kEps * v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            at(i, i - 2) = 0.0;
            if (i != m + 2) at(i, i - 3) = 0.0;
          }
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = at(k, k - 1);
              q = at(k + 1, k - 1);
              r = 0.0;
              if (k != nn - 1) r = at(k + 2, k - 1);
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            const double s = sign_of(std::sqrt(p * p + q * q + r * r), p);
            if (s != 0.0) {
              if (k == m) {
                if (l != m) at(k, k - 1) = -at(k, k - 1);
              } else {
                at(k, k - 1) = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = at(k, j) + q * at(k + 1, j);
                if (k != nn - 1) {
                  p += r * at(k + 2, j);
                  at(k + 2, j) -= p * z;
                }
                at(k + 1, j) -= p * y;
                at(k, j) -= p * x;
              }
              const int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * at(i, k) + y * at(i, k + 1);
                if (k != nn - 1) {
                  p += z * at(i, k + 2);
                  at(i, k + 2) -= p * r;
                }
                at(i, k + 1) -= p * q;
                at(i, k) -= p;
              }
            }
          }
        }
      }
    } while (nn >= 0 && l < nn - 1);
  }
  return out;
}

}  // namespace

std::vector<Complex> eigenvalues(const Matrix& a) {
  if (!a.square()) fail(ErrorKind::DimensionMismatch, "eigenvalues need a square matrix");
  for (const double v : a.data())
    if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "matrix has non-finite entries");
  if (a.rows() == 0) return {};
  Matrix h = a;
  to_hessenberg(h);
  auto values = hessenberg_qr(h);
  sort_by_modulus(values);
  return values;
}

void sort_by_modulus(std::vector<Complex>& values) {
  std::sort(values.begin(), values.end(), [](const Complex& x, const Complex& y) {
    const double ax = std::abs(x), ay = std::abs(y);
    if (ax != ay) return ax > ay;
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
}

std::vector<Complex> nontrivial_eigenvalues(std::vector<Complex> values) {
  if (values.empty()) return values;
  auto perron = std::min_element(values.begin(), values.end(), [](const Complex& x, const Complex& y) {
    return std::abs(x - 1.0) < std::abs(y - 1.0);
  });
  values.erase(perron);
  return values;
}

SpectralReport analyze(const Matrix& h) {
  if (!h.square()) fail(ErrorKind::DimensionMismatch, "spectral analysis needs a square matrix");
  SpectralReport report;
  report.ds_deviation = ds_deviation(h).max();
  report.doubly_stochastic = report.ds_deviation <= 1e-10;
  bool nonnegative = true;
  report.is_ergodic = true;
  for (const double v : h.data()) {
    if (v < 0.0) nonnegative = false;
    if (!(v > 0.0)) report.is_ergodic = false;
  }
  if (!report.doubly_stochastic || !nonnegative) {
    report.warnings.push_back("input is not doubly stochastic within 1e-10 (deviation " +
                              std::to_string(report.ds_deviation) + ")");
  }
  report.is_symmetric = is_symmetric(h, 1e-10);
  report.eigenvalues = eigenvalues(h);
  for (const auto& z : report.eigenvalues) report.eigenvalue_moduli.push_back(std::abs(z));

  const auto rest = nontrivial_eigenvalues(report.eigenvalues);
  double top_modulus = 0.0;
  double top_real = -INFINITY;
  for (const auto& z : rest) {
    top_modulus = std::max(top_modulus, std::abs(z));
    top_real = std::max(top_real, z.real());
  }
  report.absolute_gap = 1.0 - top_modulus;
  if (report.is_symmetric) report.spectral_gap = rest.empty() ? 1.0 : 1.0 - top_real;
  return report;
}

ChainResult compose_chain(const std::vector<Matrix>& mixers) {
  if (mixers.empty()) fail(ErrorKind::InvalidArgument, "compose_chain needs at least one matrix");
  const std::size_t n = mixers.front().rows();
  ChainResult out;
  out.product = Matrix::identity(n);
  out.trace.reserve(mixers.size());
  for (std::size_t l = 0; l < mixers.size(); ++l) {
    const Matrix& h = mixers[l];
    if (!h.square() || h.rows() != n) fail(ErrorKind::DimensionMismatch, "all mixers must be n x n");
    out.product = multiply(out.product, h);
    const auto dev = ds_deviation(out.product);
    out.trace.push_back({l + 1, dev.row, dev.col});
  }
  return out;
}

}  // namespace birkhoff
