#pragma once

// Reference computations written without the library, used as test oracles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

using Dense = std::vector<std::vector<double>>;

// Cyclic Jacobi rotations on a symmetric matrix; eigenvalues sorted descending.
inline std::vector<double> jacobi_eigenvalues(Dense a, int sweeps = 100) {
  const std::size_t n = a.size();
  for (int s = 0; s < sweeps; ++s) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - sn * akq;
          a[k][q] = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - sn * aqk;
          a[q][k] = sn * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

inline long double alpha_sum(double mu, std::size_t k) {
  long double s = 0.0L;
  for (std::size_t t = 0; t < k; ++t) s += (4.0L / mu) / (t + 1.0L);
  return s;
}

struct Constants {
  double mu, L, C;
  double d, n;
  unsigned bits;
  double sigma2, v1;
};

// Gamma_k term by term in long double.
inline long double gamma(const Constants& c, long double asum, std::size_t k) {
  const long double mu = c.mu, L = c.L, g = 1.0L - c.sigma2, kk = k + 1.0L;
  const long double B = std::pow(2.0L, (long double)c.bits) - 1.0L;
  const long double q = (c.C * c.d / B) * (c.C * c.d / B);
  const long double t1 = 16.0L / (mu * mu * kk * kk);
  const long double t2 = 40.0L * L * L * (L + 8.0L * L * L / mu) / (mu * mu * mu * std::pow(kk, 1.5L));
  const long double t3 = (4.0L / (g * std::pow(kk, 1.5L)) +
                          320.0L * (L + 8.0L * L * L / mu) * c.n * c.n / (g * g * std::pow(kk, 1.75L))) *
                         q * asum * asum;
  return t1 + t2 + t3;
}

inline long double rate(const Constants& c, std::size_t T) {
  const long double mu = c.mu, L = c.L, g = 1.0L - c.sigma2, tt = T + 1.0L;
  const long double B = std::pow(2.0L, (long double)c.bits) - 1.0L;
  const long double q = (c.C * c.d / B) * (c.C * c.d / B);
  const long double lg = std::log((long double)T);
  return mu * c.v1 / (8.0L * tt * tt) + 2.0L / tt +
         16.0L / (3.0L * mu * g) * q * lg * lg / std::sqrt(tt) +
         4.0L * c.n * c.n * (L + 8.0L * L * L) / (g * g) * q * lg * lg / std::pow(tt, 0.75L) +
         8.0L * L * (L + 8.0L * L * L / mu) / (3.0L * mu * mu * mu) / std::sqrt(tt);
}

// Plain gradient descent x <- x - (4/mu)/(k+1) grad(x) from x0.
inline std::vector<std::vector<double>> gradient_descent(
    std::vector<double> x, double mu, std::size_t K,
    const std::function<std::vector<double>(const std::vector<double>&)>& grad) {
  std::vector<std::vector<double>> path{x};
  for (std::size_t k = 0; k < K; ++k) {
    const auto g = grad(x);
    const double a = (4.0 / mu) / static_cast<double>(k + 1);
    for (std::size_t j = 0; j < x.size(); ++j) x[j] -= a * g[j];
    path.push_back(x);
  }
  return path;
}

}  // namespace oracle
