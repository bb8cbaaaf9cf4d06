#ifndef QMEM_TESTS_SUPPORT_HPP
#define QMEM_TESTS_SUPPORT_HPP

// Shared test oracles. Everything here is computed independently of the
// library code paths it checks: closed forms, brute-force contractions, and
// quadrature rules only.

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include "qmem/fock.hpp"

namespace oracle {

using qmem::CMatrix;
using qmem::Complex;
using qmem::CVector;

/// <m|D(alpha)|n> from the normally ordered factorization
/// D = e^{-|a|^2/2} e^{alpha a^dag} e^{-conj(alpha) a}, summed in closed form.
/// Exact for every (m, n); no truncation enters.
inline Complex displacement_element(int m, int n, Complex alpha) {
  const double a2 = std::norm(alpha);
  Complex sum = 0.0;
  for (int k = 0; k <= n; ++k) {
    const int up = m - n + k;  // photons added by the creation factor
    if (up < 0) continue;
    const double logmag = 0.5 * (std::lgamma(m + 1.0) + std::lgamma(n + 1.0)) -
                          std::lgamma(k + 1.0) - std::lgamma(up + 1.0) - std::lgamma(n - k + 1.0);
    sum += std::pow(alpha, up) * std::pow(-std::conj(alpha), k) * std::exp(logmag);
  }
  return std::exp(-a2 / 2.0) * sum;
}

/// Coherent-state amplitudes e^{-|a|^2/2} alpha^n / sqrt(n!).
inline CVector coherent_amplitudes(Complex alpha, int dim) {
  CVector v(dim);
  for (int n = 0; n < dim; ++n) {
    v(n) = std::exp(-std::norm(alpha) / 2.0) * std::pow(alpha, n) *
           std::exp(-0.5 * std::lgamma(n + 1.0));
  }
  return v;
}

/// Closed-form Wigner function of a state supported on the 0/1 block:
/// W = (1/pi) e^{-r^2} [rho00 + rho11 (2r^2 - 1) + 2 sqrt(2)(Re rho01 x + Im rho01 p)].
inline double wigner_01_block(double rho00, double rho11, Complex rho01, double x, double p) {
  const double r2 = x * x + p * p;
  return std::exp(-r2) / M_PI *
         (rho00 + rho11 * (2.0 * r2 - 1.0) +
          2.0 * std::sqrt(2.0) * (rho01.real() * x + rho01.imag() * p));
}

/// Composite Simpson rule on [a, b] with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) {
    sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

/// Random valid density matrix rho = A A^dag / Tr, seeded.
inline qmem::DensityMatrix random_density_matrix(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      a(i, j) = Complex(normal(rng), normal(rng));
    }
  }
  CMatrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  rho = ((rho + rho.adjoint()) / 2.0).eval();
  return qmem::DensityMatrix::from_matrix(std::move(rho));
}

inline double sample_mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sample_variance(const std::vector<double>& xs) {
  const double mean = sample_mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - mean) * (x - mean);
  return s / (static_cast<double>(xs.size()) - 1.0);
}

/// Kolmogorov-Smirnov statistic of samples against an analytic CDF.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const auto n = static_cast<double>(xs.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double c = cdf(xs[i]);
    worst = std::max(worst, std::abs(c - static_cast<double>(i) / n));
    worst = std::max(worst, std::abs(static_cast<double>(i + 1) / n - c));
  }
  return worst;
}

}  // namespace oracle

#endif  // QMEM_TESTS_SUPPORT_HPP
