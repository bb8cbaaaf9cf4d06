#ifndef QMEM_CHANNEL_HPP
#define QMEM_CHANNEL_HPP

#include <chrono>
#include <cmath>
#include <string>

#include "qmem/fock.hpp"

namespace qmem {

/// Durations carry double seconds; std::chrono literals (1300ns, 1.3us, ...)
/// convert implicitly.
using Duration = std::chrono::duration<double>;

struct MemoryParams {
  Duration half_life{1.3e-6};     // photon-survival half-life
  double detuning_hz = 300e3;     // memory-LO frequency offset
  double dephasing_sigma = 0.0;   // Gaussian phase-noise std, radians
  double eta = 1.0;               // true-click fraction, carried for reporting
};

/// L(t) = 1 - 2^(-t/half_life).
inline double loss_from_storage(Duration t, Duration half_life) {
  if (t.count() < 0.0) {
    throw InvalidStateError("storage time must be nonnegative");
  }
  if (half_life.count() <= 0.0) {
    throw InvalidStateError("half-life must be positive");
  }
  return 1.0 - std::exp2(-t.count() / half_life.count());
}

namespace detail {

inline double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace detail

/// Photon-loss channel sum_k K_k rho K_k^dag with
/// K_k = sum_n sqrt(C(n,k) (1-L)^{n-k} L^k) |n-k><n|. Trace preserving; on the
/// 0/1 block it reduces to rho_11 -> (1-L) rho_11, rho_01 -> sqrt(1-L) rho_01,
/// rho_00 -> rho_00 + L rho_11.
inline DensityMatrix amplitude_damping(const DensityMatrix& rho, double loss) {
  if (loss < 0.0 || loss > 1.0) {
    throw InvalidStateError("loss must lie in [0,1], got " + std::to_string(loss));
  }
  if (loss == 0.0) return rho;
  const int d = rho.dim();
  CMatrix out = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    Eigen::VectorXd kraus = Eigen::VectorXd::Zero(d);  // kraus(n) = <n-k|K_k|n>
    for (int n = k; n < d; ++n) {
      double logw = detail::log_binomial(n, k);
      if (n - k > 0) {
        if (loss == 1.0) continue;
        logw += (n - k) * std::log1p(-loss);
      }
      if (k > 0) logw += k * std::log(loss);
      kraus(n) = std::exp(0.5 * logw);
    }
    // K_k rho K_k^dag contributes kraus(m+k) conj-sym products on the shifted block.
    for (int m = 0; m + k < d; ++m) {
      for (int n = 0; n + k < d; ++n) {
        out(m, n) += kraus(m + k) * kraus(n + k) * rho.element(m + k, n + k);
      }
    }
  }
  out = ((out + out.adjoint()) / 2.0).eval();
  return DensityMatrix::from_matrix(std::move(out));
}

/// rho_mn -> rho_mn exp(-i 2 pi f t (m-n)). Project-wide sign convention:
/// positive detuning advances arg(rho_01) by +2 pi f t, i.e. the Wigner
/// distribution rotates clockwise (standard evolution under H = +2 pi f n̂).
inline DensityMatrix detuning_rotation(const DensityMatrix& rho, double detuning_hz, Duration t) {
  if (t.count() < 0.0) {
    throw InvalidStateError("storage time must be nonnegative");
  }
  const int d = rho.dim();
  const double angle = 2.0 * M_PI * detuning_hz * t.count();
  CMatrix out(d, d);
  for (int m = 0; m < d; ++m) {
    for (int n = 0; n < d; ++n) {
      out(m, n) = rho.element(m, n) * std::exp(Complex(0.0, -angle * (m - n)));
    }
  }
  return DensityMatrix::from_matrix(std::move(out));
}

/// Gaussian phase noise with std sigma: rho_mn -> rho_mn exp(-sigma^2 (m-n)^2 / 2).
/// The (m-n)=1 factor is the Gaussian average of e^{i theta}; higher
/// coherences follow from averaging e^{i theta (m-n)} over the same Gaussian.
inline DensityMatrix gaussian_dephasing(const DensityMatrix& rho, double sigma) {
  if (sigma < 0.0) {
    throw InvalidStateError("dephasing sigma must be nonnegative, got " + std::to_string(sigma));
  }
  const int d = rho.dim();
  CMatrix out(d, d);
  for (int m = 0; m < d; ++m) {
    for (int n = 0; n < d; ++n) {
      const double k = static_cast<double>(m - n);
      out(m, n) = rho.element(m, n) * std::exp(-sigma * sigma * k * k / 2.0);
    }
  }
  return DensityMatrix::from_matrix(std::move(out));
}

/// Full storage channel: dephasing ∘ detuning rotation ∘ amplitude damping
/// with L = loss_from_storage(t). The three maps commute on the 0/1 block, so
/// the order only matters for multiphoton components; this one is fixed
/// project-wide.
inline DensityMatrix store(const DensityMatrix& rho, const MemoryParams& params, Duration t) {
  const double loss = loss_from_storage(t, params.half_life);
  DensityMatrix out = amplitude_damping(rho, loss);
  out = detuning_rotation(out, params.detuning_hz, t);
  return gaussian_dephasing(out, params.dephasing_sigma);
}

}  // namespace qmem

#endif  // QMEM_CHANNEL_HPP
