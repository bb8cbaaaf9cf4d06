#ifndef QMEM_FOCK_HPP
#define QMEM_FOCK_HPP

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "qmem/errors.hpp"

namespace qmem {

// Project-wide conventions, used consistently by every module:
//   x = (a + a^dag)/sqrt(2),  p = (a - a^dag)/(i sqrt(2)),  hbar = 1,
//   vacuum quadrature variance 1/2, vacuum Wigner value W(0,0) = 1/pi.

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Operator = CMatrix;

/// Number of Fock levels retained; basis |0> .. |dim-1>. All matrices in a
/// computation share one dim.
class FockDim {
 public:
  explicit FockDim(int n) : n_(n) {
    if (n < 2) {
      throw InvalidDimensionError("Fock dimension must be at least 2, got " + std::to_string(n));
    }
  }
  int value() const noexcept { return n_; }

 private:
  int n_;
};

struct PhaseSpacePoint {
  double x = 0.0;
  double p = 0.0;
};

namespace detail {

inline void require_square(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 2) {
    throw InvalidDimensionError(std::string(what) + ": matrix must be square with dim >= 2");
  }
}

inline double mean_photon_number_raw(const CMatrix& rho) {
  double total = 0.0;
  for (int n = 0; n < rho.rows(); ++n) total += n * rho(n, n).real();
  return total;
}

/// Hermitian square root with tiny negative eigenvalues clipped to zero.
inline CMatrix psd_sqrt(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

/// Truncated Fock-basis density matrix: Hermitian, trace one, positive
/// semidefinite. Construction validates all three invariants; instances are
/// immutable, so downstream code can rely on them without re-checking.
class DensityMatrix {
 public:
  static constexpr double kHermitianTol = 1e-12;
  static constexpr double kTraceTol = 1e-12;
  static constexpr double kEigenvalueFloor = -1e-10;

  static DensityMatrix from_matrix(CMatrix m) {
    detail::require_square(m, "DensityMatrix");
    const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (herm > kHermitianTol) {
      throw InvalidStateError("density matrix not Hermitian (deviation " + std::to_string(herm) + ")");
    }
    const double tr = m.trace().real();
    if (std::abs(tr - 1.0) > kTraceTol) {
      throw InvalidStateError("density matrix trace differs from 1 by " + std::to_string(tr - 1.0));
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < kEigenvalueFloor) {
      throw InvalidStateError("density matrix has negative eigenvalue " + std::to_string(lmin));
    }
    return DensityMatrix(std::move(m));
  }

  /// Pure state from an amplitude vector; the vector is normalized, so small
  /// rounding in the caller's amplitudes is absorbed here.
  static DensityMatrix from_pure(const CVector& amplitudes) {
    if (amplitudes.size() < 2) {
      throw InvalidDimensionError("pure state needs dim >= 2");
    }
    const double norm = amplitudes.norm();
    if (norm < 1e-12) {
      throw InvalidStateError("pure-state amplitudes have zero norm");
    }
    CVector v = amplitudes / norm;
    return DensityMatrix(v * v.adjoint());
  }

  static DensityMatrix vacuum(FockDim dim) { return fock_state(0, dim); }

  static DensityMatrix fock_state(int n, FockDim dim) {
    if (n < 0 || n >= dim.value()) {
      throw InvalidDimensionError("Fock level " + std::to_string(n) + " outside dim " +
                                  std::to_string(dim.value()));
    }
    CMatrix m = CMatrix::Zero(dim.value(), dim.value());
    m(n, n) = 1.0;
    return DensityMatrix(std::move(m));
  }

  int dim() const noexcept { return static_cast<int>(rho_.rows()); }
  const CMatrix& matrix() const noexcept { return rho_; }
  Complex element(int m, int n) const { return rho_(m, n); }

  /// Zero-padded copy at a larger dimension (same state, bigger basis).
  DensityMatrix embedded(FockDim bigger) const {
    if (bigger.value() < dim()) {
      throw DimensionMismatchError("embedded() target dim smaller than current dim");
    }
    if (bigger.value() == dim()) return *this;
    CMatrix m = CMatrix::Zero(bigger.value(), bigger.value());
    m.topLeftCorner(dim(), dim()) = rho_;
    return DensityMatrix(std::move(m));
  }

 private:
  explicit DensityMatrix(CMatrix m) : rho_(std::move(m)) {}
  CMatrix rho_;
};

/// <n-1| a |n> = sqrt(n).
inline Operator annihilation_operator(FockDim dim) {
  const int d = dim.value();
  CMatrix a = CMatrix::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

inline Operator number_operator(FockDim dim) {
  const int d = dim.value();
  CMatrix n = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

/// Phase-space rotation exp(-i theta n̂), diagonal in the Fock basis.
inline Operator number_rotation(double theta, FockDim dim) {
  const int d = dim.value();
  CMatrix r = CMatrix::Zero(d, d);
  for (int n = 0; n < d; ++n) r(n, n) = std::exp(Complex(0.0, -theta * n));
  return r;
}

/// x̂_theta = (a e^{-i theta} + a^dag e^{i theta})/sqrt(2).
inline Operator quadrature_operator(FockDim dim, double theta = 0.0) {
  const CMatrix a = annihilation_operator(dim);
  const Complex ph = std::exp(Complex(0.0, -theta));
  return (ph * a + std::conj(ph) * a.adjoint()) / std::sqrt(2.0);
}

/// D(alpha) = exp(alpha a^dag - conj(alpha) a), by scaling-and-squaring on the
/// truncated generator. The guard |alpha| <= guard_ratio*sqrt(dim) rejects
/// amplitudes whose displaced support would spill past the truncation; callers
/// that pick the working dimension themselves (e.g. the Wigner evaluator) may
/// relax it.
inline Operator displacement_operator(Complex amplitude, FockDim dim, double guard_ratio = 0.25) {
  const double mag = std::abs(amplitude);
  if (mag > guard_ratio * std::sqrt(static_cast<double>(dim.value()))) {
    throw TruncationError("displacement amplitude " + std::to_string(mag) + " exceeds " +
                          std::to_string(guard_ratio) + "*sqrt(dim) at dim " +
                          std::to_string(dim.value()));
  }
  const CMatrix a = annihilation_operator(dim);
  const CMatrix gen = amplitude * a.adjoint() - std::conj(amplitude) * a;
  return gen.exp();
}

/// S(z) = exp(z/2 a^dag a^dag - conj(z)/2 a a). With this generator, real
/// z > 0 stretches x: the x-variance of S(z)|0> is e^{+2z}/2 (pinned by the
/// quadrature-moment tests).
inline Operator squeezing_operator(Complex z, FockDim dim, double max_abs = 1.5, int min_dim = 20) {
  if (std::abs(z) > max_abs) {
    throw TruncationError("squeezing degree " + std::to_string(std::abs(z)) +
                          " exceeds guard " + std::to_string(max_abs));
  }
  if (std::abs(z) > 0.0 && dim.value() < min_dim) {
    throw TruncationError("squeezing requires dim >= " + std::to_string(min_dim) + ", got " +
                          std::to_string(dim.value()));
  }
  const CMatrix a = annihilation_operator(dim);
  const CMatrix ad = a.adjoint();
  const CMatrix gen = 0.5 * z * (ad * ad) - 0.5 * std::conj(z) * (a * a);
  return gen.exp();
}

/// Tr(rho n̂) = sum_n n rho_nn.
inline double mean_photon_number(const DensityMatrix& rho) {
  return detail::mean_photon_number_raw(rho.matrix());
}

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) {
    throw DimensionMismatchError("fidelity: dims " + std::to_string(rho.dim()) + " vs " +
                                 std::to_string(sigma.dim()));
  }
  const CMatrix root = detail::psd_sqrt(rho.matrix());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(root * sigma.matrix() * root, Eigen::EigenvaluesOnly);
  const double sum = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return sum * sum;
}

}  // namespace qmem

#endif  // QMEM_FOCK_HPP
