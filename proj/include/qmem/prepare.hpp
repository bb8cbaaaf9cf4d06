#ifndef QMEM_PREPARE_HPP
#define QMEM_PREPARE_HPP

#include <cmath>
#include <string>

#include "qmem/fock.hpp"

namespace qmem {

/// What the heralding detector is taken to project onto. A real APD is a
/// threshold detector (NotVacuum); at weak pump the two models coincide to
/// O(lambda^2).
enum class ClickModel { ExactOnePhoton, NotVacuum };

struct PreparationParams {
  double lambda = 0.1;                         // tanh(gamma) of the two-mode squeezed vacuum
  Complex idler_displacement{0.0, 0.0};        // displacement-beam amplitude delta
  ClickModel click_model = ClickModel::ExactOnePhoton;
  double eta = 1.0;                            // true-click fraction
};

/// Amplitude tensor c_{mn} of the two-mode squeezed vacuum at truncation dim:
/// c_{nn} = sqrt(1-lambda^2) lambda^n, zero off the diagonal.
inline CMatrix two_mode_squeezed_vacuum(double lambda, FockDim dim) {
  if (lambda < 0.0 || lambda >= 1.0) {
    throw NonNormalizableError("two-mode squeezed vacuum requires 0 <= lambda < 1, got " +
                               std::to_string(lambda));
  }
  const int d = dim.value();
  CMatrix c = CMatrix::Zero(d, d);
  const double head = std::sqrt(1.0 - lambda * lambda);
  double amp = head;
  for (int n = 0; n < d; ++n) {
    c(n, n) = amp;
    amp *= lambda;
  }
  return c;
}

struct HeraldOutcome {
  DensityMatrix state;
  double click_probability = 0.0;
};

/// Heralded signal state: displace the idler by delta, condition on a click,
/// trace out the idler, then mix in vacuum for fake clicks:
///   rho ~ Tr_i[(I x Pi_click)(I x D(delta)) |Psi><Psi| (I x D(delta))^dag],
///   then eta*rho + (1-eta)|0><0|.
///
/// Phase convention (pinned by the contraction oracle in the tests): the
/// heralded superposition is alpha|0> + beta e^{i theta}|1> with
/// theta = -arg(delta); rotating arg(delta) by -90 degrees multiplies rho_01
/// by -i and leaves the diagonal unchanged.
inline HeraldOutcome herald_superposition(const PreparationParams& params, FockDim dim) {
  if (params.eta < 0.0 || params.eta > 1.0) {
    throw InvalidStateError("eta must lie in [0,1], got " + std::to_string(params.eta));
  }
  const int d = dim.value();
  const CMatrix tmsv = two_mode_squeezed_vacuum(params.lambda, dim);
  const CMatrix disp = displacement_operator(params.idler_displacement, dim);

  // psi(n, k) = c_n <k|D(delta)|n>: joint amplitude of |n>_signal |k>_idler.
  CMatrix psi(d, d);
  for (int n = 0; n < d; ++n) psi.row(n) = tmsv(n, n) * disp.col(n).transpose();

  CMatrix signal = CMatrix::Zero(d, d);
  double p_click = 0.0;
  if (params.click_model == ClickModel::ExactOnePhoton) {
    const CVector phi = psi.col(1);
    p_click = phi.squaredNorm();
    signal = phi * phi.adjoint();
  } else {
    for (int k = 1; k < d; ++k) {
      const CVector phi = psi.col(k);
      p_click += phi.squaredNorm();
      signal += phi * phi.adjoint();
    }
  }
  if (p_click < 1e-300) {
    throw DegenerateHeraldError("click probability vanishes; no heralded state exists");
  }
  signal /= p_click;
  signal = ((signal + signal.adjoint()) / 2.0).eval();

  signal *= params.eta;
  signal(0, 0) += 1.0 - params.eta;
  return HeraldOutcome{DensityMatrix::from_matrix(std::move(signal)), p_click};
}

/// Pure alpha|0> + beta e^{i theta}|1> embedded at the requested dim.
inline DensityMatrix ideal_superposition(double alpha, double beta, double theta, FockDim dim) {
  if (alpha < 0.0 || beta < 0.0) {
    throw InvalidStateError("ideal superposition requires alpha, beta >= 0");
  }
  const double norm2 = alpha * alpha + beta * beta;
  if (std::abs(norm2 - 1.0) > 1e-9) {
    throw InvalidStateError("ideal superposition not normalized: alpha^2+beta^2 = " +
                            std::to_string(norm2));
  }
  CVector v = CVector::Zero(dim.value());
  v(0) = alpha;
  v(1) = beta * std::exp(Complex(0.0, theta));
  return DensityMatrix::from_pure(v);
}

/// eta*rho + (1-eta)|0><0|  (fake clicks herald exact vacuum).
inline DensityMatrix admix_fake_clicks(const DensityMatrix& rho, double eta) {
  if (eta < 0.0 || eta > 1.0) {
    throw InvalidStateError("eta must lie in [0,1], got " + std::to_string(eta));
  }
  CMatrix m = eta * rho.matrix();
  m(0, 0) += 1.0 - eta;
  return DensityMatrix::from_matrix(std::move(m));
}

}  // namespace qmem

#endif  // QMEM_PREPARE_HPP
