#ifndef QMEM_ANALYSIS_HPP
#define QMEM_ANALYSIS_HPP

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qmem/fock.hpp"

namespace qmem {

namespace detail {

/// W(0,0) = (1/pi) sum_n (-1)^n rho_nn — the even/odd photon-number
/// difference. Exact at the origin, no displacement involved.
inline double wigner_origin_raw(const CMatrix& rho) {
  double s = 0.0;
  for (int n = 0; n < rho.rows(); ++n) {
    s += (n % 2 == 0 ? 1.0 : -1.0) * rho(n, n).real();
  }
  return s / M_PI;
}

/// xi(n) = (1/pi) exp(-2 n (n+1)): the smallest Wigner origin value a pure
/// Gaussian state of mean photon number n can have.
inline double gaussian_origin_bound(double mean_n) {
  return std::exp(-2.0 * mean_n * (mean_n + 1.0)) / M_PI;
}

}  // namespace detail

/// Displaced-parity Wigner value
///   W(x,p) = (1/pi) sum_n (-1)^n <n| D(alpha)^dag rho D(alpha) |n>,
/// alpha = (x+ip)/sqrt(2). The state is evaluated at an internal working
/// dimension N >= |alpha|^2 + 6|alpha| + 12 so the displaced support stays
/// well inside the truncation; the rule is validated by the closed-form and
/// marginal-consistency tests, which hold to better than 1e-10 out to radius 5.
inline double wigner_at(const DensityMatrix& rho, PhaseSpacePoint pt) {
  if (!std::isfinite(pt.x) || !std::isfinite(pt.p)) {
    throw InvalidStateError("phase-space point must be finite");
  }
  const Complex alpha = Complex(pt.x, pt.p) / std::sqrt(2.0);
  const double r = std::abs(alpha);
  constexpr int kMaxWorkingDim = 192;
  const int needed = static_cast<int>(std::ceil(r * r + 6.0 * r + 12.0));
  const int nw = std::max(rho.dim(), needed);
  if (nw > kMaxWorkingDim) {
    throw TruncationError("phase-space point at radius " + std::to_string(std::hypot(pt.x, pt.p)) +
                          " lies outside the truncation-safe region");
  }
  if (r == 0.0) return detail::wigner_origin_raw(rho.matrix());

  const Operator disp = displacement_operator(alpha, FockDim(nw), 1.0);
  const int d = rho.dim();
  // p_n = v_n^dag rho v_n with v_n the first d entries of column n of D.
  const CMatrix top = disp.topRows(d);
  const CMatrix prod = rho.matrix() * top;
  double s = 0.0;
  for (int n = 0; n < nw; ++n) {
    const double p_n = top.col(n).dot(prod.col(n)).real();
    s += (n % 2 == 0 ? p_n : -p_n);
  }
  return s / M_PI;
}

/// Rectangular phase-space grid of Wigner values. Row i holds the p-line
/// p = p_min + i*step; column j the x value x_min + j*step. `integral` is the
/// normalization check sum(W)*step^2.
struct WignerGrid {
  double x_min = 0.0, x_max = 0.0;
  double p_min = 0.0, p_max = 0.0;
  double step = 0.0;
  Eigen::MatrixXd values;
  double integral = 0.0;

  int nx() const { return static_cast<int>(values.cols()); }
  int np() const { return static_cast<int>(values.rows()); }
  double x_at(int j) const { return x_min + j * step; }
  double p_at(int i) const { return p_min + i * step; }
};

inline WignerGrid wigner_grid(const DensityMatrix& rho, double x_min, double x_max, double p_min,
                              double p_max, double step) {
  if (step <= 0.0 || x_max < x_min || p_max < p_min) {
    throw InvalidStateError("wigner_grid: malformed ranges");
  }
  const int nx = static_cast<int>(std::floor((x_max - x_min) / step + 1e-9)) + 1;
  const int np = static_cast<int>(std::floor((p_max - p_min) / step + 1e-9)) + 1;
  WignerGrid grid;
  grid.x_min = x_min;
  grid.p_min = p_min;
  grid.step = step;
  grid.x_max = x_min + (nx - 1) * step;
  grid.p_max = p_min + (np - 1) * step;
  grid.values.resize(np, nx);
  for (int i = 0; i < np; ++i) {
    for (int j = 0; j < nx; ++j) {
      grid.values(i, j) = wigner_at(rho, {grid.x_at(j), grid.p_at(i)});
    }
  }
  grid.integral = grid.values.sum() * step * step;
  return grid;
}

struct WignerMinimum {
  PhaseSpacePoint location;
  double value = 0.0;
  bool on_boundary = false;  // range too small: minimum sits on the grid edge
};

/// Grid argmin refined by a quadratic fit over the 3x3 neighborhood. Exact
/// ties break toward smaller radius, then smaller angle.
inline WignerMinimum find_wigner_minimum(const WignerGrid& grid) {
  if (grid.values.size() == 0) {
    throw InvalidStateError("find_wigner_minimum: empty grid");
  }
  int bi = 0, bj = 0;
  auto better = [&](int i, int j, int ci, int cj) {
    const double v = grid.values(i, j);
    const double c = grid.values(ci, cj);
    if (v != c) return v < c;
    const double rv = std::hypot(grid.x_at(j), grid.p_at(i));
    const double rc = std::hypot(grid.x_at(cj), grid.p_at(ci));
    if (rv != rc) return rv < rc;
    return std::atan2(grid.p_at(i), grid.x_at(j)) < std::atan2(grid.p_at(ci), grid.x_at(cj));
  };
  for (int i = 0; i < grid.np(); ++i) {
    for (int j = 0; j < grid.nx(); ++j) {
      if (better(i, j, bi, bj)) {
        bi = i;
        bj = j;
      }
    }
  }

  WignerMinimum result{{grid.x_at(bj), grid.p_at(bi)}, grid.values(bi, bj), false};
  if (bi == 0 || bj == 0 || bi == grid.np() - 1 || bj == grid.nx() - 1) {
    result.on_boundary = true;
    return result;
  }

  // Least-squares quadratic w = c0 + c1 u + c2 v + c3 u^2 + c4 uv + c5 v^2
  // over the 3x3 stencil (u,v in {-1,0,1}), then its stationary point.
  double s = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int dv = -1; dv <= 1; ++dv) {
    for (int du = -1; du <= 1; ++du) {
      const double f = grid.values(bi + dv, bj + du);
      s += f;
      sx += du * f;
      sy += dv * f;
      sxx += du * du * f;
      syy += dv * dv * f;
      sxy += du * dv * f;
    }
  }
  const double c0 = 5.0 * s / 9.0 - (sxx + syy) / 3.0;
  const double c1 = sx / 6.0;
  const double c2 = sy / 6.0;
  const double c3 = sxx / 2.0 - s / 3.0;
  const double c4 = sxy / 4.0;
  const double c5 = syy / 2.0 - s / 3.0;
  const double det = 4.0 * c3 * c5 - c4 * c4;
  if (det > 0.0 && c3 > 0.0) {
    const double u = (-2.0 * c5 * c1 + c4 * c2) / det;
    const double v = (c4 * c1 - 2.0 * c3 * c2) / det;
    if (std::abs(u) <= 1.0 && std::abs(v) <= 1.0) {
      result.location = {grid.x_at(bj) + u * grid.step, grid.p_at(bi) + v * grid.step};
      result.value = c0 + c1 * u + c2 * v + c3 * u * u + c4 * u * v + c5 * v * v;
    }
  }
  return result;
}

/// Quantum non-Gaussianity witness
///   Delta = W(0,0) - (1/pi) exp(-2 nbar (nbar+1)).
/// Nonnegative for every statistical mixture of Gaussian states, so Delta < 0
/// certifies quantum non-Gaussianity.
inline double nongaussianity_delta(const DensityMatrix& rho) {
  return wigner_at(rho, {0.0, 0.0}) - detail::gaussian_origin_bound(mean_photon_number(rho));
}

struct WitnessPoint {
  double gamma = 0.0;     // displacement magnitude
  double zeta_opt = 0.0;  // squeezing degree minimizing the mean photon number
  double phi = 0.0;       // dip direction in phase space
  double delta = 0.0;     // witness value of the Gaussian-corrected state
};

struct WitnessOptions {
  double zeta_min = -1.5;
  double zeta_max = 1.5;
  double zeta_tol = 1e-5;          // golden-section bracket tolerance
  double dip_search_radius = 2.0;  // half-range of the internal dip grid
  double dip_search_step = 0.05;
  int working_dim = 0;             // 0: max(state dim, 24, (gamma_max/0.25)^2)
};

struct WitnessCurve {
  std::vector<WitnessPoint> points;
  double phi = 0.0;
  bool phi_defaulted = false;  // rotation-symmetric state: dip direction undefined
};

namespace detail {

/// Golden-section minimizer, deterministic and derivative-free.
template <typename F>
double golden_section_minimize(F f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return (f1 < f2) ? x1 : x2;
}

}  // namespace detail

/// Gaussian-corrected witness scan: for each gamma, displace the state so the
/// Wigner dip lands on the origin, squeeze along the dip axis with the degree
/// zeta that minimizes the mean photon number, and record Delta of the result.
///
/// phi is the dip direction found on an internal grid; the applied
/// displacement amplitude is -gamma e^{i phi} (equivalently gamma e^{i(phi+pi)}),
/// which moves the dip onto the origin where the witness looks. The squeezing
/// axis e^{2i phi} is parallel to the displacement line either way.
inline WitnessCurve corrected_delta_curve(const DensityMatrix& rho,
                                          const std::vector<double>& gammas,
                                          const WitnessOptions& opts = {}) {
  double gamma_max = 0.0;
  for (const double g : gammas) {
    if (g < 0.0) throw InvalidStateError("corrected_delta_curve: gamma must be >= 0");
    gamma_max = std::max(gamma_max, g);
  }

  const double r = opts.dip_search_radius;
  const WignerGrid dip_grid = wigner_grid(rho, -r, r, -r, r, opts.dip_search_step);
  const WignerMinimum dip = find_wigner_minimum(dip_grid);

  WitnessCurve curve;
  if (std::hypot(dip.location.x, dip.location.p) < opts.dip_search_step) {
    curve.phi = 0.0;
    curve.phi_defaulted = true;
  } else {
    curve.phi = std::atan2(dip.location.p, dip.location.x);
  }

  int nw = opts.working_dim;
  if (nw == 0) {
    nw = std::max({rho.dim(), 24,
                   static_cast<int>(std::ceil((gamma_max / 0.25) * (gamma_max / 0.25)))});
  }
  const CMatrix state = rho.embedded(FockDim(nw)).matrix();
  const Complex squeeze_axis = std::exp(Complex(0.0, 2.0 * curve.phi));

  for (const double gamma : gammas) {
    const Operator disp =
        displacement_operator(-gamma * std::exp(Complex(0.0, curve.phi)), FockDim(nw));
    const CMatrix displaced = disp * state * disp.adjoint();
    auto mean_n_squeezed = [&](double zeta) {
      const Operator sq = squeezing_operator(zeta * squeeze_axis, FockDim(nw));
      return detail::mean_photon_number_raw(sq * displaced * sq.adjoint());
    };
    const double zeta_opt = detail::golden_section_minimize(mean_n_squeezed, opts.zeta_min,
                                                            opts.zeta_max, opts.zeta_tol);
    const Operator sq = squeezing_operator(zeta_opt * squeeze_axis, FockDim(nw));
    const CMatrix corrected = sq * displaced * sq.adjoint();
    const double delta = detail::wigner_origin_raw(corrected) -
                         detail::gaussian_origin_bound(detail::mean_photon_number_raw(corrected));
    curve.points.push_back({gamma, zeta_opt, curve.phi, delta});
  }
  return curve;
}

struct QubitSubspace {
  DensityMatrix block;       // renormalized 0/1 block as a dim-2 state
  double discarded_weight;   // multiphoton weight removed by the restriction
};

/// Top-left 2x2 block renormalized to trace one.
inline QubitSubspace qubit_subspace(const DensityMatrix& rho) {
  const double weight = rho.element(0, 0).real() + rho.element(1, 1).real();
  if (weight < 0.5) {
    throw UnreliableSubspaceError("0/1 block carries weight " + std::to_string(weight) +
                                  " < 0.5; qubit restriction unreliable");
  }
  CMatrix block = rho.matrix().topLeftCorner(2, 2) / weight;
  block = ((block + block.adjoint()) / 2.0).eval();
  return QubitSubspace{DensityMatrix::from_matrix(std::move(block)), 1.0 - weight};
}

struct DecompositionResult {
  double loss = 0.0;          // inferred L
  double sigma = 0.0;         // inferred phase-fluctuation std, radians
  double renorm_weight = 0.0; // 0/1-block weight before renormalization
  bool loss_clamped = false;
  bool over_coherent = false; // |rho_01| exceeds what (L, sigma=0) allows
  bool sigma_infinite = false;
};

/// Loss/dephasing decomposition of a measured state against the assumed ideal
/// alpha|0> + beta e^{i theta}|1>:
///   1 - L = rho_11 / beta^2,
///   exp(-sigma^2/2) = |rho_01| / (alpha beta sqrt(1-L)),
/// evaluated on the renormalized 0/1 block.
inline DecompositionResult estimate_loss_dephasing(const DensityMatrix& rho, double alpha,
                                                   double beta) {
  if (beta <= 0.0) {
    throw UndefinedLossError("beta = 0: no single-photon reference to infer loss from");
  }
  if (alpha <= 0.0 || std::abs(alpha * alpha + beta * beta - 1.0) > 1e-9) {
    throw InvalidStateError("estimate_loss_dephasing: require alpha, beta > 0 with "
                            "alpha^2 + beta^2 = 1");
  }
  const QubitSubspace sub = qubit_subspace(rho);
  DecompositionResult out;
  out.renorm_weight = 1.0 - sub.discarded_weight;

  const double rho11 = sub.block.element(1, 1).real();
  double loss = 1.0 - rho11 / (beta * beta);
  if (loss < 0.0 || loss > 1.0) {
    out.loss_clamped = true;
    loss = std::clamp(loss, 0.0, 1.0);
  }
  out.loss = loss;

  const double coherence = std::abs(sub.block.element(0, 1));
  if (coherence == 0.0) {
    out.sigma = std::numeric_limits<double>::infinity();
    out.sigma_infinite = true;
    return out;
  }
  const double denom = alpha * beta * std::sqrt(1.0 - loss);
  const double ratio = denom > 0.0 ? coherence / denom : std::numeric_limits<double>::infinity();
  if (ratio > 1.0) {
    out.sigma = 0.0;
    out.over_coherent = true;
  } else {
    out.sigma = std::sqrt(-2.0 * std::log(ratio));
  }
  return out;
}

}  // namespace qmem

#endif  // QMEM_ANALYSIS_HPP
