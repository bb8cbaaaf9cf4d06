#ifndef QMEM_HOMODYNE_HPP
#define QMEM_HOMODYNE_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qmem/fock.hpp"
#include "qmem/rng.hpp"

namespace qmem {

/// One homodyne record: LO phase and measured quadrature value.
struct QuadratureSample {
  double theta = 0.0;  // radians, in [0, 2pi)
  double x = 0.0;
};

inline double wrap_phase(double theta) {
  const double two_pi = 2.0 * M_PI;
  double w = std::fmod(theta, two_pi);
  if (w < 0.0) w += two_pi;
  return w;
}

/// Harmonic-oscillator eigenfunctions psi_n(x) = H_n(x) e^{-x^2/2} /
/// (pi^{1/4} sqrt(2^n n!)) for n < dim, by the stable three-term recurrence.
inline Eigen::VectorXd oscillator_eigenfunctions(double x, int dim) {
  Eigen::VectorXd psi(dim);
  psi(0) = std::exp(-x * x / 2.0) / std::pow(M_PI, 0.25);
  if (dim > 1) psi(1) = std::sqrt(2.0) * x * psi(0);
  for (int n = 2; n < dim; ++n) {
    psi(n) = std::sqrt(2.0 / n) * x * psi(n - 1) - std::sqrt((n - 1.0) / n) * psi(n - 2);
  }
  return psi;
}

/// <x,theta| amplitudes: v_n = psi_n(x) e^{i n theta}, so that
/// p(x|theta) = v^dag rho v = sum_mn rho_mn psi_m psi_n e^{i(n-m)theta}.
inline CVector quadrature_projector_amplitudes(double x, double theta, int dim) {
  const Eigen::VectorXd psi = oscillator_eigenfunctions(x, dim);
  CVector v(dim);
  for (int n = 0; n < dim; ++n) v(n) = psi(n) * std::exp(Complex(0.0, n * theta));
  return v;
}

/// Quadrature marginal p(x|theta) of the state.
inline double marginal_pdf(const DensityMatrix& rho, double theta, double x) {
  const CVector v = quadrature_projector_amplitudes(x, theta, rho.dim());
  return (v.adjoint() * rho.matrix() * v)(0, 0).real();
}

namespace detail {

/// Tabulated CDF of the marginal at one phase on the inverse-sampling grid
/// x in [-6, 6], 4001 points, with linear interpolation between nodes.
struct MarginalCdf {
  static constexpr double kXMin = -6.0;
  static constexpr double kXMax = 6.0;
  static constexpr int kPoints = 4001;

  std::vector<double> x;
  std::vector<double> cdf;

  MarginalCdf(const DensityMatrix& rho, double theta) {
    x.resize(kPoints);
    cdf.resize(kPoints);
    const double dx = (kXMax - kXMin) / (kPoints - 1);
    std::vector<double> pdf(kPoints);
    for (int i = 0; i < kPoints; ++i) {
      x[i] = kXMin + i * dx;
      pdf[i] = std::max(0.0, marginal_pdf(rho, theta, x[i]));
    }
    cdf[0] = 0.0;
    for (int i = 1; i < kPoints; ++i) {
      cdf[i] = cdf[i - 1] + 0.5 * (pdf[i] + pdf[i - 1]) * dx;
    }
    const double total = cdf.back();
    if (total <= 0.0) {
      throw InvalidStateError("marginal pdf vanishes on the sampling grid");
    }
    for (double& c : cdf) c /= total;
  }

  double invert(double u) const {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto i = static_cast<std::size_t>(std::distance(cdf.begin(), it));
    if (i == 0) return x.front();
    if (i >= cdf.size()) return x.back();
    const double frac = (u - cdf[i - 1]) / (cdf[i] - cdf[i - 1]);
    return x[i - 1] + frac * (x[i] - x[i - 1]);
  }
};

}  // namespace detail

/// i.i.d. quadrature samples per phase by inverse-CDF sampling. Each phase
/// uses its own stream derived from (seed, "quadrature-phase", phase index),
/// so the output is independent of evaluation order and fully reproducible.
inline std::vector<QuadratureSample> sample_quadratures(const DensityMatrix& rho,
                                                        const std::vector<double>& phases,
                                                        int n_per_phase, std::uint64_t seed) {
  if (phases.empty()) {
    throw InvalidStateError("sample_quadratures: empty phase list");
  }
  if (n_per_phase < 1) {
    throw InvalidStateError("sample_quadratures: n_per_phase must be >= 1");
  }
  std::vector<QuadratureSample> samples;
  samples.reserve(phases.size() * static_cast<std::size_t>(n_per_phase));
  for (std::size_t k = 0; k < phases.size(); ++k) {
    const double theta = wrap_phase(phases[k]);
    const detail::MarginalCdf table(rho, theta);
    std::mt19937_64 rng(derive_seed(seed, "quadrature-phase", k));
    for (int j = 0; j < n_per_phase; ++j) {
      samples.push_back({theta, table.invert(uniform_open01(rng))});
    }
  }
  return samples;
}

/// Uniform time grid shared by traces and temporal modes. Times in ns.
struct TemporalGrid {
  double t0_ns = 0.0;
  double dt_ns = 2.0;
  int n_bins = 1000;

  bool operator==(const TemporalGrid&) const = default;
  double time(int i) const { return t0_ns + i * dt_ns; }
};

/// Wave-packet envelope Psi(t) with discrete normalization sum Psi^2 dt = 1.
struct TemporalMode {
  TemporalGrid grid;
  Eigen::VectorXd weights;
};

/// One simulated continuous homodyne signal x(t) on the session grid.
struct RawTrace {
  TemporalGrid grid;
  Eigen::VectorXd values;
};

/// One-sided exponential envelope Psi(t) ~ e^{-(t-t_release)/(2 tau)} for
/// t >= t_release — the cavity-emission fixture used for trace simulation.
inline TemporalMode make_exponential_mode(const TemporalGrid& grid, double release_ns,
                                          double tau_ns) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(grid.n_bins);
  for (int i = 0; i < grid.n_bins; ++i) {
    const double t = grid.time(i);
    if (t >= release_ns) w(i) = std::exp(-(t - release_ns) / (2.0 * tau_ns));
  }
  const double norm2 = w.squaredNorm() * grid.dt_ns;
  if (norm2 <= 0.0) {
    throw InvalidStateError("exponential envelope has no support inside the grid");
  }
  w /= std::sqrt(norm2);
  return TemporalMode{grid, std::move(w)};
}

/// Riemann sum  sum_i Psi(t_i) trace(t_i) dt.
inline double project_quadrature(const RawTrace& trace, const TemporalMode& envelope) {
  if (!(trace.grid == envelope.grid)) {
    throw GridMismatchError("project_quadrature: trace and envelope grids differ");
  }
  return envelope.weights.dot(trace.values) * trace.grid.dt_ns;
}

/// trace_k(t_i) = x_k Psi(t_i) + v_k(t_i): the signal mode rides on a white
/// vacuum bath with per-bin variance 1/(2 dt), so projecting any normalized
/// mode onto pure noise gives variance exactly 1/2, and the round trip
/// project(simulate(x)) returns x plus that vacuum baseline.
inline std::vector<RawTrace> simulate_traces(const std::vector<double>& x_values,
                                             const TemporalMode& envelope,
                                             std::uint64_t noise_seed) {
  const double bin_sd = std::sqrt(1.0 / (2.0 * envelope.grid.dt_ns));
  NormalSampler noise(noise_seed);
  std::vector<RawTrace> traces;
  traces.reserve(x_values.size());
  for (const double x : x_values) {
    Eigen::VectorXd v(envelope.grid.n_bins);
    for (int i = 0; i < envelope.grid.n_bins; ++i) {
      v(i) = x * envelope.weights(i) + bin_sd * noise.next();
    }
    traces.push_back(RawTrace{envelope.grid, std::move(v)});
  }
  return traces;
}

struct TemporalModeResult {
  TemporalMode mode;
  double leading_excess = 0.0;   // top eigenvalue of covariance - baseline
  double second_excess = 0.0;
  bool low_statistics = false;   // fewer than 1000 traces
};

/// Principal-component extraction of the wave-packet envelope: dominant
/// eigenvector of the ensemble covariance minus the vacuum-baseline diagonal
/// 1/(2 dt) I, sign-fixed so the peak weight is positive. The mode is
/// ambiguous when there is no excess variance to find: top excess eigenvalue
/// nonpositive, below 1.5x the expected pure-noise edge
/// baseline*((1+sqrt(p/J))^2 - 1), or within 1e-3 relative of the runner-up.
inline TemporalModeResult extract_temporal_mode(const std::vector<RawTrace>& traces) {
  const auto n_traces = static_cast<int>(traces.size());
  if (n_traces < 100) {
    throw InvalidStateError("extract_temporal_mode: need at least 100 traces, got " +
                            std::to_string(n_traces));
  }
  const TemporalGrid grid = traces.front().grid;
  const int p = grid.n_bins;
  Eigen::MatrixXd y(n_traces, p);
  for (int k = 0; k < n_traces; ++k) {
    if (!(traces[k].grid == grid)) {
      throw GridMismatchError("extract_temporal_mode: traces share no common grid");
    }
    y.row(k) = traces[k].values;
  }
  y.rowwise() -= y.colwise().mean();
  Eigen::MatrixXd cov = (y.adjoint() * y) / (n_traces - 1.0);
  const double baseline = 1.0 / (2.0 * grid.dt_ns);
  cov.diagonal().array() -= baseline;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const double lead = es.eigenvalues()(p - 1);
  const double second = es.eigenvalues()(p - 2);
  const double ratio = static_cast<double>(p) / n_traces;
  const double noise_edge = baseline * ((1.0 + std::sqrt(ratio)) * (1.0 + std::sqrt(ratio)) - 1.0);
  if (lead <= 0.0 || lead < 1.5 * noise_edge) {
    throw AmbiguousModeError("no excess variance above the vacuum baseline");
  }
  if (lead - second <= 1e-3 * lead) {
    throw AmbiguousModeError("two leading excess eigenvalues within 1e-3 relative");
  }

  Eigen::VectorXd w = es.eigenvectors().col(p - 1) / std::sqrt(grid.dt_ns);
  int peak = 0;
  w.cwiseAbs().maxCoeff(&peak);
  if (w(peak) < 0.0) w = -w;
  return TemporalModeResult{TemporalMode{grid, std::move(w)}, lead, second, n_traces < 1000};
}

}  // namespace qmem

#endif  // QMEM_HOMODYNE_HPP
