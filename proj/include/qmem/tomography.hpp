#ifndef QMEM_TOMOGRAPHY_HPP
#define QMEM_TOMOGRAPHY_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "qmem/fock.hpp"
#include "qmem/homodyne.hpp"

namespace qmem {

struct MleOptions {
  int dim = 10;           // reconstruction truncation
  int max_iters = 2000;
  double tol = 1e-9;      // relative log-likelihood change at which to stop

  /// PerSample uses one projector per record (no binning loss). Binned pools
  /// records into n_bins over [x_min, x_max] per phase, projectors at bin
  /// centers — cheaper, for throughput runs.
  enum class Binning { PerSample, Binned };
  Binning binning = Binning::PerSample;
  int n_bins = 200;
  double x_min = -6.0;
  double x_max = 6.0;
};

struct MleResult {
  DensityMatrix rho;
  int iterations = 0;
  bool converged = false;
  bool low_sample_warning = false;              // fewer than 50 dim^2 samples
  std::vector<double> log_likelihood_trace;     // one entry per iteration
};

namespace detail {

struct ProjectorSet {
  CMatrix amplitudes;       // dim x J, column j = |x_j, theta_j> amplitudes
  Eigen::VectorXd weights;  // multiplicity f_j per projector
};

inline ProjectorSet build_projectors(const std::vector<QuadratureSample>& samples,
                                     const MleOptions& opts) {
  ProjectorSet set;
  if (opts.binning == MleOptions::Binning::PerSample) {
    const auto j_total = static_cast<Eigen::Index>(samples.size());
    set.amplitudes.resize(opts.dim, j_total);
    set.weights = Eigen::VectorXd::Ones(j_total);
    for (Eigen::Index j = 0; j < j_total; ++j) {
      set.amplitudes.col(j) =
          quadrature_projector_amplitudes(samples[j].x, samples[j].theta, opts.dim);
    }
    return set;
  }

  // Binned: histogram per distinct phase, projector at each occupied bin center.
  std::vector<double> phases;
  std::vector<std::vector<long>> counts;
  const double width = (opts.x_max - opts.x_min) / opts.n_bins;
  for (const auto& s : samples) {
    auto it = std::find_if(phases.begin(), phases.end(),
                           [&](double t) { return std::abs(t - s.theta) < 1e-12; });
    std::size_t idx;
    if (it == phases.end()) {
      phases.push_back(s.theta);
      counts.emplace_back(opts.n_bins, 0);
      idx = phases.size() - 1;
    } else {
      idx = static_cast<std::size_t>(std::distance(phases.begin(), it));
    }
    int bin = static_cast<int>(std::floor((s.x - opts.x_min) / width));
    bin = std::clamp(bin, 0, opts.n_bins - 1);
    ++counts[idx][static_cast<std::size_t>(bin)];
  }
  std::vector<std::pair<double, double>> centers;  // (theta, x center)
  std::vector<double> mult;
  for (std::size_t k = 0; k < phases.size(); ++k) {
    for (int b = 0; b < opts.n_bins; ++b) {
      if (counts[k][static_cast<std::size_t>(b)] == 0) continue;
      centers.emplace_back(phases[k], opts.x_min + (b + 0.5) * width);
      mult.push_back(static_cast<double>(counts[k][static_cast<std::size_t>(b)]));
    }
  }
  set.amplitudes.resize(opts.dim, static_cast<Eigen::Index>(centers.size()));
  set.weights.resize(static_cast<Eigen::Index>(centers.size()));
  for (std::size_t j = 0; j < centers.size(); ++j) {
    set.amplitudes.col(static_cast<Eigen::Index>(j)) =
        quadrature_projector_amplitudes(centers[j].second, centers[j].first, opts.dim);
    set.weights(static_cast<Eigen::Index>(j)) = mult[j];
  }
  return set;
}

inline void require_identifiable_phases(const std::vector<QuadratureSample>& samples) {
  std::set<long long> distinct;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    distinct.insert(std::llround(s.theta * 1e9));
    lo = std::min(lo, s.theta);
    hi = std::max(hi, s.theta);
  }
  if (distinct.size() < 3 || hi - lo <= M_PI / 2.0) {
    throw TooFewPhasesError("phase coverage cannot identify off-diagonals: need >= 3 distinct "
                            "phases spanning more than pi/2, got " +
                            std::to_string(distinct.size()) + " spanning " +
                            std::to_string(hi - lo) + " rad");
  }
}

}  // namespace detail

/// sum_j f_j ln p_j with p_j the marginal density of sample j under rho.
/// Returns -infinity if some p_j vanishes under a rank-deficient rho.
inline double log_likelihood(const DensityMatrix& rho, const std::vector<QuadratureSample>& samples) {
  double total = 0.0;
  for (const auto& s : samples) {
    const double p = marginal_pdf(rho, s.theta, s.x);
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    total += std::log(p);
  }
  return total;
}

/// Iterative maximum-likelihood reconstruction (RρR fixed point):
///   R = sum_j (f_j / p_j) |v_j><v_j|,   rho <- R rho R / Tr(R rho R),
/// starting from the maximally mixed state. The log-likelihood is
/// non-decreasing along the iteration; stopping is on its relative change.
inline MleResult mle_reconstruct(const std::vector<QuadratureSample>& samples,
                                 const MleOptions& opts) {
  if (opts.dim < 2) throw InvalidDimensionError("reconstruction dim must be >= 2");
  if (opts.tol < 0.0) throw InvalidStateError("tolerance must be nonnegative");
  if (samples.size() < static_cast<std::size_t>(opts.dim) * static_cast<std::size_t>(opts.dim)) {
    throw InvalidStateError("mle_reconstruct: need at least dim^2 samples");
  }
  detail::require_identifiable_phases(samples);

  const detail::ProjectorSet set = detail::build_projectors(samples, opts);
  const Eigen::Index j_total = set.amplitudes.cols();
  const int d = opts.dim;

  CMatrix rho = CMatrix::Identity(d, d) / static_cast<double>(d);
  std::vector<double> ll_trace;
  ll_trace.reserve(64);
  bool converged = false;
  int updates = 0;

  CMatrix projected(d, j_total);
  Eigen::VectorXd densities(j_total);
  CMatrix scaled(d, j_total);
  // Each pass scores the current iterate, so the trace always ends with the
  // log-likelihood of the returned state.
  while (true) {
    projected.noalias() = rho * set.amplitudes;
    double ll = 0.0;
    for (Eigen::Index j = 0; j < j_total; ++j) {
      const double p =
          std::max(set.amplitudes.col(j).dot(projected.col(j)).real(), 1e-280);
      densities(j) = p;
      ll += set.weights(j) * std::log(p);
    }
    ll_trace.push_back(ll);
    if (ll_trace.size() > 1) {
      const double prev = ll_trace[ll_trace.size() - 2];
      if (std::abs(ll - prev) <= opts.tol * std::max(1.0, std::abs(ll))) {
        converged = true;
        break;
      }
    }
    if (updates >= opts.max_iters) break;
    scaled = set.amplitudes;
    for (Eigen::Index j = 0; j < j_total; ++j) {
      scaled.col(j) *= std::sqrt(set.weights(j) / densities(j));
    }
    CMatrix r_op = scaled * scaled.adjoint();  // R = sum_j (f_j/p_j) |v_j><v_j|
    CMatrix next = r_op * rho * r_op;
    next = ((next + next.adjoint()) / 2.0).eval();
    rho = next / next.trace().real();
    ++updates;
  }

  MleResult result{DensityMatrix::from_matrix(std::move(rho)), updates, converged,
                   samples.size() < 50.0 * d * d, std::move(ll_trace)};
  return result;
}

}  // namespace qmem

#endif  // QMEM_TOMOGRAPHY_HPP
