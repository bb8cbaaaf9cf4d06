#include <catch2/catch_amalgamated.hpp>

#include "qmem/homodyne.hpp"
#include "qmem/prepare.hpp"
#include "support.hpp"

using namespace qmem;
using Catch::Approx;

namespace {

DensityMatrix balanced(int dim = 12) {
  const double s = 1.0 / std::sqrt(2.0);
  return ideal_superposition(s, s, 0.0, FockDim(dim));
}

TemporalGrid test_grid() { return TemporalGrid{0.0, 8.0, 128}; }

std::vector<double> collect_x(const std::vector<QuadratureSample>& samples) {
  std::vector<double> xs;
  xs.reserve(samples.size());
  for (const auto& s : samples) xs.push_back(s.x);
  return xs;
}

}  // namespace

TEST_CASE("marginal_pdf_closed_forms", "[homodyne]") {
  const auto vac = DensityMatrix::vacuum(FockDim(10));
  for (const double theta : {0.0, 0.9, 2.5}) {
    CHECK(marginal_pdf(vac, theta, 0.0) == Approx(1.0 / std::sqrt(M_PI)).margin(1e-12));
  }
  const auto one = DensityMatrix::fock_state(1, FockDim(10));
  CHECK(std::abs(marginal_pdf(one, 0.4, 0.0)) < 1e-12);

  const auto bal = balanced();
  for (const double x : {-2.0, -0.5, 0.0, 0.8, 2.3}) {
    CHECK(marginal_pdf(bal, 0.0, x) == Approx(marginal_pdf(bal, M_PI, -x)).margin(1e-13));
  }
}

TEST_CASE("marginal_pdf_integrates_to_one", "[homodyne]") {
  for (std::uint64_t seed : {3ull, 4ull, 5ull}) {
    for (int dim : {6, 12, 20}) {
      const auto rho = oracle::random_density_matrix(dim, seed);
      const double total = oracle::simpson(
          [&](double x) { return marginal_pdf(rho, 0.7, x); }, -6.0, 6.0, 1200);
      CHECK(total == Approx(1.0).margin(1e-6));
    }
  }
}

TEST_CASE("fock_diagonal_states_have_phase_blind_marginals", "[homodyne]") {
  CMatrix diag = CMatrix::Zero(8, 8);
  diag(0, 0) = 0.4;
  diag(1, 1) = 0.45;
  diag(2, 2) = 0.15;
  const auto rho = DensityMatrix::from_matrix(diag);
  for (const double x : {-1.5, 0.2, 1.1}) {
    const double reference = marginal_pdf(rho, 0.0, x);
    for (const double theta : {0.3, 1.1, 2.9, 5.0}) {
      CHECK(marginal_pdf(rho, theta, x) == Approx(reference).margin(1e-13));
    }
  }
}

TEST_CASE("sampling_is_deterministic_in_the_seed", "[homodyne]") {
  const auto rho = balanced();
  const std::vector<double> phases{0.0, 0.5, 1.1};
  const auto a = sample_quadratures(rho, phases, 200, 99);
  const auto b = sample_quadratures(rho, phases, 200, 99);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].theta == b[i].theta);
    CHECK(a[i].x == b[i].x);
  }
  const auto c = sample_quadratures(rho, phases, 200, 100);
  bool any_different = false;
  for (std::size_t i = 0; i < a.size(); ++i) any_different |= (a[i].x != c[i].x);
  CHECK(any_different);
}

TEST_CASE("sampling_rejects_degenerate_requests", "[homodyne]") {
  const auto rho = balanced();
  CHECK_THROWS_AS(sample_quadratures(rho, {}, 10, 1), InvalidStateError);
  CHECK_THROWS_AS(sample_quadratures(rho, {0.0}, 0, 1), InvalidStateError);
}

TEST_CASE("vacuum_samples_have_the_vacuum_variance", "[homodyne]") {
  const auto vac = DensityMatrix::vacuum(FockDim(8));
  const auto samples = sample_quadratures(vac, {0.0}, 100000, 7);
  const double var = oracle::sample_variance(collect_x(samples));
  CHECK(var == Approx(0.5).margin(0.01));
}

TEST_CASE("balanced_state_sample_means_trace_the_cosine", "[homodyne]") {
  const auto rho = balanced();
  std::vector<double> phases;
  for (int k = 0; k < 6; ++k) phases.push_back(k * M_PI / 6.0);
  const int n = 20000;
  const auto samples = sample_quadratures(rho, phases, n, 2024);
  const CMatrix x_op = quadrature_operator(FockDim(rho.dim()));
  for (std::size_t k = 0; k < phases.size(); ++k) {
    std::vector<double> xs;
    for (std::size_t j = k * n; j < (k + 1) * n; ++j) xs.push_back(samples[j].x);
    const double mean = oracle::sample_mean(xs);
    const double expected = std::cos(phases[k]) / std::sqrt(2.0);
    // Moment oracle for the standard error: Var(x_theta) = <x_theta^2> - mean^2.
    const CMatrix xt = quadrature_operator(FockDim(rho.dim()), phases[k]);
    const double second = (rho.matrix() * xt * xt).trace().real();
    const double se = std::sqrt((second - expected * expected) / n);
    CHECK(std::abs(mean - expected) < 3.0 * se);
  }
}

TEST_CASE("empirical_cdf_passes_the_ks_test", "[homodyne]") {
  const auto rho = balanced();
  const double theta = M_PI / 3.0;
  const int n = 20000;
  const auto samples = sample_quadratures(rho, {theta}, n, 4321);

  // Analytic CDF on a fine trapezoid grid, independent of the sampler's table.
  const int fine = 16001;
  std::vector<double> xs(fine), cdf(fine);
  const double dx = 13.0 / (fine - 1);
  for (int i = 0; i < fine; ++i) {
    xs[i] = -6.5 + i * dx;
    const double pdf = std::max(0.0, marginal_pdf(rho, theta, xs[i]));
    cdf[i] = (i == 0 ? 0.0 : cdf[i - 1] + 0.5 * dx * (pdf + std::max(0.0, marginal_pdf(rho, theta, xs[i - 1]))));
  }
  for (double& c : cdf) c /= cdf.back();
  auto analytic = [&](double x) {
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.begin()) return 0.0;
    if (it == xs.end()) return 1.0;
    const auto i = static_cast<std::size_t>(std::distance(xs.begin(), it));
    const double frac = (x - xs[i - 1]) / dx;
    return cdf[i - 1] + frac * (cdf[i] - cdf[i - 1]);
  };
  const double ks = oracle::ks_statistic(collect_x(samples), analytic);
  CHECK(ks < 1.63 / std::sqrt(static_cast<double>(n)));  // 99% confidence band
}

TEST_CASE("pure_noise_traces_carry_the_vacuum_baseline", "[homodyne]") {
  const auto mode = make_exponential_mode(test_grid(), 96.0, 50.0);
  const std::vector<double> zeros(10000, 0.0);
  const auto traces = simulate_traces(zeros, mode, 11);
  std::vector<double> projections;
  projections.reserve(traces.size());
  for (const auto& t : traces) projections.push_back(project_quadrature(t, mode));
  CHECK(oracle::sample_mean(projections) == Approx(0.0).margin(0.03));
  CHECK(oracle::sample_variance(projections) == Approx(0.5).margin(0.01));
}

TEST_CASE("unit_variance_signal_projects_to_three_halves", "[homodyne]") {
  const auto mode = make_exponential_mode(test_grid(), 96.0, 50.0);
  std::mt19937_64 rng(17);
  std::vector<double> xs(10000);
  NormalSampler normal(18);
  for (double& x : xs) x = normal.next();  // signal variance 1 -> mode variance 3/2
  (void)rng;
  const auto traces = simulate_traces(xs, mode, 19);
  std::vector<double> projections;
  for (const auto& t : traces) projections.push_back(project_quadrature(t, mode));
  CHECK(oracle::sample_variance(projections) == Approx(1.5).margin(0.03));
}

TEST_CASE("orthogonal_modes_see_only_vacuum", "[homodyne]") {
  const auto grid = test_grid();
  const auto mode = make_exponential_mode(grid, 96.0, 50.0);
  // Gram-Schmidt a shifted envelope against the signal mode.
  const auto other = make_exponential_mode(grid, 400.0, 60.0);
  Eigen::VectorXd w = other.weights - mode.weights * (mode.weights.dot(other.weights) * grid.dt_ns);
  w /= std::sqrt(w.squaredNorm() * grid.dt_ns);
  const TemporalMode orthogonal{grid, w};

  NormalSampler normal(21);
  std::vector<double> xs(10000);
  for (double& x : xs) x = 1.5 * normal.next();
  const auto traces = simulate_traces(xs, mode, 22);
  std::vector<double> projections;
  for (const auto& t : traces) projections.push_back(project_quadrature(t, orthogonal));
  CHECK(oracle::sample_variance(projections) == Approx(0.5).margin(0.012));
}

TEST_CASE("projection_round_trip_adds_exactly_the_vacuum_baseline", "[homodyne]") {
  const auto mode = make_exponential_mode(test_grid(), 96.0, 50.0);

  RawTrace synthetic{mode.grid, mode.weights};
  CHECK(project_quadrature(synthetic, mode) == Approx(1.0).margin(1e-12));

  const auto one = DensityMatrix::fock_state(1, FockDim(8));
  const auto samples = sample_quadratures(one, {0.0}, 10000, 23);
  const auto xs = collect_x(samples);
  const auto traces = simulate_traces(xs, mode, 24);
  std::vector<double> residuals(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    residuals[k] = project_quadrature(traces[k], mode) - xs[k];
  }
  CHECK(oracle::sample_mean(residuals) == Approx(0.0).margin(0.03));
  CHECK(oracle::sample_variance(residuals) == Approx(0.5).margin(0.01));

  TemporalMode wrong = mode;
  wrong.grid.dt_ns *= 2.0;
  CHECK_THROWS_AS(project_quadrature(traces[0], wrong), GridMismatchError);
}

TEST_CASE("trace_simulation_is_deterministic", "[homodyne]") {
  const auto mode = make_exponential_mode(test_grid(), 96.0, 50.0);
  const std::vector<double> xs{0.3, -1.2, 0.0, 2.1};
  const auto a = simulate_traces(xs, mode, 5);
  const auto b = simulate_traces(xs, mode, 5);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    CHECK((a[k].values - b[k].values).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("pca_recovers_the_generating_envelope", "[homodyne]") {
  const auto mode = make_exponential_mode(test_grid(), 96.0, 50.0);
  const auto one = DensityMatrix::fock_state(1, FockDim(8));
  const auto xs = collect_x(sample_quadratures(one, {0.0}, 5000, 31));
  const auto traces = simulate_traces(xs, mode, 32);
  const auto result = extract_temporal_mode(traces);
  CHECK_FALSE(result.low_statistics);
  const double overlap =
      std::abs(result.mode.weights.dot(mode.weights) * mode.grid.dt_ns);
  CHECK(overlap >= 0.99);
  CHECK(result.mode.weights.squaredNorm() * mode.grid.dt_ns == Approx(1.0).margin(1e-9));
}

TEST_CASE("pure_vacuum_traces_have_no_mode_to_find", "[homodyne]") {
  const auto mode = make_exponential_mode(test_grid(), 96.0, 50.0);
  const std::vector<double> zeros(4000, 0.0);
  const auto traces = simulate_traces(zeros, mode, 41);
  CHECK_THROWS_AS(extract_temporal_mode(traces), AmbiguousModeError);
}

TEST_CASE("storage_shift_moves_the_extracted_mode_equivariantly", "[homodyne]") {
  const auto grid = test_grid();
  const auto one = DensityMatrix::fock_state(1, FockDim(8));
  const auto base = make_exponential_mode(grid, 96.0, 50.0);
  const auto base_result =
      extract_temporal_mode(simulate_traces(collect_x(sample_quadratures(one, {0.0}, 5000, 51)),
                                            base, 52));
  const double shift = 100.0;
  const auto shifted = make_exponential_mode(grid, 96.0 + shift, 50.0);
  const auto shifted_result =
      extract_temporal_mode(simulate_traces(collect_x(sample_quadratures(one, {0.0}, 5000, 53)),
                                            shifted, 54));
  int i0 = 0, i1 = 0;
  base_result.mode.weights.maxCoeff(&i0);
  shifted_result.mode.weights.maxCoeff(&i1);
  const double peak_shift = grid.time(i1) - grid.time(i0);
  CHECK(std::abs(peak_shift - shift) <= grid.dt_ns + 1e-9);
  const double overlap =
      std::abs(shifted_result.mode.weights.dot(shifted.weights) * grid.dt_ns);
  CHECK(overlap >= 0.99);
}

TEST_CASE("mode_extraction_preconditions", "[homodyne]") {
  const auto mode = make_exponential_mode(test_grid(), 96.0, 50.0);
  const std::vector<double> xs(99, 1.0);
  const auto traces = simulate_traces(xs, mode, 61);
  CHECK_THROWS_AS(extract_temporal_mode(traces), InvalidStateError);

  const auto one = DensityMatrix::fock_state(1, FockDim(8));
  const auto few = simulate_traces(collect_x(sample_quadratures(one, {0.0}, 500, 62)), mode, 63);
  const auto result = extract_temporal_mode(few);
  CHECK(result.low_statistics);
}
