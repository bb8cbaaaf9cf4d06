#ifndef QMEM_PIPELINE_HPP
#define QMEM_PIPELINE_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmem/analysis.hpp"
#include "qmem/channel.hpp"
#include "qmem/config.hpp"
#include "qmem/homodyne.hpp"
#include "qmem/io.hpp"
#include "qmem/prepare.hpp"
#include "qmem/tomography.hpp"
#include "qmem/version.hpp"

namespace qmem {

/// State entering the memory: ideal or heralded preparation, fake-click
/// admixture applied in both modes.
inline DensityMatrix prepared_state(const ExperimentConfig& cfg) {
  if (cfg.prep_mode == PreparationMode::Herald) {
    return herald_superposition(cfg.prep, FockDim(cfg.dim)).state;
  }
  const DensityMatrix pure = ideal_superposition(cfg.alpha, cfg.beta, cfg.theta, FockDim(cfg.dim));
  return admix_fake_clicks(pure, cfg.prep.eta);
}

inline double herald_click_probability(const ExperimentConfig& cfg) {
  if (cfg.prep_mode != PreparationMode::Herald) return 1.0;
  return herald_superposition(cfg.prep, FockDim(cfg.dim)).click_probability;
}

/// Channel output after the configured extra t=0 loss plus storage for t.
inline DensityMatrix stored_state(const ExperimentConfig& cfg, const DensityMatrix& prepared,
                                  Duration t) {
  const DensityMatrix after_extra =
      cfg.extra_loss > 0.0 ? amplitude_damping(prepared, cfg.extra_loss) : prepared;
  return store(after_extra, cfg.memory, t);
}

inline std::vector<QuadratureSample> simulate_samples(const ExperimentConfig& cfg,
                                                      const DensityMatrix& rho_t,
                                                      std::size_t storage_index) {
  return sample_quadratures(rho_t, cfg.phases_rad, cfg.n_per_phase,
                            derive_seed(cfg.seed, "samples", storage_index));
}

inline std::string storage_tag(double t_ns) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04dns", static_cast<int>(t_ns + 0.5));
  return buf;
}

namespace detail {

inline void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                           const std::string& command, const std::vector<std::string>& outputs) {
  nlohmann::json doc;
  doc["version"] = kVersion;
  doc["command"] = command;
  doc["seed"] = cfg.seed;
  nlohmann::json config = nlohmann::json::object();
  for (const auto& [key, value] : cfg.raw) config[key] = value;
  doc["config"] = config;
  nlohmann::json seeds = nlohmann::json::object();
  for (std::size_t i = 0; i < cfg.storage_times_ns.size(); ++i) {
    seeds["samples/" + storage_tag(cfg.storage_times_ns[i])] = derive_seed(cfg.seed, "samples", i);
    seeds["traces/" + storage_tag(cfg.storage_times_ns[i])] = derive_seed(cfg.seed, "traces", i);
  }
  doc["derived_seeds"] = seeds;
  doc["outputs"] = outputs;
  auto out = qmem::detail::open_output(dir / "manifest.json");
  out << doc.dump(2) << '\n';
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  }
}

}  // namespace detail

/// simulate: prepare -> store -> sample per storage time; samples files plus
/// a manifest that pins every parameter and derived seed.
inline std::vector<std::string> run_simulate(const ExperimentConfig& cfg,
                                             const std::filesystem::path& out_dir) {
  detail::ensure_dir(out_dir);
  const DensityMatrix prep = prepared_state(cfg);
  std::vector<std::string> outputs;
  for (std::size_t i = 0; i < cfg.storage_times_ns.size(); ++i) {
    const double t_ns = cfg.storage_times_ns[i];
    const DensityMatrix rho_t = stored_state(cfg, prep, Duration(t_ns * 1e-9));
    const auto samples = simulate_samples(cfg, rho_t, i);
    const std::string name = "samples_" + storage_tag(t_ns) + ".csv";
    save_samples(out_dir / name, samples);
    outputs.push_back(name);
  }
  detail::write_manifest(out_dir, cfg, "simulate", outputs);
  return outputs;
}

struct SummaryRow {
  double t_ns = 0.0;
  double rho11 = 0.0;
  double coherence = 0.0;      // |rho_01|
  double arg01 = 0.0;          // arg rho_01
  double wmin = 0.0;
  PhaseSpacePoint wmin_at;
  double delta = 0.0;          // uncorrected witness of the reconstruction
  double loss = 0.0;           // decomposition estimate
  double sigma_rad = 0.0;
  double fidelity_vs_truth = 0.0;
  int mle_iterations = 0;
  bool mle_converged = false;
};

struct PipelineResult {
  std::vector<SummaryRow> rows;
  std::vector<std::string> outputs;
};

/// pipeline: simulate -> reconstruct -> analyze per storage time, writing
/// density matrices, Wigner grids, witness curves and a summary table.
inline PipelineResult run_pipeline(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out_dir) {
  detail::ensure_dir(out_dir);
  const DensityMatrix prep = prepared_state(cfg);
  PipelineResult result;

  std::string summary = "t_ns,rho11,abs_rho01,arg_rho01,w_min,w_min_x,w_min_p,delta,loss,"
                        "sigma_deg,fidelity,mle_iterations,mle_converged\n";
  for (std::size_t i = 0; i < cfg.storage_times_ns.size(); ++i) {
    const double t_ns = cfg.storage_times_ns[i];
    const std::string tag = storage_tag(t_ns);
    const DensityMatrix truth = stored_state(cfg, prep, Duration(t_ns * 1e-9));
    const auto samples = simulate_samples(cfg, truth, i);
    save_samples(out_dir / ("samples_" + tag + ".csv"), samples);
    result.outputs.push_back("samples_" + tag + ".csv");

    MleOptions opts;
    opts.dim = cfg.recon_dim;
    const MleResult mle = mle_reconstruct(samples, opts);
    save_density_matrix(out_dir / ("rho_" + tag + ".json"), mle.rho);
    result.outputs.push_back("rho_" + tag + ".json");

    const WignerGrid grid = wigner_grid(mle.rho, -cfg.wigner_range, cfg.wigner_range,
                                        -cfg.wigner_range, cfg.wigner_range, cfg.wigner_step);
    save_wigner_grid(out_dir / ("wigner_" + tag + ".txt"), grid);
    result.outputs.push_back("wigner_" + tag + ".txt");
    const WignerMinimum minimum = find_wigner_minimum(grid);

    const WitnessCurve witness = corrected_delta_curve(mle.rho, cfg.gamma_scan());
    save_witness_curve(out_dir / ("witness_" + tag + ".csv"), witness);
    result.outputs.push_back("witness_" + tag + ".csv");

    SummaryRow row;
    row.t_ns = t_ns;
    row.rho11 = mle.rho.element(1, 1).real();
    row.coherence = std::abs(mle.rho.element(0, 1));
    row.arg01 = std::arg(mle.rho.element(0, 1));
    row.wmin = minimum.value;
    row.wmin_at = minimum.location;
    row.delta = nongaussianity_delta(mle.rho);
    if (cfg.prep_mode == PreparationMode::Ideal) {
      const DecompositionResult dec = estimate_loss_dephasing(mle.rho, cfg.alpha, cfg.beta);
      row.loss = dec.loss;
      row.sigma_rad = dec.sigma;
    }
    row.fidelity_vs_truth = fidelity(mle.rho.embedded(FockDim(cfg.dim)), truth);
    row.mle_iterations = mle.iterations;
    row.mle_converged = mle.converged;
    result.rows.push_back(row);

    summary += qmem::detail::fmt_g17(row.t_ns) + "," + qmem::detail::fmt_g17(row.rho11) + "," +
               qmem::detail::fmt_g17(row.coherence) + "," + qmem::detail::fmt_g17(row.arg01) +
               "," + qmem::detail::fmt_g17(row.wmin) + "," + qmem::detail::fmt_g17(row.wmin_at.x) +
               "," + qmem::detail::fmt_g17(row.wmin_at.p) + "," + qmem::detail::fmt_g17(row.delta) +
               "," + qmem::detail::fmt_g17(row.loss) + "," +
               qmem::detail::fmt_g17(row.sigma_rad * 180.0 / M_PI) + "," +
               qmem::detail::fmt_g17(row.fidelity_vs_truth) + "," +
               std::to_string(row.mle_iterations) + "," + (row.mle_converged ? "1" : "0") + "\n";
  }

  auto out = qmem::detail::open_output(out_dir / "summary.csv");
  out << summary;
  result.outputs.push_back("summary.csv");
  detail::write_manifest(out_dir, cfg, "pipeline", result.outputs);
  return result;
}

struct TemporalModeRow {
  double t_ns = 0.0;
  double overlap_with_truth = 0.0;  // |sum Psi_est Psi_true dt|
  double peak_time_ns = 0.0;
  double true_peak_time_ns = 0.0;
};

/// temporal-mode: simulate release traces for each storage time (envelope
/// shifted by the storage time), extract the envelope by PCA, and report the
/// overlap against the generating mode.
inline std::vector<TemporalModeRow> run_temporal_mode(const ExperimentConfig& cfg,
                                                      const std::filesystem::path& out_dir,
                                                      bool write_traces = false) {
  detail::ensure_dir(out_dir);
  TemporalGrid grid;
  grid.t0_ns = 0.0;
  grid.dt_ns = cfg.traces_dt_ns;
  grid.n_bins = static_cast<int>(cfg.traces_window_ns / cfg.traces_dt_ns);
  const DensityMatrix prep = prepared_state(cfg);

  std::vector<TemporalModeRow> rows;
  std::vector<std::string> outputs;
  for (std::size_t i = 0; i < cfg.storage_times_ns.size(); ++i) {
    const double t_ns = cfg.storage_times_ns[i];
    const std::string tag = storage_tag(t_ns);
    const TemporalMode truth =
        make_exponential_mode(grid, cfg.traces_release_ns + t_ns, cfg.traces_tau_ns);
    const DensityMatrix rho_t = stored_state(cfg, prep, Duration(t_ns * 1e-9));
    const auto samples = sample_quadratures(rho_t, {0.0}, cfg.traces_count,
                                            derive_seed(cfg.seed, "trace-samples", i));
    std::vector<double> x_values;
    x_values.reserve(samples.size());
    for (const auto& s : samples) x_values.push_back(s.x);
    const auto traces = simulate_traces(x_values, truth, derive_seed(cfg.seed, "traces", i));
    if (write_traces) {
      save_traces(out_dir / ("traces_" + tag + ".qtrc"), traces);
      outputs.push_back("traces_" + tag + ".qtrc");
    }
    const TemporalModeResult extracted = extract_temporal_mode(traces);
    save_temporal_mode(out_dir / ("mode_" + tag + ".csv"), extracted.mode);
    outputs.push_back("mode_" + tag + ".csv");

    TemporalModeRow row;
    row.t_ns = t_ns;
    row.overlap_with_truth =
        std::abs(extracted.mode.weights.dot(truth.weights) * grid.dt_ns);
    int peak = 0;
    extracted.mode.weights.maxCoeff(&peak);
    row.peak_time_ns = grid.time(peak);
    truth.weights.maxCoeff(&peak);
    row.true_peak_time_ns = grid.time(peak);
    rows.push_back(row);
  }

  std::string report = "t_ns,overlap,peak_time_ns,true_peak_time_ns\n";
  for (const auto& row : rows) {
    report += qmem::detail::fmt_g17(row.t_ns) + "," +
              qmem::detail::fmt_g17(row.overlap_with_truth) + "," +
              qmem::detail::fmt_g17(row.peak_time_ns) + "," +
              qmem::detail::fmt_g17(row.true_peak_time_ns) + "\n";
  }
  auto out = qmem::detail::open_output(out_dir / "temporal_modes.csv");
  out << report;
  outputs.push_back("temporal_modes.csv");
  detail::write_manifest(out_dir, cfg, "temporal-mode", outputs);
  return rows;
}

}  // namespace qmem

#endif  // QMEM_PIPELINE_HPP
