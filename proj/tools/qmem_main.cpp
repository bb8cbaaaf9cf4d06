// qmem - command-line driver for the single-rail quantum-memory simulator.
//
// Subcommands: simulate, tomo, wigner, witness, decompose, pipeline,
// temporal-mode. Exit codes: 0 success, 2 config error, 3 numeric or
// convergence error, 4 I/O error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qmem/analysis.hpp"
#include "qmem/config.hpp"
#include "qmem/io.hpp"
#include "qmem/pipeline.hpp"
#include "qmem/tomography.hpp"
#include "qmem/version.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> dim;
};

qmem::ExperimentConfig load_config(const CommonArgs& args) {
  qmem::ExperimentConfig cfg = qmem::ExperimentConfig::from_file(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  if (args.out_dir) cfg.output_dir = *args.out_dir;
  if (args.dim) cfg.dim = *args.dim;
  return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* opt = cmd->add_option("--config", args.config_path, "experiment config file");
  if (config_required) opt->required();
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--out", args.out_dir, "override the output directory");
  cmd->add_option("--dim", args.dim, "override the generation truncation dim");
}

void print_summary(const std::vector<qmem::SummaryRow>& rows) {
  std::printf("%8s %8s %9s %10s %9s %18s %9s %7s %9s %7s\n", "t_ns", "rho11", "|rho01|",
              "arg01_rad", "W_min", "at (x,p)", "Delta", "L", "sigma_dg", "fid");
  for (const auto& r : rows) {
    std::printf("%8.0f %8.4f %9.4f %10.4f %9.4f (%7.3f,%7.3f) %9.4f %7.4f %9.3f %7.4f\n", r.t_ns,
                r.rho11, r.coherence, r.arg01, r.wmin, r.wmin_at.x, r.wmin_at.p, r.delta, r.loss,
                r.sigma_rad * 180.0 / M_PI, r.fidelity_vs_truth);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"single-rail quantum-memory simulation and analysis toolkit"};
  app.set_version_flag("--version", qmem::kVersion);
  app.require_subcommand(1);

  CommonArgs args;

  auto* simulate = app.add_subcommand("simulate", "prepare, store, and sample quadratures");
  add_common(simulate, args);

  auto* pipeline =
      app.add_subcommand("pipeline", "simulate, reconstruct, and analyze per storage time");
  add_common(pipeline, args);

  auto* temporal =
      app.add_subcommand("temporal-mode", "simulate release traces and extract envelopes by PCA");
  add_common(temporal, args);
  bool write_traces = false;
  temporal->add_flag("--write-traces", write_traces, "also write the binary trace blocks");

  auto* tomo = app.add_subcommand("tomo", "maximum-likelihood reconstruction from a samples file");
  std::string in_path;
  std::string tomo_out = "out";
  int recon_dim = 10;
  int max_iters = 2000;
  double tol = 1e-9;
  tomo->add_option("--in", in_path, "samples file (theta_rad,x)")->required();
  tomo->add_option("--out", tomo_out, "output directory");
  tomo->add_option("--dim", recon_dim, "reconstruction truncation dim");
  tomo->add_option("--max-iters", max_iters, "iteration cap");
  tomo->add_option("--tol", tol, "relative log-likelihood stopping tolerance");

  auto* wigner = app.add_subcommand("wigner", "Wigner grid and minimum of a stored density matrix");
  std::string wigner_out = "out";
  double range = 2.0;
  double step = 0.05;
  wigner->add_option("--in", in_path, "density-matrix JSON file")->required();
  wigner->add_option("--out", wigner_out, "output directory");
  wigner->add_option("--range", range, "grid half-range in x and p");
  wigner->add_option("--step", step, "grid step");

  auto* witness = app.add_subcommand("witness", "Gaussian-corrected non-Gaussianity scan");
  std::string witness_out = "out";
  double gamma_max = 1.5;
  double gamma_step = 0.05;
  witness->add_option("--in", in_path, "density-matrix JSON file")->required();
  witness->add_option("--out", witness_out, "output directory");
  witness->add_option("--gamma-max", gamma_max, "largest displacement magnitude");
  witness->add_option("--gamma-step", gamma_step, "scan step");

  auto* decompose = app.add_subcommand("decompose", "loss/dephasing estimate vs an ideal state");
  double alpha = 1.0 / std::sqrt(2.0);
  double beta = 1.0 / std::sqrt(2.0);
  decompose->add_option("--in", in_path, "density-matrix JSON file")->required();
  decompose->add_option("--alpha", alpha, "ideal vacuum amplitude");
  decompose->add_option("--beta", beta, "ideal one-photon amplitude");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*simulate) {
      const auto cfg = load_config(args);
      const auto outputs = qmem::run_simulate(cfg, cfg.output_dir);
      if (cfg.prep_mode == qmem::PreparationMode::Herald) {
        const double p_click = qmem::herald_click_probability(cfg);
        std::cout << "click probability per trial: " << p_click << '\n';
        if (cfg.trial_rate_hz > 0.0) {
          std::cout << "herald rate at " << cfg.trial_rate_hz
                    << " trials/s: " << p_click * cfg.trial_rate_hz << " counts/s\n";
        }
      }
      std::cout << "wrote " << outputs.size() << " sample files to " << cfg.output_dir << '\n';
    } else if (*pipeline) {
      const auto cfg = load_config(args);
      const auto result = qmem::run_pipeline(cfg, cfg.output_dir);
      print_summary(result.rows);
      std::cout << "wrote " << result.outputs.size() << " files to " << cfg.output_dir << '\n';
    } else if (*temporal) {
      const auto cfg = load_config(args);
      const auto rows = qmem::run_temporal_mode(cfg, cfg.output_dir, write_traces);
      std::printf("%8s %9s %13s %13s\n", "t_ns", "overlap", "peak_ns", "true_peak_ns");
      for (const auto& r : rows) {
        std::printf("%8.0f %9.5f %13.1f %13.1f\n", r.t_ns, r.overlap_with_truth, r.peak_time_ns,
                    r.true_peak_time_ns);
      }
    } else if (*tomo) {
      const auto samples = qmem::load_samples(in_path);
      qmem::MleOptions opts;
      opts.dim = recon_dim;
      opts.max_iters = max_iters;
      opts.tol = tol;
      const qmem::MleResult result = qmem::mle_reconstruct(samples, opts);
      std::filesystem::create_directories(tomo_out);
      qmem::save_density_matrix(std::filesystem::path(tomo_out) / "rho.json", result.rho);
      nlohmann::json diag;
      diag["iterations"] = result.iterations;
      diag["converged"] = result.converged;
      diag["low_sample_warning"] = result.low_sample_warning;
      diag["final_log_likelihood"] = result.log_likelihood_trace.back();
      diag["log_likelihood_trace"] = result.log_likelihood_trace;
      auto out = qmem::detail::open_output(std::filesystem::path(tomo_out) / "diagnostics.json");
      out << diag.dump(2) << '\n';
      std::cout << "reconstructed dim " << recon_dim << " state in " << result.iterations
                << " iterations (" << (result.converged ? "converged" : "not converged") << ")\n";
      if (!result.converged) return 3;
    } else if (*wigner) {
      const auto rho = qmem::load_density_matrix(in_path);
      const auto grid = qmem::wigner_grid(rho, -range, range, -range, range, step);
      std::filesystem::create_directories(wigner_out);
      qmem::save_wigner_grid(std::filesystem::path(wigner_out) / "wigner.txt", grid);
      const auto minimum = qmem::find_wigner_minimum(grid);
      std::cout << "W_min = " << minimum.value << " at (" << minimum.location.x << ", "
                << minimum.location.p << ")" << (minimum.on_boundary ? " [on boundary]" : "")
                << ", grid integral " << grid.integral << '\n';
    } else if (*witness) {
      const auto rho = qmem::load_density_matrix(in_path);
      std::vector<double> gammas;
      for (double g = 0.0; g <= gamma_max + 1e-12; g += gamma_step) gammas.push_back(g);
      const auto curve = qmem::corrected_delta_curve(rho, gammas);
      std::filesystem::create_directories(witness_out);
      qmem::save_witness_curve(std::filesystem::path(witness_out) / "witness.csv", curve);
      const auto best =
          std::min_element(curve.points.begin(), curve.points.end(),
                           [](const auto& a, const auto& b) { return a.delta < b.delta; });
      std::cout << "min Delta = " << best->delta << " at gamma = " << best->gamma
                << " (zeta " << best->zeta_opt << ", dip direction " << curve.phi << " rad)"
                << (curve.phi_defaulted ? " [dip direction defaulted]" : "") << '\n';
    } else if (*decompose) {
      const auto rho = qmem::load_density_matrix(in_path);
      const auto dec = qmem::estimate_loss_dephasing(rho, alpha, beta);
      std::cout << "L = " << dec.loss << (dec.loss_clamped ? " [clamped]" : "")
                << ", sigma = " << dec.sigma * 180.0 / M_PI << " deg"
                << (dec.over_coherent ? " [over-coherent]" : "")
                << (dec.sigma_infinite ? " [no coherence]" : "")
                << ", qubit-block weight = " << dec.renorm_weight << '\n';
    }
  } catch (const qmem::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
