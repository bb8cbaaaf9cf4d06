#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qmem/io.hpp"

namespace {

namespace fs = std::filesystem;

std::string binary_path() {
  const char* env = std::getenv("QMEM_BIN");
  return env == nullptr ? std::string() : std::string(env);
}

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run(const std::string& args, const fs::path& workdir) {
  const fs::path log = workdir / "run.log";
  const std::string cmd =
      "cd '" + workdir.string() + "' && '" + binary_path() + "' " + args + " > '" +
      log.string() + "' 2>&1";
  const int raw = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(log);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  result.output = buffer.str();
  return result;
}

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("qmem_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

const char* kConfig = R"(
preparation.mode = ideal
preparation.eta = 0.96666666666666667
memory.half_life_us = 1.3
memory.detuning_khz = 300
memory.sigma_deg = 28
storage_times_ns = 0,100
phases_deg = 0,45,90,135
n_per_phase = 60
seed = 11
dim = 8
recon_dim = 4
output_dir = out
)";

}  // namespace

TEST_CASE("cli_simulate_writes_reproducible_outputs", "[cli]") {
  if (binary_path().empty()) {
    SKIP("QMEM_BIN not set");
  }
  const auto dir = temp_dir("simulate");
  write_file(dir / "exp.cfg", kConfig);

  const auto first = run("simulate --config exp.cfg --out run_a", dir);
  INFO(first.output);
  CHECK(first.exit_code == 0);
  CHECK(fs::exists(dir / "run_a" / "samples_0000ns.csv"));
  CHECK(fs::exists(dir / "run_a" / "samples_0100ns.csv"));
  CHECK(fs::exists(dir / "run_a" / "manifest.json"));

  const auto second = run("simulate --config exp.cfg --out run_b", dir);
  CHECK(second.exit_code == 0);
  for (const char* name : {"samples_0000ns.csv", "samples_0100ns.csv", "manifest.json"}) {
    std::ifstream a(dir / "run_a" / name), b(dir / "run_b" / name);
    std::ostringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
  }
}

TEST_CASE("cli_simulate_honors_the_acquisition_geometry", "[cli]") {
  if (binary_path().empty()) {
    SKIP("QMEM_BIN not set");
  }
  const auto dir = temp_dir("geometry");
  // Phase-scan geometry: 36 phases at 10 degree spacing, 5000 shots each.
  std::string phases = "0";
  for (int k = 1; k < 36; ++k) phases += "," + std::to_string(10 * k);
  write_file(dir / "exp.cfg",
             "storage_times_ns = 0\nphases_deg = " + phases +
                 "\nn_per_phase = 5000\nseed = 3\ndim = 10\n");
  const auto result = run("simulate --config exp.cfg --out scan", dir);
  INFO(result.output);
  CHECK(result.exit_code == 0);
  const auto samples = qmem::load_samples(dir / "scan" / "samples_0000ns.csv");
  CHECK(samples.size() == 36u * 5000u);
}

TEST_CASE("cli_tomo_and_analysis_subcommands_chain", "[cli]") {
  if (binary_path().empty()) {
    SKIP("QMEM_BIN not set");
  }
  const auto dir = temp_dir("chain");
  write_file(dir / "exp.cfg",
             "storage_times_ns = 0\nphases_deg = 0,30,60,90,120,150\nn_per_phase = 2000\n"
             "seed = 21\ndim = 10\npreparation.eta = 1.0\nmemory.sigma_deg = 0\n");
  CHECK(run("simulate --config exp.cfg --out sim", dir).exit_code == 0);

  const auto tomo =
      run("tomo --in sim/samples_0000ns.csv --out tomo --dim 6 --tol 1e-8", dir);
  INFO(tomo.output);
  CHECK(tomo.exit_code == 0);
  CHECK(fs::exists(dir / "tomo" / "rho.json"));
  CHECK(fs::exists(dir / "tomo" / "diagnostics.json"));

  const auto wigner = run("wigner --in tomo/rho.json --out wig --range 1.5 --step 0.05", dir);
  INFO(wigner.output);
  CHECK(wigner.exit_code == 0);
  CHECK(wigner.output.find("W_min") != std::string::npos);

  const auto witness = run("witness --in tomo/rho.json --out wit --gamma-max 0.8", dir);
  INFO(witness.output);
  CHECK(witness.exit_code == 0);
  CHECK(fs::exists(dir / "wit" / "witness.csv"));

  const auto decompose = run("decompose --in tomo/rho.json", dir);
  INFO(decompose.output);
  CHECK(decompose.exit_code == 0);
  CHECK(decompose.output.find("sigma") != std::string::npos);
}

TEST_CASE("cli_exit_codes_follow_the_error_taxonomy", "[cli]") {
  if (binary_path().empty()) {
    SKIP("QMEM_BIN not set");
  }
  const auto dir = temp_dir("errors");

  write_file(dir / "bad.cfg", "memory.half_life_us = -2\n");
  const auto config_error = run("simulate --config bad.cfg", dir);
  CHECK(config_error.exit_code == 2);
  CHECK(config_error.output.find("memory.half_life_us") != std::string::npos);

  const auto io_error = run("simulate --config does_not_exist.cfg", dir);
  CHECK(io_error.exit_code == 4);

  write_file(dir / "exp.cfg", kConfig);
  write_file(dir / "single_phase.csv", "# theta_rad,x\n0.0,0.1\n0.0,-0.2\n0.0,0.3\n");
  const auto numeric_error = run("tomo --in single_phase.csv --out t --dim 2", dir);
  CHECK(numeric_error.exit_code == 3);

  const auto usage_error = run("frobnicate", dir);
  CHECK(usage_error.exit_code == 2);
}

TEST_CASE("cli_temporal_mode_reports_overlaps", "[cli]") {
  if (binary_path().empty()) {
    SKIP("QMEM_BIN not set");
  }
  const auto dir = temp_dir("temporal");
  write_file(dir / "exp.cfg",
             "preparation.alpha = 0\npreparation.beta = 1\nstorage_times_ns = 0,100\n"
             "seed = 31\ndim = 8\nmemory.sigma_deg = 0\n"
             "traces.n_traces = 1500\ntraces.dt_ns = 8\ntraces.window_ns = 1024\n"
             "traces.release_ns = 96\ntraces.tau_ns = 50\n");
  const auto result = run("temporal-mode --config exp.cfg --out modes --write-traces", dir);
  INFO(result.output);
  CHECK(result.exit_code == 0);
  CHECK(fs::exists(dir / "modes" / "mode_0000ns.csv"));
  CHECK(fs::exists(dir / "modes" / "traces_0000ns.qtrc"));
  CHECK(fs::exists(dir / "modes" / "temporal_modes.csv"));
  const auto traces = qmem::load_traces(dir / "modes" / "traces_0000ns.qtrc");
  CHECK(traces.size() == 1500);
  CHECK(traces.front().grid.n_bins == 128);
}

TEST_CASE("cli_pipeline_writes_the_summary_bundle", "[cli]") {
  if (binary_path().empty()) {
    SKIP("QMEM_BIN not set");
  }
  const auto dir = temp_dir("pipeline");
  write_file(dir / "exp.cfg",
             "storage_times_ns = 0\nphases_deg = 0,30,60,90,120,150\nn_per_phase = 1500\n"
             "seed = 41\ndim = 10\nrecon_dim = 6\nwigner.range = 1.5\nwigner.step = 0.075\n"
             "witness.gamma_max = 0.6\nwitness.gamma_step = 0.1\n");
  const auto result = run("pipeline --config exp.cfg --out full", dir);
  INFO(result.output);
  CHECK(result.exit_code == 0);
  for (const char* name : {"samples_0000ns.csv", "rho_0000ns.json", "wigner_0000ns.txt",
                           "witness_0000ns.csv", "summary.csv", "manifest.json"}) {
    CHECK(fs::exists(dir / "full" / name));
  }
}
