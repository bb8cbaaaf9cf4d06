#ifndef QMEM_CONFIG_HPP
#define QMEM_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qmem/channel.hpp"
#include "qmem/errors.hpp"
#include "qmem/prepare.hpp"

// Experiment configuration: flat text, one `key = value` per line, dotted
// keys, `#` starts a comment, lists are comma-separated. Example:
//
//   preparation.mode = ideal        # ideal | herald
//   preparation.alpha = 0.70710678118654752
//   preparation.beta  = 0.70710678118654752
//   preparation.theta = 0.0
//   preparation.eta   = 0.96666666666666663
//   memory.half_life_us = 1.3
//   memory.detuning_khz = 300
//   memory.sigma_deg    = 28
//   memory.extra_loss   = 0.2373
//   storage_times_ns = 0,100,200,300,400
//   phases_deg = 0,30,60,90,120,150
//   n_per_phase = 20000
//   seed = 12345
//   dim = 20
//   recon_dim = 10
//   output_dir = out
//
// Herald mode replaces alpha/beta/theta with preparation.lambda,
// preparation.delta_re, preparation.delta_im, preparation.click_model
// (exact_one_photon | not_vacuum). preparation.eta applies in both modes.
// Unknown keys are errors; every validation message names the offending key.

namespace qmem {

class ConfigMap {
 public:
  static ConfigMap from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
      throw IoError("cannot open config file '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_text(buffer.str());
  }

  static ConfigMap from_text(const std::string& text) {
    ConfigMap map;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
      }
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty()) {
        throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
      }
      if (map.values_.count(key) != 0) {
        throw ConfigError("config error at '" + key + "': duplicate key");
      }
      map.values_[key] = value;
    }
    return map;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    touch(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, std::optional<double> fallback = {}) const {
    touch(key);
    const auto it = values_.find(key);
    if (it == values_.end()) {
      if (fallback) return *fallback;
      throw ConfigError("config error at '" + key + "': required key missing");
    }
    return parse_double(key, it->second);
  }

  std::int64_t get_int(const std::string& key, std::optional<std::int64_t> fallback = {}) const {
    touch(key);
    const auto it = values_.find(key);
    if (it == values_.end()) {
      if (fallback) return *fallback;
      throw ConfigError("config error at '" + key + "': required key missing");
    }
    try {
      std::size_t used = 0;
      const std::int64_t v = std::stoll(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config error at '" + key + "': '" + it->second + "' is not an integer");
    }
  }

  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const {
    touch(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t used = 0;
      const std::uint64_t v = std::stoull(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config error at '" + key + "': '" + it->second + "' is not a u64 seed");
    }
  }

  std::vector<double> get_double_list(const std::string& key,
                                      std::optional<std::vector<double>> fallback = {}) const {
    touch(key);
    const auto it = values_.find(key);
    if (it == values_.end()) {
      if (fallback) return *fallback;
      throw ConfigError("config error at '" + key + "': required key missing");
    }
    std::vector<double> out;
    std::istringstream in(it->second);
    std::string item;
    while (std::getline(in, item, ',')) {
      out.push_back(parse_double(key, trim(item)));
    }
    if (out.empty()) {
      throw ConfigError("config error at '" + key + "': empty list");
    }
    return out;
  }

  /// Call after reading everything: any key never requested is a typo.
  void reject_unknown_keys() const {
    for (const auto& [key, value] : values_) {
      if (touched_.count(key) == 0) {
        throw ConfigError("config error at '" + key + "': unknown key");
      }
    }
  }

  const std::map<std::string, std::string>& raw() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
  }

  double parse_double(const std::string& key, const std::string& text) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config error at '" + key + "': '" + text + "' is not a number");
    }
  }

  void touch(const std::string& key) const { touched_.insert(key); }

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> touched_;
};

enum class PreparationMode { Ideal, Herald };

struct ExperimentConfig {
  PreparationMode prep_mode = PreparationMode::Ideal;
  double alpha = 1.0 / std::sqrt(2.0);
  double beta = 1.0 / std::sqrt(2.0);
  double theta = 0.0;
  PreparationParams prep;       // herald-mode parameters; prep.eta applies in both modes
  MemoryParams memory;
  double extra_loss = 0.0;      // effective t=0 loss applied before storage
  std::vector<double> storage_times_ns{0, 100, 200, 300, 400};
  std::vector<double> phases_rad;  // from phases_deg
  int n_per_phase = 20000;
  std::uint64_t seed = 1;
  int dim = 20;                 // generation truncation
  int recon_dim = 10;           // reconstruction truncation
  std::string output_dir = "out";
  double trial_rate_hz = 0.0;   // optional: report herald rate = P_click * trial rate

  // Analysis knobs with pipeline defaults.
  double wigner_range = 2.0;
  double wigner_step = 0.05;
  double witness_gamma_max = 1.5;
  double witness_gamma_step = 0.05;

  // Trace-simulation block for the temporal-mode pipeline.
  int traces_count = 5000;
  double traces_tau_ns = 50.0;
  double traces_release_ns = 100.0;
  double traces_window_ns = 2000.0;
  double traces_dt_ns = 2.0;

  std::map<std::string, std::string> raw;  // config echo for the manifest

  std::vector<double> gamma_scan() const {
    std::vector<double> gammas;
    for (double g = 0.0; g <= witness_gamma_max + 1e-12; g += witness_gamma_step) {
      gammas.push_back(g);
    }
    return gammas;
  }

  static ExperimentConfig from_file(const std::filesystem::path& path) {
    return from_map(ConfigMap::from_file(path));
  }

  static ExperimentConfig from_map(const ConfigMap& map) {
    ExperimentConfig cfg;
    cfg.raw = map.raw();

    const std::string mode = map.get_string("preparation.mode", "ideal");
    if (mode == "ideal") {
      cfg.prep_mode = PreparationMode::Ideal;
    } else if (mode == "herald") {
      cfg.prep_mode = PreparationMode::Herald;
    } else {
      throw ConfigError("config error at 'preparation.mode': expected 'ideal' or 'herald', got '" +
                        mode + "'");
    }

    cfg.alpha = map.get_double("preparation.alpha", cfg.alpha);
    cfg.beta = map.get_double("preparation.beta", cfg.beta);
    cfg.theta = map.get_double("preparation.theta", cfg.theta);
    if (cfg.prep_mode == PreparationMode::Ideal &&
        std::abs(cfg.alpha * cfg.alpha + cfg.beta * cfg.beta - 1.0) > 1e-9) {
      throw ConfigError("config error at 'preparation.alpha': alpha^2 + beta^2 must equal 1");
    }

    cfg.prep.lambda = map.get_double("preparation.lambda", cfg.prep.lambda);
    if (cfg.prep.lambda < 0.0 || cfg.prep.lambda >= 1.0) {
      throw ConfigError("config error at 'preparation.lambda': must lie in [0,1)");
    }
    cfg.prep.idler_displacement = Complex(map.get_double("preparation.delta_re", 0.0),
                                          map.get_double("preparation.delta_im", 0.0));
    const std::string click = map.get_string("preparation.click_model", "exact_one_photon");
    if (click == "exact_one_photon") {
      cfg.prep.click_model = ClickModel::ExactOnePhoton;
    } else if (click == "not_vacuum") {
      cfg.prep.click_model = ClickModel::NotVacuum;
    } else {
      throw ConfigError("config error at 'preparation.click_model': expected 'exact_one_photon' "
                        "or 'not_vacuum', got '" + click + "'");
    }
    cfg.prep.eta = map.get_double("preparation.eta", 1.0);
    if (cfg.prep.eta < 0.0 || cfg.prep.eta > 1.0) {
      throw ConfigError("config error at 'preparation.eta': must lie in [0,1]");
    }

    const double half_life_us = map.get_double("memory.half_life_us", 1.3);
    if (half_life_us <= 0.0) {
      throw ConfigError("config error at 'memory.half_life_us': must be > 0");
    }
    cfg.memory.half_life = Duration(half_life_us * 1e-6);
    cfg.memory.detuning_hz = map.get_double("memory.detuning_khz", 300.0) * 1e3;
    const double sigma_deg = map.get_double("memory.sigma_deg", 0.0);
    if (sigma_deg < 0.0) {
      throw ConfigError("config error at 'memory.sigma_deg': must be >= 0");
    }
    cfg.memory.dephasing_sigma = sigma_deg * M_PI / 180.0;
    cfg.memory.eta = map.get_double("memory.eta", cfg.prep.eta);
    cfg.extra_loss = map.get_double("memory.extra_loss", 0.0);
    if (cfg.extra_loss < 0.0 || cfg.extra_loss > 1.0) {
      throw ConfigError("config error at 'memory.extra_loss': must lie in [0,1]");
    }

    cfg.storage_times_ns = map.get_double_list("storage_times_ns", cfg.storage_times_ns);
    for (const double t : cfg.storage_times_ns) {
      if (t < 0.0) {
        throw ConfigError("config error at 'storage_times_ns': times must be >= 0");
      }
    }
    const std::vector<double> default_deg{0, 30, 60, 90, 120, 150};
    const std::vector<double> deg = map.get_double_list("phases_deg", default_deg);
    cfg.phases_rad.clear();
    for (const double d : deg) cfg.phases_rad.push_back(d * M_PI / 180.0);

    cfg.n_per_phase = static_cast<int>(map.get_int("n_per_phase", cfg.n_per_phase));
    if (cfg.n_per_phase < 1) {
      throw ConfigError("config error at 'n_per_phase': must be >= 1");
    }
    cfg.seed = map.get_seed("seed", cfg.seed);
    cfg.dim = static_cast<int>(map.get_int("dim", cfg.dim));
    cfg.recon_dim = static_cast<int>(map.get_int("recon_dim", cfg.recon_dim));
    if (cfg.dim < 2 || cfg.recon_dim < 2) {
      throw ConfigError("config error at 'dim': truncation dims must be >= 2");
    }
    cfg.output_dir = map.get_string("output_dir", cfg.output_dir);
    cfg.trial_rate_hz = map.get_double("trial_rate_hz", 0.0);

    cfg.wigner_range = map.get_double("wigner.range", cfg.wigner_range);
    cfg.wigner_step = map.get_double("wigner.step", cfg.wigner_step);
    if (cfg.wigner_range <= 0.0 || cfg.wigner_step <= 0.0) {
      throw ConfigError("config error at 'wigner.range': range and step must be > 0");
    }
    cfg.witness_gamma_max = map.get_double("witness.gamma_max", cfg.witness_gamma_max);
    cfg.witness_gamma_step = map.get_double("witness.gamma_step", cfg.witness_gamma_step);
    if (cfg.witness_gamma_max < 0.0 || cfg.witness_gamma_step <= 0.0) {
      throw ConfigError("config error at 'witness.gamma_step': must be > 0");
    }

    cfg.traces_count = static_cast<int>(map.get_int("traces.n_traces", cfg.traces_count));
    cfg.traces_tau_ns = map.get_double("traces.tau_ns", cfg.traces_tau_ns);
    cfg.traces_release_ns = map.get_double("traces.release_ns", cfg.traces_release_ns);
    cfg.traces_window_ns = map.get_double("traces.window_ns", cfg.traces_window_ns);
    cfg.traces_dt_ns = map.get_double("traces.dt_ns", cfg.traces_dt_ns);
    if (cfg.traces_count < 100) {
      throw ConfigError("config error at 'traces.n_traces': need at least 100 traces");
    }
    if (cfg.traces_tau_ns <= 0.0 || cfg.traces_dt_ns <= 0.0 || cfg.traces_window_ns <= 0.0) {
      throw ConfigError("config error at 'traces.tau_ns': trace geometry must be positive");
    }

    map.reject_unknown_keys();
    return cfg;
  }
};

}  // namespace qmem

#endif  // QMEM_CONFIG_HPP
