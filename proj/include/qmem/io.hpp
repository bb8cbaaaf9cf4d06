#ifndef QMEM_IO_HPP
#define QMEM_IO_HPP

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmem/analysis.hpp"
#include "qmem/fock.hpp"
#include "qmem/homodyne.hpp"

// File formats. All floating-point text is written with %.17g so that values
// round-trip exactly and reruns produce byte-identical files.
//
//   density matrix : JSON object {"dim": d, "re": [...], "im": [...]},
//                    row-major element order
//   samples        : CSV "theta_rad,x" per line, header "# theta_rad,x"
//   Wigner grid    : header "# x_min x_max p_min p_max step", then one
//                    space-separated row of values per p-line
//   witness curve  : CSV "gamma,zeta_opt,delta" per line
//   traces         : binary, 16-byte header (magic "QTRC", u32 version,
//                    u32 n_traces, u32 n_bins), then n_bins float64 bin times
//                    in ns, then n_traces*n_bins float64 values row-major

namespace qmem {

namespace detail {

inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  return out;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "' for reading");
  }
  return in;
}

}  // namespace detail

inline void save_density_matrix(const std::filesystem::path& path, const DensityMatrix& rho) {
  auto out = detail::open_output(path);
  const int d = rho.dim();
  out << "{\n  \"dim\": " << d << ",\n  \"re\": [";
  for (int m = 0; m < d; ++m) {
    for (int n = 0; n < d; ++n) {
      if (m + n > 0) out << ", ";
      out << detail::fmt_g17(rho.element(m, n).real());
    }
  }
  out << "],\n  \"im\": [";
  for (int m = 0; m < d; ++m) {
    for (int n = 0; n < d; ++n) {
      if (m + n > 0) out << ", ";
      out << detail::fmt_g17(rho.element(m, n).imag());
    }
  }
  out << "]\n}\n";
}

inline DensityMatrix load_density_matrix(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed density-matrix file '" + path.string() + "': " + e.what());
  }
  if (!doc.contains("dim") || !doc.contains("re") || !doc.contains("im")) {
    throw IoError("density-matrix file '" + path.string() + "' missing dim/re/im fields");
  }
  const int d = doc["dim"].get<int>();
  const auto& re = doc["re"];
  const auto& im = doc["im"];
  if (static_cast<int>(re.size()) != d * d || static_cast<int>(im.size()) != d * d) {
    throw IoError("density-matrix file '" + path.string() + "' has wrong element count");
  }
  CMatrix m(d, d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      m(r, c) = Complex(re[r * d + c].get<double>(), im[r * d + c].get<double>());
    }
  }
  return DensityMatrix::from_matrix(std::move(m));
}

inline void save_samples(const std::filesystem::path& path,
                         const std::vector<QuadratureSample>& samples) {
  auto out = detail::open_output(path);
  out << "# theta_rad,x\n";
  for (const auto& s : samples) {
    out << detail::fmt_g17(s.theta) << ',' << detail::fmt_g17(s.x) << '\n';
  }
}

inline std::vector<QuadratureSample> load_samples(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::vector<QuadratureSample> samples;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw IoError("samples file '" + path.string() + "' line " + std::to_string(lineno) +
                    ": expected 'theta_rad,x'");
    }
    try {
      samples.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    } catch (const std::exception&) {
      throw IoError("samples file '" + path.string() + "' line " + std::to_string(lineno) +
                    ": unparsable number");
    }
  }
  return samples;
}

inline void save_wigner_grid(const std::filesystem::path& path, const WignerGrid& grid) {
  auto out = detail::open_output(path);
  out << "# " << detail::fmt_g17(grid.x_min) << ' ' << detail::fmt_g17(grid.x_max) << ' '
      << detail::fmt_g17(grid.p_min) << ' ' << detail::fmt_g17(grid.p_max) << ' '
      << detail::fmt_g17(grid.step) << '\n';
  for (int i = 0; i < grid.np(); ++i) {
    for (int j = 0; j < grid.nx(); ++j) {
      if (j > 0) out << ' ';
      out << detail::fmt_g17(grid.values(i, j));
    }
    out << '\n';
  }
}

inline WignerGrid load_wigner_grid(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::string line;
  if (!std::getline(in, line) || line.size() < 2 || line[0] != '#') {
    throw IoError("Wigner grid file '" + path.string() + "' missing header");
  }
  WignerGrid grid;
  {
    std::istringstream head(line.substr(1));
    if (!(head >> grid.x_min >> grid.x_max >> grid.p_min >> grid.p_max >> grid.step)) {
      throw IoError("Wigner grid file '" + path.string() + "' has malformed header");
    }
  }
  const int nx = static_cast<int>(std::floor((grid.x_max - grid.x_min) / grid.step + 1e-9)) + 1;
  const int np = static_cast<int>(std::floor((grid.p_max - grid.p_min) / grid.step + 1e-9)) + 1;
  grid.values.resize(np, nx);
  for (int i = 0; i < np; ++i) {
    if (!std::getline(in, line)) {
      throw IoError("Wigner grid file '" + path.string() + "' truncated at row " +
                    std::to_string(i));
    }
    std::istringstream row(line);
    for (int j = 0; j < nx; ++j) {
      if (!(row >> grid.values(i, j))) {
        throw IoError("Wigner grid file '" + path.string() + "' short row " + std::to_string(i));
      }
    }
  }
  grid.integral = grid.values.sum() * grid.step * grid.step;
  return grid;
}

inline void save_witness_curve(const std::filesystem::path& path, const WitnessCurve& curve) {
  auto out = detail::open_output(path);
  for (const auto& pt : curve.points) {
    out << detail::fmt_g17(pt.gamma) << ',' << detail::fmt_g17(pt.zeta_opt) << ','
        << detail::fmt_g17(pt.delta) << '\n';
  }
}

inline constexpr char kTraceMagic[4] = {'Q', 'T', 'R', 'C'};
inline constexpr std::uint32_t kTraceVersion = 1;

inline void save_traces(const std::filesystem::path& path, const std::vector<RawTrace>& traces) {
  if (traces.empty()) {
    throw IoError("save_traces: empty trace list");
  }
  auto out = detail::open_output(path);
  const TemporalGrid grid = traces.front().grid;
  const auto n_traces = static_cast<std::uint32_t>(traces.size());
  const auto n_bins = static_cast<std::uint32_t>(grid.n_bins);
  out.write(kTraceMagic, 4);
  out.write(reinterpret_cast<const char*>(&kTraceVersion), 4);
  out.write(reinterpret_cast<const char*>(&n_traces), 4);
  out.write(reinterpret_cast<const char*>(&n_bins), 4);
  for (int i = 0; i < grid.n_bins; ++i) {
    const double t = grid.time(i);
    out.write(reinterpret_cast<const char*>(&t), 8);
  }
  for (const auto& trace : traces) {
    if (!(trace.grid == grid)) {
      throw GridMismatchError("save_traces: traces share no common grid");
    }
    out.write(reinterpret_cast<const char*>(trace.values.data()),
              static_cast<std::streamsize>(8 * grid.n_bins));
  }
}

inline std::vector<RawTrace> load_traces(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  char magic[4];
  std::uint32_t version = 0, n_traces = 0, n_bins = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&n_traces), 4);
  in.read(reinterpret_cast<char*>(&n_bins), 4);
  if (!in || std::memcmp(magic, kTraceMagic, 4) != 0) {
    throw IoError("trace file '" + path.string() + "' has a bad magic header");
  }
  if (version != kTraceVersion) {
    throw IoError("trace file '" + path.string() + "' has unsupported version " +
                  std::to_string(version));
  }
  std::vector<double> times(n_bins);
  in.read(reinterpret_cast<char*>(times.data()), static_cast<std::streamsize>(8 * n_bins));
  TemporalGrid grid;
  grid.n_bins = static_cast<int>(n_bins);
  grid.t0_ns = n_bins > 0 ? times[0] : 0.0;
  grid.dt_ns = n_bins > 1 ? times[1] - times[0] : 1.0;
  std::vector<RawTrace> traces;
  traces.reserve(n_traces);
  for (std::uint32_t k = 0; k < n_traces; ++k) {
    Eigen::VectorXd v(n_bins);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(8 * n_bins));
    if (!in) {
      throw IoError("trace file '" + path.string() + "' truncated at trace " + std::to_string(k));
    }
    traces.push_back(RawTrace{grid, std::move(v)});
  }
  return traces;
}

inline void save_temporal_mode(const std::filesystem::path& path, const TemporalMode& mode) {
  auto out = detail::open_output(path);
  out << "# t_ns,weight\n";
  for (int i = 0; i < mode.grid.n_bins; ++i) {
    out << detail::fmt_g17(mode.grid.time(i)) << ',' << detail::fmt_g17(mode.weights(i)) << '\n';
  }
}

}  // namespace qmem

#endif  // QMEM_IO_HPP
