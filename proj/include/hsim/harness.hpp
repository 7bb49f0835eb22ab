// Copyright 2026 The hsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Metalens scenario driver: dithered graded-index slab, plane pulse launch,
// quantum-path and finite-difference evolution, focal scan.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <istream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hsim/compression.hpp"
#include "hsim/error.hpp"
#include "hsim/evolution.hpp"
#include "hsim/fdm.hpp"
#include "hsim/grid.hpp"
#include "hsim/observables.hpp"
#include "hsim/operators.hpp"

namespace hsim {

struct ScenarioConfig {
  std::size_t nx = 64;
  std::size_t ny = 64;
  double h = 1.0;
  Boundary bc = Boundary::dirichlet;
  double c_vacuum = 1.0;
  double c_material = 0.45;
  // Lens: slab rows [lens_top, lens_top + thickness), fill profile
  // max(0, 1 - |2 (x - center) / diameter|^exponent).
  int thickness = 8;
  int lens_top = 7;
  double lens_center = 31.5;
  double lens_diameter = 68.0;
  double lens_exponent = 4.0;
  double pulse_row = 2.0;
  double pulse_sigma = 1.0;
  double dt = 0.01;
  double t_final = 70.0;
  Method method = Method::trotter1;
  std::size_t snapshot_stride = 10;
  std::size_t write_stride = 0;  // 0: no trajectory files
  std::size_t monitor_x0 = 28;
  std::size_t monitor_width = 8;
  std::size_t monitor_height = 4;
  long scan_min = 2;
  long scan_max = -1;  // -1: as far as the grid allows
  double window_start = 0.0;
  double window_end = 70.0;
  Metric metric = Metric::ez_power;
  CompressionMode compress_mode = CompressionMode::heuristic;
  bool run_fdm = true;

  GridSpec grid() const {
    auto qubits = [](std::size_t n) {
      int q = 0;
      while ((std::size_t{1} << q) < n) ++q;
      return q;
    };
    GridSpec g;
    g.dim = 2;
    g.qubits = {qubits(nx), qubits(ny), 0};
    g.h = h;
    g.bc.fill(bc);
    g.validate();
    return g;
  }

  int lens_bottom() const { return lens_top + thickness; }

  std::size_t n_steps() const { return static_cast<std::size_t>(std::llround(t_final / dt)); }

  long max_offset() const {
    const long limit = static_cast<long>(ny) - 2 - lens_bottom();
    return scan_max < 0 ? limit : std::min(scan_max, limit);
  }

  void validate() const {
    auto pow2 = [](std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; };
    if (!pow2(nx) || !pow2(ny)) throw ConfigError("grid extents must be powers of two");
    if (!(h > 0.0)) throw ConfigError("h must be positive");
    if (!(c_vacuum > 0.0) || !(c_material > 0.0)) throw ConfigError("wave speeds must be positive");
    if (thickness < 1 || lens_top < 0 || lens_bottom() > static_cast<int>(ny))
      throw ConfigError("lens does not fit inside the grid");
    if (!(lens_diameter > 0.0) || !(lens_exponent > 0.0)) throw ConfigError("lens profile must be positive");
    if (!(pulse_sigma > 0.0)) throw ConfigError("pulse width must be positive");
    if (!(dt > 0.0) || !(t_final > 0.0)) throw ConfigError("dt and T must be positive");
    if (std::abs(t_final / dt - static_cast<double>(n_steps())) > 1e-6)
      throw ConfigError("T must be an integer multiple of dt");
    if (snapshot_stride < 1) throw ConfigError("snapshot_stride must be at least 1");
    if (monitor_width < 1 || monitor_height < 1 || monitor_x0 + monitor_width > nx)
      throw ConfigError("monitor region does not fit inside the grid");
    if (scan_min < 0 || max_offset() < scan_min) throw ConfigError("empty scan range");
    if (!(window_end > window_start)) throw ConfigError("empty scan window");
  }
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  }
}

inline long parse_long(const std::string& key, const std::string& v) {
  const double d = parse_double(key, v);
  if (d != std::floor(d)) throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  return static_cast<long>(d);
}

inline std::size_t parse_count(const std::string& key, const std::string& v) {
  const long n = parse_long(key, v);
  if (n < 0) throw ConfigError("config: '" + key + "' must be non-negative");
  return static_cast<std::size_t>(n);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: '" + key + "' expects a boolean, got '" + v + "'");
}

}  // namespace detail

inline void apply_config_value(ScenarioConfig& c, const std::string& key, const std::string& v) {
  using namespace detail;
  if (key == "grid") {
    const auto x = v.find('x');
    if (x == std::string::npos) throw ConfigError("config: grid expects NXxNY, got '" + v + "'");
    c.nx = parse_count(key, v.substr(0, x));
    c.ny = parse_count(key, v.substr(x + 1));
  } else if (key == "nx") {
    c.nx = parse_count(key, v);
  } else if (key == "ny") {
    c.ny = parse_count(key, v);
  } else if (key == "h") {
    c.h = parse_double(key, v);
  } else if (key == "bc") {
    c.bc = parse_boundary(v);
  } else if (key == "c_vacuum") {
    c.c_vacuum = parse_double(key, v);
  } else if (key == "c_material") {
    c.c_material = parse_double(key, v);
  } else if (key == "thickness" || key == "w") {
    c.thickness = static_cast<int>(parse_long(key, v));
  } else if (key == "lens_top") {
    c.lens_top = static_cast<int>(parse_long(key, v));
  } else if (key == "lens_center") {
    c.lens_center = parse_double(key, v);
  } else if (key == "lens_diameter") {
    c.lens_diameter = parse_double(key, v);
  } else if (key == "lens_exponent") {
    c.lens_exponent = parse_double(key, v);
  } else if (key == "pulse_row") {
    c.pulse_row = parse_double(key, v);
  } else if (key == "pulse_sigma") {
    c.pulse_sigma = parse_double(key, v);
  } else if (key == "dt") {
    c.dt = parse_double(key, v);
  } else if (key == "T" || key == "t_final") {
    c.t_final = parse_double(key, v);
  } else if (key == "method") {
    c.method = parse_method(v);
  } else if (key == "snapshot_stride") {
    c.snapshot_stride = parse_count(key, v);
  } else if (key == "write_stride") {
    c.write_stride = parse_count(key, v);
  } else if (key == "monitor_x0") {
    c.monitor_x0 = parse_count(key, v);
  } else if (key == "monitor_width") {
    c.monitor_width = parse_count(key, v);
  } else if (key == "monitor_height") {
    c.monitor_height = parse_count(key, v);
  } else if (key == "scan_min") {
    c.scan_min = parse_long(key, v);
  } else if (key == "scan_max") {
    c.scan_max = parse_long(key, v);
  } else if (key == "window_start") {
    c.window_start = parse_double(key, v);
  } else if (key == "window_end") {
    c.window_end = parse_double(key, v);
  } else if (key == "metric") {
    if (v == "ez")
      c.metric = Metric::ez_power;
    else if (v == "projector")
      c.metric = Metric::projector;
    else
      throw ConfigError("config: metric must be 'ez' or 'projector'");
  } else if (key == "compress_mode") {
    c.compress_mode = parse_compression_mode(v);
  } else if (key == "fdm") {
    c.run_fdm = parse_bool(key, v);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

// Flat "key = value" text; '#' starts a comment.
inline ScenarioConfig parse_config(std::istream& is, ScenarioConfig base = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(trimmed.substr(0, eq));
    const std::string value = detail::trim(trimmed.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    apply_config_value(base, key, value);
  }
  base.validate();
  return base;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  return parse_config(in);
}

inline void write_config(std::ostream& os, const ScenarioConfig& c) {
  os << "grid = " << c.nx << 'x' << c.ny << '\n'
     << "h = " << c.h << '\n'
     << "bc = " << to_string(c.bc) << '\n'
     << "c_vacuum = " << c.c_vacuum << '\n'
     << "c_material = " << c.c_material << '\n'
     << "thickness = " << c.thickness << '\n'
     << "lens_top = " << c.lens_top << '\n'
     << "lens_center = " << c.lens_center << '\n'
     << "lens_diameter = " << c.lens_diameter << '\n'
     << "lens_exponent = " << c.lens_exponent << '\n'
     << "pulse_row = " << c.pulse_row << '\n'
     << "pulse_sigma = " << c.pulse_sigma << '\n'
     << "dt = " << c.dt << '\n'
     << "T = " << c.t_final << '\n'
     << "method = " << to_string(c.method) << '\n'
     << "snapshot_stride = " << c.snapshot_stride << '\n'
     << "write_stride = " << c.write_stride << '\n'
     << "monitor_x0 = " << c.monitor_x0 << '\n'
     << "monitor_width = " << c.monitor_width << '\n'
     << "monitor_height = " << c.monitor_height << '\n'
     << "scan_min = " << c.scan_min << '\n'
     << "scan_max = " << c.scan_max << '\n'
     << "window_start = " << c.window_start << '\n'
     << "window_end = " << c.window_end << '\n'
     << "metric = " << (c.metric == Metric::ez_power ? "ez" : "projector") << '\n'
     << "compress_mode = " << (c.compress_mode == CompressionMode::exact ? "exact" : "heuristic") << '\n'
     << "fdm = " << (c.run_fdm ? "true" : "false") << '\n';
}

// ---------------------------------------------------------------------------
// Patterns
// ---------------------------------------------------------------------------

inline constexpr std::array<std::array<int, 4>, 4> kBayer4{{{0, 8, 2, 10}, {12, 4, 14, 6}, {3, 11, 1, 9}, {15, 7, 13, 5}}};

inline double lens_fill(const ScenarioConfig& c, double x) {
  const double r = std::abs(2.0 * (x - c.lens_center) / c.lens_diameter);
  return std::max(0.0, 1.0 - std::pow(r, c.lens_exponent));
}

// Material occupancy (1 = material) over the spatial index. Column x gets
// round(fill * w) material pixels, placed on the slab rows with the lowest
// Bayer thresholds B[k mod 4][(x + k div 4) mod 4] (ties by row).
inline Eigen::VectorXd build_lens_pattern(const ScenarioConfig& c) {
  c.validate();
  const GridSpec g = c.grid();
  Eigen::VectorXd occ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.num_points()));
  const int w = c.thickness;
  for (std::size_t x = 0; x < c.nx; ++x) {
    const int count = static_cast<int>(std::floor(lens_fill(c, static_cast<double>(x)) * w + 0.5));
    std::vector<std::pair<int, int>> order;
    for (int k = 0; k < w; ++k)
      order.emplace_back(kBayer4[static_cast<std::size_t>(k % 4)][(x + static_cast<std::size_t>(k / 4)) % 4], k);
    std::sort(order.begin(), order.end());
    for (int r = 0; r < count; ++r)
      occ[static_cast<Eigen::Index>(g.index(x, static_cast<std::size_t>(c.lens_top + order[static_cast<std::size_t>(r)].second)))] = 1.0;
  }
  return occ;
}

inline Eigen::VectorXd binary_speeds(const Eigen::VectorXd& occupancy, double c_vacuum, double c_material) {
  return occupancy.unaryExpr([&](double o) { return o != 0.0 ? c_material : c_vacuum; });
}

// Edge-clamped 3x3 mean of the per-pixel speeds.
inline MaterialField smooth_3x3(const GridSpec& grid, const Eigen::VectorXd& occupancy, double c_vacuum,
                                double c_material) {
  if (grid.dim != 2) throw std::invalid_argument("smoothing requires a 2D grid");
  const Eigen::VectorXd speed = binary_speeds(occupancy, c_vacuum, c_material);
  const long nx = static_cast<long>(grid.extent(0)), ny = static_cast<long>(grid.extent(1));
  MaterialField m = MaterialField::uniform(grid);
  for (long x = 0; x < nx; ++x)
    for (long y = 0; y < ny; ++y) {
      double sum = 0.0;
      for (long dx = -1; dx <= 1; ++dx)
        for (long dy = -1; dy <= 1; ++dy) {
          const long xx = std::clamp(x + dx, 0L, nx - 1), yy = std::clamp(y + dy, 0L, ny - 1);
          sum += speed[static_cast<Eigen::Index>(grid.index(static_cast<std::size_t>(xx), static_cast<std::size_t>(yy)))];
        }
      m.c[static_cast<Eigen::Index>(grid.index(static_cast<std::size_t>(x), static_cast<std::size_t>(y)))] = sum / 9.0;
    }
  return m;
}

// Pixel checkerboard: material where the coordinate parities differ.
inline Eigen::VectorXd checker_pattern(const GridSpec& g) {
  Eigen::VectorXd occ(static_cast<Eigen::Index>(g.num_points()));
  for (std::size_t s = 0; s < g.num_points(); ++s) {
    const auto j = g.coords(s);
    occ[static_cast<Eigen::Index>(s)] = ((j[0] ^ j[1]) & 1) ? 1.0 : 0.0;
  }
  return occ;
}

// Stripes constant along y: `period` columns per cycle, the second half
// material.
inline Eigen::VectorXd grating_pattern(const GridSpec& g, std::size_t period = 4) {
  Eigen::VectorXd occ(static_cast<Eigen::Index>(g.num_points()));
  for (std::size_t s = 0; s < g.num_points(); ++s)
    occ[static_cast<Eigen::Index>(s)] = (g.coords(s)[0] % period) >= period / 2 ? 1.0 : 0.0;
  return occ;
}

// ---------------------------------------------------------------------------
// Launch and monitoring
// ---------------------------------------------------------------------------

// u_0 = exp(-(y - pulse_row)^2 / (2 sigma^2)), uniform in x; gradients zero.
inline StateVector build_initial_state(const ScenarioConfig& c) {
  const GridSpec g = c.grid();
  StateVector s = StateVector::tm2d(g);
  for (std::size_t x = 0; x < c.nx; ++x)
    for (std::size_t y = 0; y < c.ny; ++y) {
      const double d = (static_cast<double>(y) - c.pulse_row) / c.pulse_sigma;
      s.amplitudes[static_cast<Eigen::Index>(s.index(0, g.index(x, y)))] = std::exp(-0.5 * d * d);
    }
  s.normalize();
  return s;
}

// Region at distance d (pixels from the lens bottom edge) covers columns
// [x0, x0 + width) and rows [bottom + d - height/2, bottom + d + height/2).
inline RegionMask monitor_region(const ScenarioConfig& c, long distance) {
  const long half = static_cast<long>(c.monitor_height) / 2;
  const long lo = c.lens_bottom() + distance - half;
  const long hi = lo + static_cast<long>(c.monitor_height) - 1;
  if (lo < 0 || hi >= static_cast<long>(c.ny)) throw std::out_of_range("monitor region outside grid");
  return box_region(c.grid(), {c.monitor_x0, static_cast<std::size_t>(lo), 0},
                    {c.monitor_x0 + c.monitor_width - 1, static_cast<std::size_t>(hi), 0});
}

inline std::pair<std::vector<RegionMask>, std::vector<long>> scan_regions(const ScenarioConfig& c) {
  std::vector<RegionMask> regions;
  std::vector<long> offsets;
  for (long d = c.scan_min; d <= c.max_offset(); ++d) {
    regions.push_back(monitor_region(c, d));
    offsets.push_back(d);
  }
  return {regions, offsets};
}

// ---------------------------------------------------------------------------
// Trajectory files
// ---------------------------------------------------------------------------

inline std::string snapshot_name(std::size_t step, const std::string& field) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snap_%06zu_%s.grid", step, field.c_str());
  return buf;
}

inline void write_grid_file(const std::filesystem::path& p, const GridSpec& g, const Eigen::VectorXd& v) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  write_grid_text(out, g, v);
}

inline GridText read_grid_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open '" + p.string() + "'");
  return read_grid_text(in);
}

inline void write_meta(const std::filesystem::path& dir, const std::map<std::string, std::string>& entries) {
  std::ofstream out(dir / "meta.txt");
  for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
}

inline std::map<std::string, std::string> read_meta(const std::filesystem::path& dir) {
  std::ifstream in(dir / "meta.txt");
  if (!in) throw ConfigError("trajectory directory '" + dir.string() + "' has no meta.txt");
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }
  return out;
}

// E_z frames of a trajectory directory, ordered by step.
inline std::vector<FieldFrame> read_ez_frames(const std::filesystem::path& dir, GridSpec* grid = nullptr) {
  const auto meta = read_meta(dir);
  const auto it = meta.find("dt");
  if (it == meta.end()) throw ConfigError("meta.txt lacks dt");
  const double dt = detail::parse_double("dt", it->second);
  const std::regex pattern(R"(snap_(\d+)_ez\.grid)");
  std::vector<std::pair<std::size_t, std::filesystem::path>> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) files.emplace_back(std::stoul(m[1].str()), entry.path());
  }
  if (files.empty()) throw ConfigError("no E_z snapshots in '" + dir.string() + "'");
  std::sort(files.begin(), files.end());
  std::vector<FieldFrame> frames;
  for (const auto& [step, path] : files) {
    const GridText t = read_grid_file(path);
    if (grid && frames.empty()) *grid = grid_from_text(t);
    frames.push_back(FieldFrame{static_cast<double>(step) * dt,
                                Eigen::Map<const Eigen::VectorXd>(t.values.data(), static_cast<Eigen::Index>(t.values.size()))});
  }
  return frames;
}

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

struct ScenarioResult {
  ScenarioConfig config;
  Eigen::VectorXd occupancy;
  MaterialField material;
  CubeTermSet cubes;
  CompressionReport compression;
  double normalization = 1.0;
  std::vector<double> times;
  std::vector<double> norms;
  std::vector<double> padding;
  std::vector<FieldFrame> quantum;
  std::vector<FieldFrame> classical;
  std::vector<double> deviation;
  bool cfl_violation = false;
  FocalScanResult scan;

  long focal_peak() const { return scan.rows[scan.argmax_peak].offset; }
  long focal_accumulated() const { return scan.rows[scan.argmax_accumulated].offset; }

  const RegionMetric& at_distance(long d) const {
    for (const auto& r : scan.rows)
      if (r.offset == d) return r;
    throw std::out_of_range("distance outside scan range");
  }
};

inline void write_focal_csv(std::ostream& os, const FocalScanResult& scan) {
  const auto old_precision = os.precision(17);
  os << "region_offset,peak,accumulated,t_of_peak\n";
  for (const auto& r : scan.rows) os << r.offset << ',' << r.peak << ',' << r.accumulated << ',' << r.t_of_peak << '\n';
  os.precision(old_precision);
}

inline void write_comparison_csv(std::ostream& os, const std::vector<double>& times, const std::vector<double>& dev) {
  const auto old_precision = os.precision(17);
  os << "time,deviation\n";
  for (std::size_t k = 0; k < dev.size(); ++k) os << times[k] << ',' << dev[k] << '\n';
  os.precision(old_precision);
}

namespace detail {

inline std::map<std::string, std::string> trajectory_meta(const ScenarioConfig& c, double normalization) {
  std::ostringstream norm;
  norm.precision(17);
  norm << normalization;
  return {{"dt", std::to_string(c.dt)},
          {"lens_bottom", std::to_string(c.lens_bottom())},
          {"monitor_x0", std::to_string(c.monitor_x0)},
          {"monitor_width", std::to_string(c.monitor_width)},
          {"monitor_height", std::to_string(c.monitor_height)},
          {"scan_min", std::to_string(c.scan_min)},
          {"scan_max", std::to_string(c.max_offset())},
          {"window_start", std::to_string(c.window_start)},
          {"window_end", std::to_string(c.window_end)},
          {"normalization", norm.str()}};
}

}  // namespace detail

// pattern -> smoothing -> compression -> assembly -> quantum and classical
// evolution -> focal scan. Files are written when `out` is non-empty.
inline ScenarioResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& out = {}) {
  config.validate();
  ScenarioResult r;
  r.config = config;
  const GridSpec g = config.grid();
  r.occupancy = build_lens_pattern(config);
  r.material = smooth_3x3(g, r.occupancy, config.c_vacuum, config.c_material);
  const Eigen::VectorXd speeds = binary_speeds(r.occupancy, config.c_vacuum, config.c_material);
  r.cubes = compress_diagonal(speeds, g, config.compress_mode);
  r.compression = compression_report(speeds, r.cubes);

  const HamiltonianOperator h = assemble_tm2d(g, r.material);
  const StateVector psi0 = build_initial_state(config);
  r.normalization = *psi0.normalization;
  const EvolutionPlan plan = make_plan(h, config.method, config.dt, config.t_final, config.snapshot_stride);

  const bool write = !out.empty();
  const std::filesystem::path qdir = out / "quantum", cdir = out / "classical";
  if (write) {
    std::filesystem::create_directories(out);
    if (config.write_stride > 0) {
      std::filesystem::create_directories(qdir);
      std::filesystem::create_directories(cdir);
      for (const auto& d : {qdir, cdir}) {
        write_meta(d, detail::trajectory_meta(config, r.normalization));
        write_grid_file(d / "material.grid", g, r.material.c);
      }
    }
  }
  const bool keep_files = write && config.write_stride > 0;

  if (config.run_fdm) {
    const WaveSolver solver(g, r.material);
    WaveField f = solver.initial(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.num_points())),
                                 -reconstruct_Ez(psi0, r.material));
    auto record = [&](std::size_t step) {
      if (step % config.snapshot_stride == 0 || step == plan.n_steps) r.classical.push_back({f.t, solver.ez(f)});
      if (keep_files && step % config.write_stride == 0)
        write_grid_file(cdir / snapshot_name(step, "ez"), g, solver.ez(f));
    };
    record(0);
    for (std::size_t k = 1; k <= plan.n_steps; ++k) {
      f = solver.leapfrog_step(f, config.dt);
      f.t = static_cast<double>(k) * config.dt;
      record(k);
    }
    r.cfl_violation = f.cfl_violation;
  }

  evolve(psi0, plan, h, [&](std::size_t step, double t, const StateVector& s) {
    const Eigen::VectorXd ez = reconstruct_Ez(s, r.material);
    r.times.push_back(t);
    r.norms.push_back(s.norm());
    r.padding.push_back(s.padding_weight());
    if (config.run_fdm) r.deviation.push_back(relative_l2(ez, r.classical[r.quantum.size()].ez));
    if (keep_files && step % config.write_stride == 0) write_grid_file(qdir / snapshot_name(step, "ez"), g, ez);
    r.quantum.push_back({t, ez});
  });

  auto [regions, offsets] = scan_regions(config);
  const Eigen::VectorXd weights = projector_weights(r.material, r.normalization);
  r.scan = focal_scan(r.quantum, regions, offsets, config.window_start, config.window_end,
                      config.metric == Metric::projector ? &weights : nullptr);

  if (write) {
    {
      std::ofstream f(out / "focal.csv");
      write_focal_csv(f, r.scan);
    }
    {
      std::ofstream f(out / "compression.txt");
      print_report_table(f, {"w=" + std::to_string(config.thickness)}, {r.compression});
    }
    {
      std::ofstream f(out / "cubes.txt");
      write_cube_list(f, r.cubes);
    }
    if (config.run_fdm) {
      std::ofstream f(out / "comparison.csv");
      write_comparison_csv(f, r.times, r.deviation);
    }
    {
      std::ofstream f(out / "norms.csv");
      f.precision(17);
      f << "time,norm,padding\n";
      for (std::size_t k = 0; k < r.times.size(); ++k) f << r.times[k] << ',' << r.norms[k] << ',' << r.padding[k] << '\n';
    }
    {
      std::ofstream f(out / "config.txt");
      write_config(f, config);
    }
    write_grid_file(out / "pattern.grid", g, r.occupancy);
    write_grid_file(out / "material.grid", g, r.material.c);
  }
  return r;
}

// One scenario per thickness, each on its own thread.
inline std::vector<ScenarioResult> sweep_thickness(const ScenarioConfig& base, const std::vector<int>& thicknesses,
                                                   const std::filesystem::path& out = {}) {
  std::vector<std::future<ScenarioResult>> jobs;
  for (int w : thicknesses) {
    ScenarioConfig c = base;
    c.thickness = w;
    const std::filesystem::path dir = out.empty() ? out : out / ("w" + std::to_string(w));
    jobs.push_back(std::async(std::launch::async, [c, dir] { return run_scenario(c, dir); }));
  }
  std::vector<ScenarioResult> results;
  for (auto& j : jobs) results.push_back(j.get());
  return results;
}

}  // namespace hsim
