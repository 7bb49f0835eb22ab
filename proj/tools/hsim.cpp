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

// hsim command line: run, compress, scan, compare, evolve, operator.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsim/hsim.hpp"

namespace fs = std::filesystem;
using namespace hsim;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(detail::trim(item));
  return out;
}

std::ostream& open_or_stdout(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw ConfigError("cannot write '" + path + "'");
  return file;
}

void print_summary(const ScenarioResult& r) {
  std::printf("w=%d  focal(peak)=%ld  focal(accumulated)=%ld  compression %zu->%zu", r.config.thickness,
              r.focal_peak(), r.focal_accumulated(), r.compression.before, r.compression.after);
  if (!r.deviation.empty()) std::printf("  max deviation vs FDM %.3e", *std::max_element(r.deviation.begin(), r.deviation.end()));
  if (r.cfl_violation) std::printf("  [CFL violated]");
  std::printf("\n");
}

// --- run -------------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::string out = "hsim_out";
  std::vector<int> sweep;
};

void cmd_run(const RunArgs& a) {
  const ScenarioConfig c = load_config(a.config);
  if (a.sweep.empty()) {
    print_summary(run_scenario(c, a.out));
    return;
  }
  const auto results = sweep_thickness(c, a.sweep, a.out);
  std::vector<std::string> names;
  std::vector<CompressionReport> reports;
  for (const auto& r : results) {
    print_summary(r);
    names.push_back("w=" + std::to_string(r.config.thickness));
    reports.push_back(r.compression);
  }
  print_report_table(std::cout, names, reports);
}

// --- compress --------------------------------------------------------------

struct CompressArgs {
  std::vector<std::string> patterns;
  std::string mode = "heuristic";
  std::string out;
};

void cmd_compress(const CompressArgs& a) {
  const CompressionMode mode = parse_compression_mode(a.mode);
  std::vector<std::string> names;
  std::vector<CompressionReport> reports;
  if (!a.out.empty()) fs::create_directories(a.out);
  for (const auto& p : a.patterns) {
    const GridText t = read_grid_file(p);
    const GridSpec g = grid_from_text(t);
    const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(t.values.data(), static_cast<Eigen::Index>(t.values.size()));
    const CubeTermSet cubes = compress_diagonal(v, g, mode);
    if (!a.out.empty()) {
      std::ofstream f(fs::path(a.out) / (fs::path(p).stem().string() + ".cubes"));
      write_cube_list(f, cubes);
    }
    names.push_back(fs::path(p).stem().string());
    reports.push_back(compression_report(v, cubes));
  }
  print_report_table(std::cout, names, reports);
}

// --- scan ------------------------------------------------------------------

struct ScanArgs {
  std::string traj;
  std::vector<std::string> regions;
  std::string metric = "ez";
  double t0 = -1.0;
  double t1 = -1.0;
  std::string out;
};

long meta_long(const std::map<std::string, std::string>& meta, const std::string& key) {
  const auto it = meta.find(key);
  if (it == meta.end()) throw ConfigError("meta.txt lacks " + key);
  return detail::parse_long(key, it->second);
}

double meta_double(const std::map<std::string, std::string>& meta, const std::string& key, double fallback) {
  const auto it = meta.find(key);
  return it == meta.end() ? fallback : detail::parse_double(key, it->second);
}

void cmd_scan(const ScanArgs& a) {
  const fs::path dir(a.traj);
  const auto meta = read_meta(dir);
  GridSpec g;
  const std::vector<FieldFrame> frames = read_ez_frames(dir, &g);
  std::vector<RegionMask> regions;
  std::vector<long> offsets;
  if (!a.regions.empty()) {
    for (std::size_t k = 0; k < a.regions.size(); ++k) {
      regions.push_back(parse_region(g, std::string_view(a.regions[k])));
      offsets.push_back(static_cast<long>(k));
    }
  } else {
    const long bottom = meta_long(meta, "lens_bottom");
    const long x0 = meta_long(meta, "monitor_x0"), width = meta_long(meta, "monitor_width");
    const long height = meta_long(meta, "monitor_height");
    for (long d = meta_long(meta, "scan_min"); d <= meta_long(meta, "scan_max"); ++d) {
      const long lo = bottom + d - height / 2;
      regions.push_back(box_region(g, {static_cast<std::size_t>(x0), static_cast<std::size_t>(lo), 0},
                                   {static_cast<std::size_t>(x0 + width - 1), static_cast<std::size_t>(lo + height - 1), 0}));
      offsets.push_back(d);
    }
  }
  const double t0 = a.t0 >= 0.0 ? a.t0 : meta_double(meta, "window_start", frames.front().time);
  const double t1 = a.t1 >= 0.0 ? a.t1 : meta_double(meta, "window_end", frames.back().time);
  Eigen::VectorXd weights;
  if (a.metric == "projector") {
    const GridText m = read_grid_file(dir / "material.grid");
    const MaterialField material{Eigen::Map<const Eigen::VectorXd>(m.values.data(), static_cast<Eigen::Index>(m.values.size()))};
    material.validate(g);
    weights = projector_weights(material, meta_double(meta, "normalization", 1.0));
  } else if (a.metric != "ez") {
    throw ConfigError("metric must be 'ez' or 'projector'");
  }
  const FocalScanResult r = focal_scan(frames, regions, offsets, t0, t1, weights.size() ? &weights : nullptr);
  std::ofstream file;
  write_focal_csv(open_or_stdout(a.out, file), r);
}

// --- compare ---------------------------------------------------------------

struct CompareArgs {
  std::string quantum;
  std::string classical;
  std::string out;
};

void cmd_compare(const CompareArgs& a) {
  const auto q = read_ez_frames(a.quantum), c = read_ez_frames(a.classical);
  std::vector<Eigen::VectorXd> qe, ce;
  std::vector<double> times;
  std::size_t j = 0;
  for (const auto& f : q) {
    while (j < c.size() && c[j].time < f.time - 1e-9) ++j;
    if (j == c.size()) break;
    if (std::abs(c[j].time - f.time) > 1e-9) continue;
    times.push_back(f.time);
    qe.push_back(f.ez);
    ce.push_back(c[j].ez);
  }
  if (times.empty()) throw ConfigError("trajectories share no snapshot times");
  std::ofstream file;
  write_comparison_csv(open_or_stdout(a.out, file), times, compare_to_quantum(ce, qe));
}

// --- evolve ----------------------------------------------------------------

struct EvolveArgs {
  std::string grid = "32x32";
  std::string material;
  double h = 1.0;
  std::string bc = "dirichlet";
  std::string method = "trotter1";
  double dt = 0.01;
  double t_final = 1.0;
  std::size_t stride = 10;
  std::string init = "gaussian:15.5,15.5,2";
  std::string out = "hsim_evolve";
};

GridSpec grid_from_extents(const std::string& text, double h, Boundary bc) {
  const auto parts = split(text, 'x');
  if (parts.size() != 2) throw ConfigError("--grid expects NXxNY");
  std::array<std::size_t, 3> n{1, 1, 1};
  for (std::size_t a = 0; a < 2; ++a) n[a] = detail::parse_count("grid", parts[a]);
  GridText t;
  t.shape = n;
  t.h = h;
  return grid_from_text(t, bc);
}

StateVector initial_state(const GridSpec& g, const std::string& spec) {
  StateVector s = StateVector::tm2d(g);
  if (spec.rfind("gaussian:", 0) == 0) {
    const auto p = split(spec.substr(9), ',');
    if (p.size() != 3) throw ConfigError("--init gaussian:X0,Y0,SIGMA");
    const double x0 = detail::parse_double("init", p[0]), y0 = detail::parse_double("init", p[1]);
    const double sigma = detail::parse_double("init", p[2]);
    for (std::size_t k = 0; k < g.num_points(); ++k) {
      const auto j = g.coords(k);
      const double dx = static_cast<double>(j[0]) - x0, dy = static_cast<double>(j[1]) - y0;
      s.amplitudes[static_cast<Eigen::Index>(k)] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
    }
  } else {
    const GridText t = read_grid_file(spec);
    if (t.values.size() != g.num_points()) throw ConfigError("initial field does not match the grid");
    for (std::size_t k = 0; k < g.num_points(); ++k) s.amplitudes[static_cast<Eigen::Index>(k)] = t.values[k];
  }
  if (s.norm() == 0.0) throw ConfigError("initial field is zero");
  s.normalize();
  return s;
}

void cmd_evolve(const EvolveArgs& a) {
  const Boundary bc = parse_boundary(a.bc);
  GridSpec g;
  MaterialField m;
  if (!a.material.empty()) {
    const GridText t = read_grid_file(a.material);
    g = grid_from_text(t, bc);
    m.c = Eigen::Map<const Eigen::VectorXd>(t.values.data(), static_cast<Eigen::Index>(t.values.size()));
  } else {
    g = grid_from_extents(a.grid, a.h, bc);
    m = MaterialField::uniform(g);
  }
  if (g.dim != 2) throw ConfigError("evolve expects a 2D grid");
  m.validate(g);
  const HamiltonianOperator h = assemble_tm2d(g, m);
  const StateVector psi = initial_state(g, a.init);
  const EvolutionPlan plan = make_plan(h, parse_method(a.method), a.dt, a.t_final, a.stride);
  const fs::path out(a.out);
  fs::create_directories(out);
  std::ostringstream norm;
  norm.precision(17);
  norm << *psi.normalization;
  write_meta(out, {{"dt", std::to_string(a.dt)}, {"method", std::string(to_string(plan.method))},
                   {"normalization", norm.str()}});
  write_grid_file(out / "material.grid", g, m.c);
  std::ofstream norms(out / "norms.csv");
  norms.precision(17);
  norms << "time,norm\n";
  evolve(psi, plan, h, [&](std::size_t step, double t, const StateVector& s) {
    for (int mu = 0; mu < s.components; ++mu) {
      write_grid_file(out / snapshot_name(step, "u" + std::to_string(mu) + "_re"), g, s.component(mu).real());
      write_grid_file(out / snapshot_name(step, "u" + std::to_string(mu) + "_im"), g, s.component(mu).imag());
    }
    write_grid_file(out / snapshot_name(step, "ez"), g, reconstruct_Ez(s, m));
    norms << t << ',' << s.norm() << '\n';
  });
  std::printf("%zu steps, snapshots in %s\n", plan.n_steps, out.string().c_str());
}

// --- operator --------------------------------------------------------------

struct OperatorArgs {
  std::string material;
  std::string bc = "dirichlet";
  std::string out;
};

void cmd_operator(const OperatorArgs& a) {
  const GridText t = read_grid_file(a.material);
  const GridSpec g = grid_from_text(t, parse_boundary(a.bc));
  const MaterialField m{Eigen::Map<const Eigen::VectorXd>(t.values.data(), static_cast<Eigen::Index>(t.values.size()))};
  const HamiltonianOperator h = g.dim == 3 ? assemble_full3d(g, m) : assemble_tm2d(g, m);
  std::ofstream file;
  write_coordinate_list(open_or_stdout(a.out, file), h.total);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamiltonian simulation of discretized wave fields"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a lens scenario from a config file");
  run_cmd->add_option("--config", run.config, "Flat key = value config")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--sweep", run.sweep, "Thicknesses to sweep (one run per value)")->delimiter(',');

  CompressArgs comp;
  auto* comp_cmd = app.add_subcommand("compress", "Compress grid-text fields into cube terms");
  comp_cmd->add_option("--pattern", comp.patterns, "Grid-text field (repeatable)")->required()->check(CLI::ExistingFile);
  comp_cmd->add_option("--mode", comp.mode, "heuristic or exact");
  comp_cmd->add_option("--out", comp.out, "Directory for <name>.cubes files");

  ScanArgs scan;
  auto* scan_cmd = app.add_subcommand("scan", "Focal scan over a trajectory directory");
  scan_cmd->add_option("--traj", scan.traj, "Trajectory directory")->required()->check(CLI::ExistingDirectory);
  scan_cmd->add_option("--region", scan.regions, "Region as 'px,py;px,py' (repeatable); default: monitor rows from meta.txt");
  scan_cmd->add_option("--metric", scan.metric, "ez or projector");
  scan_cmd->add_option("--t0", scan.t0, "Window start");
  scan_cmd->add_option("--t1", scan.t1, "Window end");
  scan_cmd->add_option("--out", scan.out, "CSV path (default stdout)");

  CompareArgs cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Per-snapshot deviation of quantum against classical E_z");
  cmp_cmd->add_option("--quantum", cmp.quantum)->required()->check(CLI::ExistingDirectory);
  cmp_cmd->add_option("--classical", cmp.classical)->required()->check(CLI::ExistingDirectory);
  cmp_cmd->add_option("--out", cmp.out, "CSV path (default stdout)");

  EvolveArgs ev;
  auto* ev_cmd = app.add_subcommand("evolve", "Evolve a TM field and write per-component snapshots");
  ev_cmd->add_option("--grid", ev.grid, "NXxNY (uniform medium)");
  ev_cmd->add_option("--material", ev.material, "Grid-text wave speeds (overrides --grid)");
  ev_cmd->add_option("--spacing", ev.h, "Grid spacing h");
  ev_cmd->add_option("--bc", ev.bc, "dirichlet, neumann or periodic");
  ev_cmd->add_option("--method", ev.method, "trotter1, exact or rk4");
  ev_cmd->add_option("--dt", ev.dt);
  ev_cmd->add_option("--T", ev.t_final);
  ev_cmd->add_option("--stride", ev.stride, "Snapshot stride in steps");
  ev_cmd->add_option("--init", ev.init, "gaussian:X0,Y0,SIGMA or a grid-text u_0 file");
  ev_cmd->add_option("--out", ev.out, "Output directory");

  OperatorArgs op;
  auto* op_cmd = app.add_subcommand("operator", "Export the Hamiltonian as a coordinate list");
  op_cmd->add_option("--material", op.material, "Grid-text wave speeds")->required()->check(CLI::ExistingFile);
  op_cmd->add_option("--bc", op.bc);
  op_cmd->add_option("--out", op.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) cmd_run(run);
    if (*comp_cmd) cmd_compress(comp);
    if (*scan_cmd) cmd_scan(scan);
    if (*cmp_cmd) cmd_compare(cmp);
    if (*ev_cmd) cmd_evolve(ev);
    if (*op_cmd) cmd_operator(op);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "hsim: %s\n", e.what());
    return 2;
  } catch (const NumericalGuardError& e) {
    std::fprintf(stderr, "hsim: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "hsim: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "hsim: %s\n", e.what());
    return 1;
  }
  return 0;
}
