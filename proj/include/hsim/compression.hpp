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

// Logical compression of diagonal operators into don't-care cube terms.

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "hsim/error.hpp"
#include "hsim/grid.hpp"

namespace hsim {

// A cube over n spatial bits. `care` marks fixed bits, `bits` holds their
// values (zero wherever care is clear). Bit n-1 is the first character of
// the x pattern.
struct Cube {
  std::uint32_t care = 0;
  std::uint32_t bits = 0;

  bool matches(std::uint32_t s) const { return (s & care) == bits; }

  std::size_t size(int n) const { return std::size_t{1} << (n - std::popcount(care)); }

  std::string pattern(int n) const {
    std::string p(static_cast<std::size_t>(n), 'x');
    for (int k = 0; k < n; ++k) {
      const std::uint32_t m = std::uint32_t{1} << (n - 1 - k);
      if (care & m) p[static_cast<std::size_t>(k)] = (bits & m) ? '1' : '0';
    }
    return p;
  }

  static Cube from_pattern(std::string_view p) {
    Cube c;
    const int n = static_cast<int>(p.size());
    for (int k = 0; k < n; ++k) {
      const std::uint32_t m = std::uint32_t{1} << (n - 1 - k);
      switch (p[static_cast<std::size_t>(k)]) {
        case '0':
          c.care |= m;
          break;
        case '1':
          c.care |= m;
          c.bits |= m;
          break;
        case 'x':
        case 'X':
          break;
        default:
          throw std::invalid_argument("malformed cube pattern '" + std::string(p) + "'");
      }
    }
    return c;
  }

  friend bool operator==(const Cube&, const Cube&) = default;
};

// One cube carrying an absolute class value. The additive form used in
// expansions is value - baseline.
struct CubeTerm {
  double value = 0.0;
  Cube cube;
};

struct CubeTermSet {
  double baseline = 1.0;
  std::vector<CubeTerm> cubes;
  int n = 0;  // spatial qubits
  std::array<int, kMaxAxes> axis_qubits{0, 0, 0};

  double delta(const CubeTerm& t) const { return t.value - baseline; }

  void add_delta(double d, Cube cube) { cubes.push_back(CubeTerm{baseline + d, cube}); }

  std::size_t after() const { return cubes.size(); }

  // Per-axis pattern strings of one cube.
  std::vector<std::string> axis_patterns(const Cube& c) const {
    const std::string full = c.pattern(n);
    std::vector<std::string> out;
    std::size_t pos = 0;
    for (int a = 0; a < kMaxAxes; ++a) {
      if (axis_qubits[a] == 0) continue;
      out.push_back(full.substr(pos, static_cast<std::size_t>(axis_qubits[a])));
      pos += static_cast<std::size_t>(axis_qubits[a]);
    }
    return out;
  }
};

enum class CompressionMode { exact, heuristic };

inline CompressionMode parse_compression_mode(std::string_view s) {
  if (s == "exact") return CompressionMode::exact;
  if (s == "heuristic") return CompressionMode::heuristic;
  throw ConfigError("unknown compression mode '" + std::string(s) + "'");
}

namespace detail {

inline std::uint64_t cube_key(const Cube& c) { return (std::uint64_t{c.care} << 32) | c.bits; }

inline std::vector<std::uint32_t> cube_minterms(const Cube& c, int n) {
  std::vector<std::uint32_t> out{c.bits};
  for (int b = 0; b < n; ++b) {
    const std::uint32_t m = std::uint32_t{1} << b;
    if (c.care & m) continue;
    const std::size_t k = out.size();
    for (std::size_t i = 0; i < k; ++i) out.push_back(out[i] | m);
  }
  return out;
}

// Every implicant of an ON-set, grouped by merge level (level k holds cubes
// of 2^k minterms), built by Quine-McCluskey pairwise merging. Each level is
// sorted by pattern string.
inline std::vector<std::vector<Cube>> implicant_levels(const std::vector<std::uint32_t>& on, int n) {
  const std::uint32_t full = n == 32 ? ~std::uint32_t{0} : ((std::uint32_t{1} << n) - 1);
  std::vector<std::vector<Cube>> levels;
  std::vector<Cube> level;
  level.reserve(on.size());
  for (std::uint32_t m : on) level.push_back(Cube{full, m});
  while (!level.empty()) {
    std::unordered_set<std::uint64_t> present;
    present.reserve(level.size() * 2);
    for (const auto& c : level) present.insert(cube_key(c));
    std::unordered_set<std::uint64_t> next_keys;
    std::vector<Cube> next;
    for (const auto& c : level) {
      for (int b = 0; b < n; ++b) {
        const std::uint32_t m = std::uint32_t{1} << b;
        if (!(c.care & m) || (c.bits & m)) continue;
        if (!present.count(cube_key(Cube{c.care, c.bits | m}))) continue;
        const Cube up{c.care & ~m, c.bits};
        if (next_keys.insert(cube_key(up)).second) next.push_back(up);
      }
    }
    std::vector<std::pair<std::string, Cube>> keyed;
    keyed.reserve(level.size());
    for (const Cube& c : level) keyed.emplace_back(c.pattern(n), c);
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Cube> sorted;
    sorted.reserve(keyed.size());
    for (auto& kc : keyed) sorted.push_back(kc.second);
    levels.push_back(std::move(sorted));
    level = std::move(next);
  }
  return levels;
}

// Disjoint greedy partition: repeatedly take the implicant with the largest
// count of still-uncovered minterms among those lying wholly in uncovered
// territory; ties go to the lowest pattern.
inline std::vector<Cube> greedy_partition(const std::vector<std::vector<Cube>>& levels, int n,
                                          std::unordered_set<std::uint32_t> uncovered) {
  std::vector<Cube> out;
  for (std::size_t k = levels.size(); k-- > 0;) {
    for (const Cube& c : levels[k]) {
      if (uncovered.empty()) return out;
      const auto mins = cube_minterms(c, n);
      bool free = true;
      for (std::uint32_t m : mins)
        if (!uncovered.count(m)) {
          free = false;
          break;
        }
      if (!free) continue;
      for (std::uint32_t m : mins) uncovered.erase(m);
      out.push_back(c);
    }
  }
  return out;
}

// Minimum partition of an ON-set into implicant cubes, by branch and bound
// on the uncovered minterm with the fewest candidate cubes.
class ExactPartition {
 public:
  ExactPartition(const std::vector<std::vector<Cube>>& levels, const std::vector<std::uint32_t>& on, int n,
                 std::size_t node_budget)
      : budget_(node_budget) {
    std::unordered_map<std::uint32_t, std::uint32_t> id;
    for (std::size_t i = 0; i < on.size(); ++i) id[on[i]] = static_cast<std::uint32_t>(i);
    covered_by_.resize(on.size());
    for (std::size_t k = levels.size(); k-- > 0;)
      for (const Cube& c : levels[k]) {
        std::vector<std::uint32_t> ids;
        for (std::uint32_t m : cube_minterms(c, n)) ids.push_back(id.at(m));
        for (std::uint32_t i : ids) covered_by_[i].push_back(static_cast<std::uint32_t>(cubes_.size()));
        cubes_.push_back(c);
        members_.push_back(std::move(ids));
      }
    largest_ = levels.empty() ? 1 : (std::size_t{1} << (levels.size() - 1));
  }

  // Returns true when the search completed inside the node budget.
  bool solve(std::vector<Cube> incumbent) {
    best_ = std::move(incumbent);
    std::vector<char> done(covered_by_.size(), 0);
    search(done, covered_by_.size());
    return nodes_ <= budget_;
  }

  const std::vector<Cube>& best() const { return best_; }

 private:
  bool free(std::size_t k, const std::vector<char>& done) const {
    for (std::uint32_t i : members_[k])
      if (done[i]) return false;
    return true;
  }

  void search(std::vector<char>& done, std::size_t remaining) {
    if (++nodes_ > budget_) return;
    if (remaining == 0) {
      if (current_.size() < best_.size()) {
        best_.clear();
        for (std::size_t k : current_) best_.push_back(cubes_[k]);
      }
      return;
    }
    if (current_.size() + (remaining + largest_ - 1) / largest_ >= best_.size()) return;
    std::size_t pick = 0, fewest = static_cast<std::size_t>(-1);
    for (std::size_t i = 0; i < done.size(); ++i) {
      if (done[i]) continue;
      std::size_t options = 0;
      for (std::uint32_t k : covered_by_[i]) options += free(k, done) ? 1 : 0;
      if (options < fewest) {
        fewest = options;
        pick = i;
      }
    }
    for (std::uint32_t k : covered_by_[pick]) {
      if (!free(k, done)) continue;
      for (std::uint32_t i : members_[k]) done[i] = 1;
      current_.push_back(k);
      search(done, remaining - members_[k].size());
      current_.pop_back();
      for (std::uint32_t i : members_[k]) done[i] = 0;
      if (nodes_ > budget_) return;
    }
  }

  std::size_t budget_;
  std::size_t nodes_ = 0;
  std::size_t largest_ = 1;
  std::vector<Cube> cubes_;
  std::vector<std::vector<std::uint32_t>> members_;
  std::vector<std::vector<std::uint32_t>> covered_by_;
  std::vector<std::size_t> current_;
  std::vector<Cube> best_;
};

inline std::vector<Cube> minimize_on_set(const std::vector<std::uint32_t>& on, int n, CompressionMode mode) {
  if (on.empty()) return {};
  const auto levels = implicant_levels(on, n);
  std::vector<Cube> chosen = greedy_partition(levels, n, {on.begin(), on.end()});
  if (mode == CompressionMode::exact && n < 12) {
    ExactPartition solver(levels, on, n, 200000);
    solver.solve(chosen);
    chosen = solver.best();
  }
  return chosen;
}

// Most frequent value; ties prefer 1.0, then the smallest value.
inline double choose_baseline(const std::map<double, std::vector<std::uint32_t>>& classes) {
  std::size_t most = 0;
  for (const auto& [v, pts] : classes) most = std::max(most, pts.size());
  auto one = classes.find(1.0);
  if (one != classes.end() && one->second.size() == most) return 1.0;
  for (const auto& [v, pts] : classes)
    if (pts.size() == most) return v;
  return 1.0;
}

}  // namespace detail

// Values are grouped by exact bit equality; each non-baseline class is
// minimized independently and emitted in ascending value order.
inline CubeTermSet compress_diagonal(const Eigen::VectorXd& values, const GridSpec& grid,
                                     CompressionMode mode = CompressionMode::heuristic) {
  if (static_cast<std::size_t>(values.size()) != grid.num_points())
    throw std::invalid_argument("field length does not match grid");
  const int n = grid.spatial_qubits();
  if (mode == CompressionMode::exact && n > 16)
    throw NumericalGuardError("exact compression is limited to 16 spatial qubits");
  std::map<double, std::vector<std::uint32_t>> classes;
  for (Eigen::Index s = 0; s < values.size(); ++s) classes[values[s]].push_back(static_cast<std::uint32_t>(s));
  CubeTermSet out;
  out.n = n;
  out.axis_qubits = grid.qubits;
  out.baseline = detail::choose_baseline(classes);
  for (const auto& [value, points] : classes) {
    if (value == out.baseline) continue;
    for (const Cube& c : detail::minimize_on_set(points, n, mode)) out.cubes.push_back(CubeTerm{value, c});
  }
  return out;
}

inline CubeTermSet compress_diagonal(const MaterialField& material, const GridSpec& grid,
                                     CompressionMode mode = CompressionMode::heuristic) {
  material.validate(grid);
  return compress_diagonal(material.c, grid, mode);
}

// diagonal[j] = baseline + sum of deltas over matching cubes. A point
// matched by exactly one cube takes that cube's class value directly, which
// keeps single-cover expansions bit-exact.
inline Eigen::VectorXd expand_cubes(const CubeTermSet& terms, const GridSpec& grid) {
  if (terms.n != grid.spatial_qubits()) throw std::invalid_argument("cube pattern length does not match grid");
  const std::size_t total = grid.num_points();
  Eigen::VectorXd out = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(total), terms.baseline);
  std::vector<int> hits(total, 0);
  std::vector<double> sum(total, 0.0);
  std::vector<double> single(total, 0.0);
  for (const auto& t : terms.cubes) {
    for (std::uint32_t s : detail::cube_minterms(t.cube, terms.n)) {
      ++hits[s];
      sum[s] += terms.delta(t);
      single[s] = t.value;
    }
  }
  for (std::size_t s = 0; s < total; ++s) {
    if (hits[s] == 1) out[static_cast<Eigen::Index>(s)] = single[s];
    if (hits[s] > 1) out[static_cast<Eigen::Index>(s)] = terms.baseline + sum[s];
  }
  return out;
}

struct CompressionReport {
  std::size_t before = 0;
  std::size_t after = 0;
  double ratio = 0.0;
  bool homogeneous = false;
};

inline CompressionReport compression_report(const Eigen::VectorXd& values, const CubeTermSet& terms) {
  CompressionReport r;
  for (Eigen::Index s = 0; s < values.size(); ++s) r.before += values[s] != terms.baseline ? 1 : 0;
  r.after = terms.after();
  r.homogeneous = r.before == 0;
  r.ratio = r.homogeneous ? 0.0 : static_cast<double>(r.after) / static_cast<double>(r.before);
  return r;
}

inline CompressionReport compression_report(const MaterialField& material, const GridSpec& grid,
                                            CompressionMode mode = CompressionMode::heuristic) {
  return compression_report(material.c, compress_diagonal(material, grid, mode));
}

// Column-per-pattern table: rows "Before", "After", "Ratio".
inline void print_report_table(std::ostream& os, const std::vector<std::string>& names,
                               const std::vector<CompressionReport>& reports) {
  const int width = 12;
  os << std::left << std::setw(width) << "";
  for (const auto& n : names) os << std::right << std::setw(width) << n;
  os << '\n' << std::left << std::setw(width) << "Before";
  for (const auto& r : reports) os << std::right << std::setw(width) << r.before;
  os << '\n' << std::left << std::setw(width) << "After";
  for (const auto& r : reports) os << std::right << std::setw(width) << r.after;
  os << '\n' << std::left << std::setw(width) << "Ratio";
  for (const auto& r : reports) {
    char buf[32];
    if (r.homogeneous)
      std::snprintf(buf, sizeof buf, "0 (homog.)");
    else
      std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * r.ratio);
    os << std::right << std::setw(width) << buf;
  }
  os << '\n';
}

// Cube list text. Header lines start with '#': "# baseline <v>" and, before
// each class, "# class <v>" so values survive a round trip exactly. Each
// cube line is "delta pattern_x pattern_y [pattern_z]".
inline void write_cube_list(std::ostream& os, const CubeTermSet& terms) {
  const auto old_precision = os.precision(17);
  os << "# baseline " << terms.baseline << '\n';
  bool first = true;
  double last = 0.0;
  for (const auto& t : terms.cubes) {
    if (first || t.value != last) os << "# class " << t.value << '\n';
    first = false;
    last = t.value;
    os << terms.delta(t);
    for (const auto& p : terms.axis_patterns(t.cube)) os << ' ' << p;
    os << '\n';
  }
  os.precision(old_precision);
}

inline CubeTermSet read_cube_list(std::istream& is, const GridSpec& grid) {
  CubeTermSet terms;
  terms.n = grid.spatial_qubits();
  terms.axis_qubits = grid.qubits;
  std::optional<double> klass;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;
    if (head == "#") {
      std::string key;
      double v = 0.0;
      if (ls >> key >> v) {
        if (key == "baseline") terms.baseline = v;
        if (key == "class") klass = v;
      }
      continue;
    }
    double delta = 0.0;
    try {
      delta = std::stod(head);
    } catch (const std::exception&) {
      throw ConfigError("cube list: bad delta '" + head + "'");
    }
    std::string joined, p;
    int axes = 0;
    while (ls >> p) {
      if (axes < grid.dim) detail::check_pattern(p, grid.qubits[axes]);
      joined += p;
      ++axes;
    }
    if (axes != grid.dim) throw ConfigError("cube list: expected one pattern per axis");
    const Cube c = Cube::from_pattern(joined);
    terms.cubes.push_back(CubeTerm{klass.value_or(terms.baseline + delta), c});
  }
  return terms;
}

}  // namespace hsim
