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

// Grid encoding: power-of-two lattices mapped onto qubit registers.
//
// Register layout is |mu'>|j_x>|j_y>|j_z> with the component index most
// significant, so the basis index of (mu', j_x, j_y, j_z) is
//
//     ((mu' * N_x + j_x) * N_y + j_y) * N_z + j_z.
//
// Inside each axis register the coordinate is stored MSB first, which makes
// the spatial index the plain concatenation of the per-axis bit strings.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hsim/error.hpp"

namespace hsim {

using cplx = std::complex<double>;

enum class Boundary { dirichlet, neumann, periodic };

inline std::string_view to_string(Boundary bc) {
  switch (bc) {
    case Boundary::dirichlet:
      return "dirichlet";
    case Boundary::neumann:
      return "neumann";
    case Boundary::periodic:
      return "periodic";
  }
  return "?";
}

inline Boundary parse_boundary(std::string_view text) {
  if (text == "dirichlet") return Boundary::dirichlet;
  if (text == "neumann") return Boundary::neumann;
  if (text == "periodic") return Boundary::periodic;
  throw ConfigError("unknown boundary condition '" + std::string(text) + "'");
}

inline constexpr int kMaxAxes = 3;

struct GridSpec {
  int dim = 2;
  std::array<int, kMaxAxes> qubits{0, 0, 0};  // zero on inactive axes
  double h = 1.0;
  std::array<Boundary, kMaxAxes> bc{Boundary::dirichlet, Boundary::dirichlet,
                                     Boundary::dirichlet};

  static GridSpec make(std::initializer_list<int> axis_qubits, double h = 1.0,
                       Boundary boundary = Boundary::dirichlet) {
    GridSpec g;
    g.dim = static_cast<int>(axis_qubits.size());
    int a = 0;
    for (int q : axis_qubits) g.qubits[a++] = q;
    g.h = h;
    g.bc.fill(boundary);
    g.validate();
    return g;
  }

  bool active(int axis) const { return axis >= 0 && axis < dim; }

  std::size_t extent(int axis) const { return std::size_t{1} << qubits[axis]; }

  int spatial_qubits() const { return qubits[0] + qubits[1] + qubits[2]; }

  std::size_t num_points() const { return std::size_t{1} << spatial_qubits(); }

  // Distance in the spatial index between neighbours along `axis`.
  std::size_t stride(int axis) const {
    std::size_t s = 1;
    for (int a = kMaxAxes - 1; a > axis; --a) s *= extent(a);
    return s;
  }

  std::size_t index(std::size_t jx, std::size_t jy = 0, std::size_t jz = 0) const {
    return (jx * extent(1) + jy) * extent(2) + jz;
  }

  std::array<std::size_t, kMaxAxes> coords(std::size_t s) const {
    std::array<std::size_t, kMaxAxes> j{};
    for (int a = kMaxAxes - 1; a >= 0; --a) {
      j[a] = s % extent(a);
      s /= extent(a);
    }
    return j;
  }

  void validate() const {
    if (dim < 1 || dim > kMaxAxes) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
    for (int a = 0; a < kMaxAxes; ++a) {
      if (active(a) && qubits[a] < 1)
        throw std::invalid_argument("active axis needs at least one qubit");
      if (!active(a) && qubits[a] != 0)
        throw std::invalid_argument("inactive axis must carry zero qubits");
    }
    if (spatial_qubits() > 30) throw std::invalid_argument("grid too large");
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("grid spacing must be positive");
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Per-point propagation speed, stored in spatial-index order.
struct MaterialField {
  Eigen::VectorXd c;

  static MaterialField uniform(const GridSpec& grid, double value = 1.0) {
    return MaterialField{Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid.num_points()), value)};
  }

  void validate(const GridSpec& grid) const {
    if (static_cast<std::size_t>(c.size()) != grid.num_points())
      throw std::invalid_argument("material field does not match grid size");
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      if (!(c[i] > 0.0) || !std::isfinite(c[i]))
        throw std::invalid_argument("material speed must be positive and finite");
    }
  }

  double max() const { return c.maxCoeff(); }
};

struct StateVector {
  GridSpec grid;
  int components = 3;    // physical component count m
  int index_qubits = 2;  // component register width
  Eigen::VectorXcd amplitudes;
  // Euclidean norm of the physical field before normalization. Needed to
  // recover unnormalized field values.
  std::optional<double> normalization;

  static StateVector zero(const GridSpec& grid, int components, int index_qubits) {
    if (components < 1 || components > (1 << index_qubits))
      throw std::invalid_argument("component count does not fit the index register");
    StateVector s;
    s.grid = grid;
    s.components = components;
    s.index_qubits = index_qubits;
    s.amplitudes = Eigen::VectorXcd::Zero(
        static_cast<Eigen::Index>((std::size_t{1} << index_qubits) * grid.num_points()));
    return s;
  }

  // E_z/c plus the two in-plane gradients, padded to four components.
  static StateVector tm2d(const GridSpec& grid) { return zero(grid, 3, 2); }

  // Three time derivatives plus nine gradients, padded to sixteen.
  static StateVector full3d(const GridSpec& grid) { return zero(grid, 12, 4); }

  std::size_t register_size() const { return std::size_t{1} << index_qubits; }

  std::size_t size() const { return static_cast<std::size_t>(amplitudes.size()); }

  std::size_t index(int component, std::size_t spatial) const {
    return static_cast<std::size_t>(component) * grid.num_points() + spatial;
  }

  auto component(int mu) {
    return amplitudes.segment(static_cast<Eigen::Index>(index(mu, 0)),
                              static_cast<Eigen::Index>(grid.num_points()));
  }
  auto component(int mu) const {
    return amplitudes.segment(static_cast<Eigen::Index>(index(mu, 0)),
                              static_cast<Eigen::Index>(grid.num_points()));
  }

  double norm() const { return amplitudes.norm(); }

  // Squared weight sitting in components >= m.
  double padding_weight() const {
    const auto start = static_cast<Eigen::Index>(index(components, 0));
    return amplitudes.tail(amplitudes.size() - start).squaredNorm();
  }

  // Rescales to unit norm and folds the removed factor into `normalization`.
  void normalize() {
    const double n = norm();
    if (n == 0.0) throw std::invalid_argument("unnormalizable field");
    amplitudes /= n;
    normalization = normalization.value_or(1.0) * n;
  }
};

struct EncodedField {
  Eigen::VectorXcd amplitudes;
  double normalization = 1.0;
};

inline EncodedField encode_scalar_field(std::span<const double> values, const GridSpec& grid) {
  if (values.size() != grid.num_points())
    throw std::invalid_argument("field length does not match grid");
  double sq = 0.0;
  for (double v : values) sq += v * v;
  if (sq == 0.0) throw std::invalid_argument("unnormalizable field");
  EncodedField out;
  out.normalization = std::sqrt(sq);
  out.amplitudes.resize(static_cast<Eigen::Index>(values.size()));
  for (std::size_t j = 0; j < values.size(); ++j)
    out.amplitudes[static_cast<Eigen::Index>(j)] = cplx(values[j] / out.normalization, 0.0);
  return out;
}

inline EncodedField encode_scalar_field(const Eigen::VectorXd& values, const GridSpec& grid) {
  return encode_scalar_field(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())),
                             grid);
}

inline Eigen::VectorXcd decode_component(const StateVector& state, int component) {
  if (component < 0 || static_cast<std::size_t>(component) >= state.register_size())
    throw std::out_of_range("component index outside the index register");
  return state.component(component);
}

// ---------------------------------------------------------------------------
// Region masks in don't-care bit notation.
// ---------------------------------------------------------------------------

struct RegionMask {
  // One entry per cube; each cube holds one pattern per active axis.
  std::vector<std::vector<std::string>> cubes;
  // Sorted, de-duplicated spatial indices.
  std::vector<std::size_t> indices;

  std::size_t size() const { return indices.size(); }

  bool contains(std::size_t s) const { return std::binary_search(indices.begin(), indices.end(), s); }
};

namespace detail {

// Every completion of an axis pattern, as coordinates.
inline std::vector<std::size_t> pattern_completions(std::string_view pattern) {
  std::vector<std::size_t> out{0};
  for (char ch : pattern) {
    std::vector<std::size_t> next;
    next.reserve(out.size() * 2);
    for (std::size_t v : out) {
      if (ch == '0' || ch == 'x') next.push_back(v << 1);
      if (ch == '1' || ch == 'x') next.push_back((v << 1) | 1);
    }
    out = std::move(next);
  }
  return out;
}

inline void check_pattern(std::string_view pattern, int bits) {
  if (static_cast<int>(pattern.size()) != bits)
    throw std::invalid_argument("pattern '" + std::string(pattern) + "' does not match axis qubit count");
  for (char ch : pattern) {
    if (ch != '0' && ch != '1' && ch != 'x')
      throw std::invalid_argument("invalid character in pattern '" + std::string(pattern) + "'");
  }
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace detail

inline RegionMask parse_region(const GridSpec& grid, const std::vector<std::vector<std::string>>& cubes) {
  RegionMask mask;
  mask.cubes = cubes;
  for (const auto& cube : cubes) {
    if (static_cast<int>(cube.size()) != grid.dim)
      throw std::invalid_argument("region cube needs one pattern per axis");
    std::array<std::vector<std::size_t>, kMaxAxes> axis_values;
    for (int a = 0; a < kMaxAxes; ++a) {
      if (grid.active(a)) {
        detail::check_pattern(cube[static_cast<std::size_t>(a)], grid.qubits[a]);
        axis_values[a] = detail::pattern_completions(cube[static_cast<std::size_t>(a)]);
      } else {
        axis_values[a] = {0};
      }
    }
    for (std::size_t jx : axis_values[0])
      for (std::size_t jy : axis_values[1])
        for (std::size_t jz : axis_values[2]) mask.indices.push_back(grid.index(jx, jy, jz));
  }
  std::sort(mask.indices.begin(), mask.indices.end());
  mask.indices.erase(std::unique(mask.indices.begin(), mask.indices.end()), mask.indices.end());
  return mask;
}

// Parses the textual form "0111xx,1010xx;1000xx,1010xx". Cubes are separated
// by ';', axes by ','. Parentheses, whitespace and a trailing "_2" radix tag
// are accepted, so "(0111xx, 1010xx)_2" parses as a single cube.
inline RegionMask parse_region(const GridSpec& grid, std::string_view text) {
  std::vector<std::vector<std::string>> cubes;
  std::string spec(text);
  std::stringstream cube_stream(spec);
  std::string cube_text;
  while (std::getline(cube_stream, cube_text, ';')) {
    std::string cleaned;
    for (std::size_t i = 0; i < cube_text.size(); ++i) {
      char ch = cube_text[i];
      if (ch == '(' || ch == ')') continue;
      if (ch == '_' && i + 1 < cube_text.size() && cube_text[i + 1] == '2') {
        ++i;
        continue;
      }
      cleaned.push_back(ch == 'X' ? 'x' : ch);
    }
    if (detail::trim(cleaned).empty()) continue;
    std::vector<std::string> axes;
    std::stringstream axis_stream(cleaned);
    std::string axis_text;
    while (std::getline(axis_stream, axis_text, ',')) axes.push_back(detail::trim(axis_text));
    cubes.push_back(std::move(axes));
  }
  if (cubes.empty()) throw std::invalid_argument("empty region specification");
  return parse_region(grid, cubes);
}

// Aligned dyadic blocks whose union is the closed interval [lo, hi].
inline std::vector<std::string> interval_patterns(std::size_t lo, std::size_t hi, int bits) {
  if (lo > hi || hi >= (std::size_t{1} << bits)) throw std::invalid_argument("interval outside axis");
  std::vector<std::string> out;
  std::size_t cur = lo;
  while (cur <= hi) {
    int k = 0;
    while (k < bits && (cur & ((std::size_t{2} << k) - 1)) == 0 && cur + (std::size_t{2} << k) - 1 <= hi) ++k;
    std::string p(static_cast<std::size_t>(bits), 'x');
    for (int b = bits - 1; b >= k; --b) p[static_cast<std::size_t>(bits - 1 - b)] = ((cur >> b) & 1) ? '1' : '0';
    out.push_back(std::move(p));
    cur += std::size_t{1} << k;
  }
  return out;
}

// Axis-aligned box [lo[a], hi[a]] (inclusive) expressed as a cube union.
inline RegionMask box_region(const GridSpec& grid, std::array<std::size_t, kMaxAxes> lo,
                             std::array<std::size_t, kMaxAxes> hi) {
  std::array<std::vector<std::string>, kMaxAxes> per_axis;
  for (int a = 0; a < kMaxAxes; ++a) {
    per_axis[a] = grid.active(a) ? interval_patterns(lo[a], hi[a], grid.qubits[a]) : std::vector<std::string>{""};
  }
  std::vector<std::vector<std::string>> cubes;
  for (const auto& px : per_axis[0])
    for (const auto& py : per_axis[1])
      for (const auto& pz : per_axis[2]) {
        std::vector<std::string> cube{px, py, pz};
        cube.resize(static_cast<std::size_t>(grid.dim));
        cubes.push_back(std::move(cube));
      }
  return parse_region(grid, cubes);
}

// ---------------------------------------------------------------------------
// Grid-text files: header "nx ny nz h", then values in spatial-index order,
// one line per j_x.
// ---------------------------------------------------------------------------

struct GridText {
  std::array<std::size_t, kMaxAxes> shape{1, 1, 1};
  double h = 1.0;
  std::vector<double> values;
};

inline void write_grid_text(std::ostream& os, const GridSpec& grid, std::span<const double> values) {
  if (values.size() != grid.num_points()) throw std::invalid_argument("field length does not match grid");
  const auto old_precision = os.precision(17);
  os << grid.extent(0) << ' ' << grid.extent(1) << ' ' << grid.extent(2) << ' ' << grid.h << '\n';
  const std::size_t row = grid.extent(1) * grid.extent(2);
  for (std::size_t i = 0; i < values.size(); ++i) {
    os << values[i];
    os << (((i + 1) % row == 0) ? '\n' : ' ');
  }
  os.precision(old_precision);
}

inline void write_grid_text(std::ostream& os, const GridSpec& grid, const Eigen::VectorXd& values) {
  write_grid_text(os, grid, std::span<const double>(values.data(), static_cast<std::size_t>(values.size())));
}

inline GridText read_grid_text(std::istream& is) {
  GridText t;
  if (!(is >> t.shape[0] >> t.shape[1] >> t.shape[2] >> t.h)) throw ConfigError("grid-text: malformed header");
  const std::size_t n = t.shape[0] * t.shape[1] * t.shape[2];
  t.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(is >> t.values[i])) throw ConfigError("grid-text: expected " + std::to_string(n) + " values");
  }
  return t;
}

// Grid spec for a grid-text shape; axes of extent 1 beyond the first are
// treated as inactive.
inline GridSpec grid_from_text(const GridText& t, Boundary bc = Boundary::dirichlet) {
  GridSpec g;
  g.h = t.h;
  g.bc.fill(bc);
  g.dim = t.shape[2] > 1 ? 3 : (t.shape[1] > 1 ? 2 : 1);
  for (int a = 0; a < kMaxAxes; ++a) {
    std::size_t n = t.shape[a];
    if (n == 0 || (n & (n - 1)) != 0) throw ConfigError("grid-text: extents must be powers of two");
    int q = 0;
    while ((std::size_t{1} << q) < n) ++q;
    g.qubits[a] = q;
  }
  g.validate();
  return g;
}

}  // namespace hsim
