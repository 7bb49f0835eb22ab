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

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hsim/grid.hpp"

namespace hsim {

// <psi| O_X |psi> for the projector onto `component` over the region.
inline double region_expectation(const StateVector& state, const RegionMask& region, int component = 0) {
  if (component < 0 || static_cast<std::size_t>(component) >= state.register_size())
    throw std::out_of_range("component index outside the index register");
  double sum = 0.0;
  for (std::size_t s : region.indices) {
    if (s >= state.grid.num_points()) throw std::out_of_range("region exceeds grid");
    sum += std::norm(state.amplitudes[static_cast<Eigen::Index>(state.index(component, s))]);
  }
  return sum;
}

// E_z = -c * normalization * Re(u_0).
inline Eigen::VectorXd reconstruct_Ez(const StateVector& state, const MaterialField& material,
                                      std::optional<double> normalization = std::nullopt) {
  const std::optional<double> n = normalization ? normalization : state.normalization;
  if (!n) throw std::invalid_argument("state carries no normalization record");
  material.validate(state.grid);
  return -(*n) * material.c.cwiseProduct(state.component(0).real());
}

// One observed time slice: E_z over the grid.
struct FieldFrame {
  double time = 0.0;
  Eigen::VectorXd ez;
};

enum class Metric { ez_power, projector };

struct RegionMetric {
  long offset = 0;
  double peak = 0.0;
  double accumulated = 0.0;
  double t_of_peak = 0.0;
};

struct FocalScanResult {
  std::vector<RegionMetric> rows;
  std::size_t argmax_peak = 0;
  std::size_t argmax_accumulated = 0;
};

// Sum over a region of w_j * ez_j^2. With unit weights this is the |E_z|^2
// power; with 1/(c_j * normalization)^2 it is the projector expectation.
inline double region_power(const FieldFrame& f, const RegionMask& region, const Eigen::VectorXd* weights = nullptr) {
  double sum = 0.0;
  for (std::size_t s : region.indices) {
    const double e = f.ez[static_cast<Eigen::Index>(s)];
    sum += (weights ? (*weights)[static_cast<Eigen::Index>(s)] : 1.0) * e * e;
  }
  return sum;
}

inline Eigen::VectorXd projector_weights(const MaterialField& material, double normalization) {
  return (material.c * normalization).array().square().inverse().matrix();
}

// Peak over frames with t0 <= t <= t1; accumulated by the left rectangle
// rule over frames with t0 <= t_k < t1, each weighted by the gap to the next
// frame.
inline FocalScanResult focal_scan(const std::vector<FieldFrame>& frames, const std::vector<RegionMask>& regions,
                                  const std::vector<long>& offsets, double t0, double t1,
                                  const Eigen::VectorXd* weights = nullptr) {
  if (regions.size() != offsets.size()) throw std::invalid_argument("one offset per region is required");
  if (regions.empty()) throw std::invalid_argument("no regions to scan");
  for (const auto& r : regions)
    if (r.size() != regions.front().size()) throw std::invalid_argument("scan regions must have equal size");
  std::vector<std::size_t> window;
  for (std::size_t k = 0; k < frames.size(); ++k)
    if (frames[k].time >= t0 - 1e-12 && frames[k].time <= t1 + 1e-12) window.push_back(k);
  if (window.empty() || !(t1 > t0)) throw std::invalid_argument("empty scan window");
  FocalScanResult out;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    RegionMetric m;
    m.offset = offsets[r];
    m.peak = -1.0;
    for (std::size_t w = 0; w < window.size(); ++w) {
      const FieldFrame& f = frames[window[w]];
      const double p = region_power(f, regions[r], weights);
      if (p > m.peak) {
        m.peak = p;
        m.t_of_peak = f.time;
      }
      if (f.time < t1 - 1e-12) {
        const double next = w + 1 < window.size() ? frames[window[w + 1]].time : t1;
        m.accumulated += p * (std::min(next, t1) - f.time);
      }
    }
    out.rows.push_back(m);
  }
  for (std::size_t r = 1; r < out.rows.size(); ++r) {
    if (out.rows[r].peak > out.rows[out.argmax_peak].peak) out.argmax_peak = r;
    if (out.rows[r].accumulated > out.rows[out.argmax_accumulated].accumulated) out.argmax_accumulated = r;
  }
  return out;
}

}  // namespace hsim
