// Copyright 2026 The mlcca Authors.
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

#include <numeric>
#include <span>
#include <vector>

#include "mlcca/core.hpp"
#include "mlcca/oracles.hpp"

namespace mlcca {

/// V(a) / V(a*); 1 when V(a*) = 0.
inline double efficiency(const Allocation& a, std::span<const Valuation> vals, const Capacities& c) {
  if (a.bundles.size() != vals.size()) throw StructuralError("efficiency: bidder count mismatch");
  const double best = wdp_true(vals, c).welfare;
  double v = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) v += vals[i].value(a.bundles[i]);
  if (best <= 0.0) return 1.0;
  return v / best;
}

/// sum_j (sum_i x_ij - c_j)^2
inline double clearing_error(std::span<const Bundle> demands, const Capacities& c) {
  const auto d = total_demand(demands, c.size());
  double s = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double gap = static_cast<double>(d[j] - c[j]);
    s += gap * gap;
  }
  return s;
}

namespace detail {

inline void check_metric_inputs(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw StructuralError("r_squared: length mismatch");
  if (truth.empty()) throw MetricError("r_squared: empty input");
}

inline double mean(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()); }

}  // namespace detail

inline double r_squared(std::span<const double> pred, std::span<const double> truth) {
  detail::check_metric_inputs(pred, truth);
  const double tm = detail::mean(truth);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    ss_res += (truth[k] - pred[k]) * (truth[k] - pred[k]);
    ss_tot += (truth[k] - tm) * (truth[k] - tm);
  }
  if (!(ss_tot > 0.0)) throw MetricError("r_squared: truth has zero variance");
  return 1.0 - ss_res / ss_tot;
}

/// R^2 after centering both series; blind to constant offsets.
inline double r_squared_shift_invariant(std::span<const double> pred, std::span<const double> truth) {
  detail::check_metric_inputs(pred, truth);
  const double tm = detail::mean(truth);
  const double pm = detail::mean(pred);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double e = (truth[k] - tm) - (pred[k] - pm);
    ss_res += e * e;
    ss_tot += (truth[k] - tm) * (truth[k] - tm);
  }
  if (!(ss_tot > 0.0)) throw MetricError("r_squared_shift_invariant: truth has zero variance");
  return 1.0 - ss_res / ss_tot;
}

}  // namespace mlcca
