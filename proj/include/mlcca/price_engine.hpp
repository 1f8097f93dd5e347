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

// Clearing objective W(p) = <c,p> + sum_i max_x {v_i(x) - <p,x>} and the
// price generator that minimizes it by projected, asymmetric subgradient
// steps while tracking the best iterate with no predicted over-demand.

#pragma once

#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "mlcca/core.hpp"
#include "mlcca/oracles.hpp"
#include "mlcca/rng.hpp"

namespace mlcca {

/// W(p) = R(p) + sum_i U(p, v_i).
inline double clearing_objective(const PriceVector& p, std::span<const Valuation> vals, const Capacities& c) {
  double w = indirect_revenue(p, c);
  for (const auto& v : vals) w += indirect_utility(v, p);
  return w;
}

/// c - sum_i x_hat_i(p): a subgradient of W at p (a.e. the gradient).
inline std::vector<double> subgradient_w(const PriceVector& p, std::span<const Valuation> vals, const Capacities& c) {
  const auto d = total_demand(demands_at(vals, p), c.size());
  std::vector<double> g(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) g[j] = static_cast<double>(c[j] - d[j]);
  return g;
}

/// How an over-demanded item's step is scaled relative to under-demand.
enum class OverdemandFactor {
  kMu,         // p_j - mu * gamma_j (c_j - d_j)
  kOnePlusMu,  // p_j - (1 + mu) * gamma_j (c_j - d_j)
};

/// One asymmetric price step with per-item learning rate lr * p_j, floored at 0.
inline PriceVector asym_update(const PriceVector& p, std::span<const int> demand, const Capacities& c, double lr,
                               double mu, OverdemandFactor factor = OverdemandFactor::kMu) {
  if (p.size() != c.size() || demand.size() != c.size()) throw StructuralError("asym_update: dimension mismatch");
  std::vector<double> out(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double gamma = lr * p[j];
    const double excess_supply = static_cast<double>(c[j] - demand[j]);
    double scale = 1.0;
    if (demand[j] > c[j]) scale = factor == OverdemandFactor::kMu ? mu : 1.0 + mu;
    out[j] = std::max(0.0, p[j] - scale * gamma * excess_supply);
  }
  return PriceVector(std::move(out));
}

struct NextPriceConfig {
  int epochs = 300;
  double learning_rate = 0.01;  // lambda: per-item step is lambda * p_j
  double decay = 0.005;         // eta
  double mu = 2.0;              // feasibility multiplier
  double nu = 1.01;             // multiplier increment
  double jitter_lo = 0.75;
  double jitter_hi = 1.25;
  OverdemandFactor overdemand_factor = OverdemandFactor::kMu;
  bool decay_per_item = false;  // decay lambda once per item instead of once per iteration
  std::uint64_t seed = 0;

  [[nodiscard]] bool unconstrained() const { return mu == 0.0 && nu == 0.0; }

  void validate() const {
    if (epochs < 1) throw ValidationError("next_price: epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw ValidationError("next_price: learning rate must be > 0");
    if (!(decay >= 0.0 && decay <= 1.0)) throw ValidationError("next_price: decay must lie in [0,1]");
    if (!(mu >= 0.0) || !(nu >= 0.0)) throw ValidationError("next_price: mu and nu must be >= 0");
    if (!(jitter_lo >= 0.0) || !(jitter_hi >= jitter_lo)) throw ValidationError("next_price: invalid jitter range");
  }
};

struct PriceTraceEntry {
  PriceVector price;
  double w = 0.0;
  std::vector<int> demand;
  bool feasible = false;
};

struct PriceTrace {
  std::vector<PriceTraceEntry> iterations;
  std::optional<std::size_t> best_feasible;
  std::size_t best_overall = 0;
  std::size_t returned = 0;
  bool predicted_clearing = false;
};

/// Generates the next demand query from predicted valuations.
inline std::pair<PriceVector, PriceTrace> next_price(std::span<const Valuation> vals, const PriceVector& anchor,
                                                     const Capacities& c, const NextPriceConfig& cfg) {
  cfg.validate();
  if (anchor.size() != c.size()) throw StructuralError("next_price: anchor dimension mismatch");
  std::vector<Valuation> tabs;
  for (const auto& v : vals) tabs.push_back(v.tabulated());

  Rng rng(cfg.seed);
  std::vector<double> p0(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) p0[j] = rng.uniform(cfg.jitter_lo * anchor[j], cfg.jitter_hi * anchor[j]);
  PriceVector p(std::move(p0));

  PriceTrace trace;
  double w_best = std::numeric_limits<double>::infinity();
  double w_best_feasible = std::numeric_limits<double>::infinity();
  double lr = cfg.learning_rate;
  double mu = cfg.mu;
  bool feasible_found = false;
  // mu = nu = 0 is symmetric descent on W: over-demand steps at factor 1.
  const auto factor = cfg.unconstrained() ? OverdemandFactor::kOnePlusMu : cfg.overdemand_factor;

  for (int t = 0; t < cfg.epochs; ++t) {
    double w = indirect_revenue(p, c);
    std::vector<int> d(c.size(), 0);
    for (const auto& v : tabs) {
      const auto res = argmax_utility(v, p);
      w += res.utility;
      for (std::size_t j = 0; j < c.size(); ++j) d[j] += res.bundle[j];
    }
    bool no_overdemand = true;
    bool clears = true;
    for (std::size_t j = 0; j < c.size(); ++j) {
      no_overdemand = no_overdemand && d[j] <= c[j];
      clears = clears && d[j] == c[j];
    }
    trace.iterations.push_back({p, w, d, no_overdemand});
    const std::size_t idx = trace.iterations.size() - 1;
    if (w < w_best) {
      w_best = w;
      trace.best_overall = idx;
    }
    if (no_overdemand && w < w_best_feasible) {
      w_best_feasible = w;
      trace.best_feasible = idx;
      feasible_found = true;
    }
    if (clears) {
      trace.predicted_clearing = true;
      break;
    }
    if (cfg.decay_per_item) {
      std::vector<double> next(c.size());
      for (std::size_t j = 0; j < c.size(); ++j) {
        const auto one = asym_update(p, d, c, lr, mu, factor);
        next[j] = one[j];
        lr *= 1.0 - cfg.decay;
      }
      p = PriceVector(std::move(next));
    } else {
      p = asym_update(p, d, c, lr, mu, factor);
      lr *= 1.0 - cfg.decay;
    }
    if (!feasible_found) mu *= cfg.nu;
  }

  if (cfg.unconstrained() || !feasible_found) trace.returned = trace.best_overall;
  else trace.returned = *trace.best_feasible;
  return {trace.iterations[trace.returned].price, std::move(trace)};
}

/// True iff truthful (smallest-rank) demand at p sells every copy exactly.
inline std::pair<bool, Allocation> check_clearing(std::span<const Valuation> vals, const PriceVector& p,
                                                  const Capacities& c) {
  Allocation a{demands_at(vals, p)};
  const auto d = total_demand(a.bundles, c.size());
  bool clears = true;
  for (std::size_t j = 0; j < c.size(); ++j) clears = clears && d[j] == c[j];
  return {clears, std::move(a)};
}

}  // namespace mlcca
