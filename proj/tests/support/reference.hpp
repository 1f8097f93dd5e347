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


// Reference computations used as test oracles. Everything here is written
// from the definitions with plain loops and shares no code paths with the
// library beyond its value types.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "mlcca/mlcca.hpp"

namespace ref {

using Vec = std::vector<int>;

/// All bundles within caps, lexicographic order (item 0 slowest).
inline std::vector<Vec> bundles(const std::vector<int>& caps) {
  std::vector<Vec> out;
  Vec x(caps.size(), 0);
  std::function<void(std::size_t)> rec = [&](std::size_t j) {
    if (j == caps.size()) {
      out.push_back(x);
      return;
    }
    for (int k = 0; k <= caps[j]; ++k) {
      x[j] = k;
      rec(j + 1);
    }
    x[j] = 0;
  };
  rec(0);
  return out;
}

inline double dot(const std::vector<double>& p, const Vec& x) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += p[j] * x[j];
  return s;
}

inline bool leq(const Vec& a, const Vec& b) {
  for (std::size_t j = 0; j < a.size(); ++j)
    if (a[j] > b[j]) return false;
  return true;
}

using ValueFn = std::function<double(const Vec&)>;

struct Demand {
  Vec bundle;
  double utility = 0.0;
};

/// First bundle in lexicographic order with the strictly largest utility.
inline Demand argmax(const ValueFn& v, const std::vector<int>& caps, const std::vector<double>& p) {
  Demand best{{}, -std::numeric_limits<double>::infinity()};
  for (const auto& x : bundles(caps)) {
    const double u = v(x) - dot(p, x);
    if (u > best.utility) best = {x, u};
  }
  return best;
}

inline double objective_w(const std::vector<ValueFn>& vals, const std::vector<int>& caps, const std::vector<double>& p) {
  double w = 0.0;
  for (std::size_t j = 0; j < caps.size(); ++j) w += caps[j] * p[j];
  for (const auto& v : vals) w += argmax(v, caps, p).utility;
  return w;
}

/// Every allocation of one bundle per bidder, feasibility filtered.
inline void for_each_feasible_allocation(std::size_t n, const std::vector<int>& caps,
                                         const std::function<void(const std::vector<Vec>&)>& f) {
  const auto all = bundles(caps);
  std::vector<Vec> a(n);
  Vec rem = caps;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == n) {
      f(a);
      return;
    }
    for (const auto& x : all) {
      if (!leq(x, rem)) continue;
      for (std::size_t j = 0; j < x.size(); ++j) rem[j] -= x[j];
      a[i] = x;
      rec(i + 1);
      for (std::size_t j = 0; j < x.size(); ++j) rem[j] += x[j];
    }
  };
  rec(0);
}

/// Optimal welfare by exhaustive search over allocations.
inline double optimal_welfare(const std::vector<ValueFn>& vals, const std::vector<int>& caps) {
  double best = 0.0;
  for_each_feasible_allocation(vals.size(), caps, [&](const std::vector<Vec>& a) {
    double w = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) w += vals[i](a[i]);
    best = std::max(best, w);
  });
  return best;
}

struct Choice {
  std::vector<std::size_t> pick;
  double welfare = -std::numeric_limits<double>::infinity();
};

/// Candidate-list WDP by visiting every tuple in lexicographic index order;
/// a later tuple replaces the incumbent only if better by more than 1e-9.
inline Choice wdp(const std::vector<std::vector<std::pair<Vec, double>>>& cands, const std::vector<int>& caps) {
  Choice best;
  const auto n = cands.size();
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    Vec load(caps.size(), 0);
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& [x, v] = cands[i][idx[i]];
      for (std::size_t j = 0; j < x.size(); ++j) load[j] += x[j];
      w += v;
    }
    if (leq(load, caps) && (w > best.welfare + 1e-9 || !std::isfinite(best.welfare))) best = {idx, w};
    std::size_t i = n;
    while (i-- > 0) {
      if (++idx[i] < cands[i].size()) break;
      idx[i] = 0;
    }
    if (i == static_cast<std::size_t>(-1)) break;
  }
  return best;
}

/// Random monotone normalized table over caps, lexicographic order.
inline std::vector<double> random_monotone_table(std::mt19937_64& rng, const std::vector<int>& caps,
                                                 double zero_prob = 0.3) {
  const auto all = bundles(caps);
  std::vector<double> t(all.size(), 0.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // Lexicographic order visits every x - e_j before x.
  auto index_of = [&](const Vec& x) {
    std::size_t r = 0;
    for (std::size_t j = 0; j < x.size(); ++j) r = r * (caps[j] + 1) + x[j];
    return r;
  };
  for (std::size_t r = 1; r < all.size(); ++r) {
    double floor_v = 0.0;
    Vec x = all[r];
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] == 0) continue;
      --x[j];
      floor_v = std::max(floor_v, t[index_of(x)]);
      ++x[j];
    }
    t[r] = floor_v + (u(rng) < zero_prob ? 0.0 : u(rng));
  }
  return t;
}

inline std::vector<int> random_caps(std::mt19937_64& rng, std::size_t max_m, int max_c, std::size_t max_size) {
  while (true) {
    std::uniform_int_distribution<std::size_t> dm(1, max_m);
    std::uniform_int_distribution<int> dc(1, max_c);
    std::vector<int> caps(dm(rng));
    std::size_t size = 1;
    for (auto& c : caps) {
      c = dc(rng);
      size *= static_cast<std::size_t>(c + 1);
    }
    if (size <= max_size) return caps;
  }
}

inline std::vector<double> random_prices(std::mt19937_64& rng, std::size_t m, double hi) {
  std::uniform_real_distribution<double> u(0.0, hi);
  std::vector<double> p(m);
  for (auto& x : p) x = u(rng);
  return p;
}

/// Net with random hidden widths and randomly scaled parameters.
inline mlcca::MmvnnNet random_net(std::mt19937_64& rng, const mlcca::Capacities& c) {
  std::uniform_int_distribution<int> width(1, 6);
  std::uniform_int_distribution<int> depth(1, 3);
  mlcca::Architecture arch;
  arch.hidden_dims.assign(static_cast<std::size_t>(depth(rng)), 0);
  for (auto& d : arch.hidden_dims) d = width(rng);
  arch.linear_skip = rng() % 2 == 0;
  auto net = mlcca::init(arch, c, rng());
  std::uniform_real_distribution<double> scale(0.5, 4.0);
  auto& p = net.mutable_params();
  for (auto& w : p.weights) w *= scale(rng);
  for (auto& b : p.biases) b *= scale(rng);
  return net;
}

inline ValueFn fn(const mlcca::Valuation& v) {
  return [v](const Vec& x) { return v.value(std::span<const int>(x)); };
}

}  // namespace ref
