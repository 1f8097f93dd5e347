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

// Exact optimization oracles over the multiset bundle space: utility
// maximization (demand), indirect utility and revenue, winner determination
// from elicited data and from true valuations, and a grid search for
// linear clearing prices. Every oracle breaks ties toward the smallest
// mixed-radix rank (lexicographically smallest bundle / bundle tuple).

#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "mlcca/core.hpp"
#include "mlcca/mmvnn.hpp"
#include "mlcca/value_models.hpp"

namespace mlcca {

// ---------------------------------------------------------------------------
// Valuation: uniform handle over true models, nets and tables
// ---------------------------------------------------------------------------

template <class V>
concept ValuationSource = BundleValuation<V> && requires(const V& v) {
  { v.capacities() } -> std::convertible_to<const Capacities&>;
};

class Valuation {
 public:
  Valuation() = default;

  template <ValuationSource V>
  explicit Valuation(V source) : impl_(std::make_shared<Holder<V>>(std::move(source))) {}

  [[nodiscard]] double value(std::span<const int> x) const { return impl_->value(x); }
  [[nodiscard]] double value(const Bundle& x) const { return impl_->value(x.counts()); }
  [[nodiscard]] const Capacities& capacities() const { return impl_->capacities(); }

  /// Non-null when backed by a precomputed table (enables a flat scan).
  [[nodiscard]] const ValueTable* table() const { return impl_->table(); }

  /// Same valuation backed by its full table over X.
  [[nodiscard]] Valuation tabulated(std::size_t cap = kDefaultEnumerationCap) const {
    if (table()) return *this;
    return Valuation(mlcca::tabulate(*this, capacities(), cap));
  }

  [[nodiscard]] explicit operator bool() const { return static_cast<bool>(impl_); }

 private:
  struct Concept {
    virtual ~Concept() = default;
    virtual double value(std::span<const int> x) const = 0;
    virtual const Capacities& capacities() const = 0;
    virtual const ValueTable* table() const = 0;
  };
  template <class V>
  struct Holder final : Concept {
    explicit Holder(V v) : src(std::move(v)) {}
    double value(std::span<const int> x) const override { return src.value(x); }
    const Capacities& capacities() const override { return src.capacities(); }
    const ValueTable* table() const override {
      if constexpr (std::is_same_v<V, ValueTable>) return &src;
      else return nullptr;
    }
    V src;
  };
  std::shared_ptr<const Concept> impl_;
};

inline Valuation tabulated_valuation(const MmvnnNet& net, std::size_t cap = kDefaultEnumerationCap) {
  return Valuation(net.tabulate(cap));
}

template <class Range>
std::vector<Valuation> make_valuations(const Range& sources) {
  std::vector<Valuation> out;
  for (const auto& s : sources) out.emplace_back(s);
  return out;
}

// ---------------------------------------------------------------------------
// Demand oracle
// ---------------------------------------------------------------------------

enum class ArgmaxStrategy { kAuto, kNaive, kPruned };

struct OracleOptions {
  ArgmaxStrategy strategy = ArgmaxStrategy::kAuto;
  std::size_t enumeration_cap = kDefaultEnumerationCap;
};

struct DemandResult {
  Bundle bundle;
  double value = 0.0;
  double utility = 0.0;
};

namespace detail {

inline void check_prices(const Valuation& val, const PriceVector& p) {
  if (p.size() != val.capacities().size()) throw StructuralError("demand oracle: price dimension mismatch");
}

inline DemandResult argmax_scan(const Valuation& val, const PriceVector& p, std::size_t cap) {
  BundleSpace space(val.capacities());
  space.require_enumerable(cap);
  const ValueTable* table = val.table();
  std::size_t best_rank = 0;
  double best_u = -std::numeric_limits<double>::infinity();
  double best_v = 0.0;
  space.for_each([&](std::size_t r, std::span<const int> x) {
    const double v = table ? table->at_rank(r) : val.value(x);
    const double u = v - inner_product(p.values(), x);
    if (u > best_u) {
      best_u = u;
      best_v = v;
      best_rank = r;
    }
  });
  return {space.unrank(best_rank), best_v, best_u};
}

// Depth-first over items in rank order; a subtree with items >= j free is
// bounded by v(fixed part, rest at capacity) - <p, fixed part>, valid
// because valuations are monotone and prices nonnegative.
class PrunedArgmax {
 public:
  PrunedArgmax(const Valuation& val, const PriceVector& p) : val_(val), p_(p), caps_(val.capacities()) {}

  DemandResult solve() {
    const auto m = caps_.size();
    x_.assign(m, 0);
    best_x_.assign(m, 0);
    best_u_ = -std::numeric_limits<double>::infinity();
    visit(0, 0.0);
    Bundle b(best_x_);
    return {b, val_.value(b), best_u_};
  }

 private:
  void visit(std::size_t j, double fixed_cost) {
    const auto m = caps_.size();
    if (j == m) {
      const double u = val_.value(x_) - inner_product(p_.values(), x_);
      if (u > best_u_) {
        best_u_ = u;
        best_x_ = x_;
      }
      return;
    }
    for (int k = 0; k <= caps_[j]; ++k) {
      x_[j] = k;
      const double cost = fixed_cost + p_[j] * k;
      if (j + 1 < m && std::isfinite(best_u_)) {
        for (std::size_t q = j + 1; q < m; ++q) x_[q] = caps_[q];
        const double bound = val_.value(x_) - cost;
        for (std::size_t q = j + 1; q < m; ++q) x_[q] = 0;
        const double margin = 1e-9 * (1.0 + std::abs(best_u_));
        if (bound < best_u_ - margin) continue;
      }
      visit(j + 1, cost);
    }
    x_[j] = 0;
  }

  const Valuation& val_;
  const PriceVector& p_;
  const Capacities& caps_;
  std::vector<int> x_;
  std::vector<int> best_x_;
  double best_u_ = 0.0;
};

}  // namespace detail

/// Utility-maximizing bundle; ties go to the smallest rank.
inline DemandResult argmax_utility(const Valuation& val, const PriceVector& p, const OracleOptions& opt = {}) {
  detail::check_prices(val, p);
  ArgmaxStrategy s = opt.strategy;
  if (s == ArgmaxStrategy::kAuto) s = val.table() ? ArgmaxStrategy::kNaive : ArgmaxStrategy::kPruned;
  if (s == ArgmaxStrategy::kNaive) return detail::argmax_scan(val, p, opt.enumeration_cap);
  return detail::PrunedArgmax(val, p).solve();
}

/// U(p, v) = max_x v(x) - <p, x>.
inline double indirect_utility(const Valuation& val, const PriceVector& p, const OracleOptions& opt = {}) {
  return argmax_utility(val, p, opt).utility;
}

/// R(p) = <c, p>.
inline double indirect_revenue(const PriceVector& p, const Capacities& c) {
  return inner_product(p.values(), c.counts());
}

/// Every maximizer of v(x) - <p,x> within `tol` of the optimum, rank order.
inline std::vector<Bundle> argmax_tie_set(const Valuation& val, const PriceVector& p, double tol = kMoneyTol,
                                          std::size_t cap = kDefaultEnumerationCap) {
  detail::check_prices(val, p);
  BundleSpace space(val.capacities());
  space.require_enumerable(cap);
  const ValueTable* table = val.table();
  std::vector<double> util(space.size());
  double best = -std::numeric_limits<double>::infinity();
  space.for_each([&](std::size_t r, std::span<const int> x) {
    util[r] = (table ? table->at_rank(r) : val.value(x)) - inner_product(p.values(), x);
    best = std::max(best, util[r]);
  });
  std::vector<Bundle> out;
  for (std::size_t r = 0; r < util.size(); ++r)
    if (util[r] >= best - tol) out.push_back(space.unrank(r));
  return out;
}

/// Deterministic demand of every bidder at p.
inline std::vector<Bundle> demands_at(std::span<const Valuation> vals, const PriceVector& p,
                                      const OracleOptions& opt = {}) {
  std::vector<Bundle> out;
  out.reserve(vals.size());
  for (const auto& v : vals) out.push_back(argmax_utility(v, p, opt).bundle);
  return out;
}

// ---------------------------------------------------------------------------
// Elicited data and winner determination
// ---------------------------------------------------------------------------

/// Per-bidder demand observations R_i.
struct ReportSet {
  std::vector<std::vector<DemandObservation>> per_bidder;

  ReportSet() = default;
  explicit ReportSet(std::size_t n) : per_bidder(n) {}

  [[nodiscard]] std::size_t num_bidders() const { return per_bidder.size(); }

  void add(std::size_t bidder, DemandObservation obs) {
    auto& list = per_bidder.at(bidder);
    if (!list.empty()) {
      if (list.front().bundle.size() != obs.bundle.size()) throw StructuralError("report set: dimension mismatch");
      if (obs.round <= list.back().round) throw ValidationError("report set: rounds must strictly increase");
    }
    list.push_back(std::move(obs));
  }

  void validate(std::size_t m) const {
    for (const auto& list : per_bidder) {
      for (std::size_t r = 0; r < list.size(); ++r) {
        if (list[r].bundle.size() != m || list[r].price.size() != m)
          throw StructuralError("report set: dimension mismatch");
        if (r > 0 && list[r].round <= list[r - 1].round) throw ValidationError("report set: rounds must strictly increase");
      }
    }
  }
};

/// A (bundle, value) bid; inferred or explicit.
struct ValueBid {
  Bundle bundle;
  double amount = 0.0;
  friend bool operator==(const ValueBid&, const ValueBid&) = default;
};

using BidLists = std::vector<std::vector<ValueBid>>;

/// Per-bidder WDP candidates sorted by rank, the empty bundle first.
using CandidateSets = std::vector<std::vector<ValueBid>>;

/// Candidate bundles for each bidder: every observed bundle at its highest
/// observed inferred value <p, x>, every extra bid at its amount (max on
/// collision), and the empty bundle at 0.
inline CandidateSets build_candidates(const ReportSet& reports, const BidLists& extra, std::size_t m) {
  const auto n = reports.num_bidders();
  if (!extra.empty() && extra.size() != n) throw StructuralError("build_candidates: bid list count mismatch");
  CandidateSets out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::map<Bundle, double> best;
    best[Bundle::empty(m)] = 0.0;
    auto offer = [&](const Bundle& b, double v) {
      if (b.size() != m) throw StructuralError("build_candidates: bundle dimension mismatch");
      auto [it, inserted] = best.try_emplace(b, v);
      if (!inserted) it->second = std::max(it->second, v);
    };
    for (const auto& obs : reports.per_bidder[i]) offer(obs.bundle, inner_product(obs.price, obs.bundle));
    if (!extra.empty())
      for (const auto& bid : extra[i]) offer(bid.bundle, bid.amount);
    for (auto& [b, v] : best) out[i].push_back({b, v});
  }
  return out;
}

struct WdpResult {
  Allocation allocation;
  std::vector<std::size_t> choice;  // index into each bidder's candidate list
  double welfare = 0.0;             // inferred (candidate-value) welfare
};

enum class WdpStrategy { kBranchAndBound, kNaive };

namespace detail {

class CandidateWdp {
 public:
  CandidateWdp(const CandidateSets& cands, const Capacities& c, WdpStrategy s) : cands_(cands), caps_(c), strategy_(s) {
    const auto n = cands_.size();
    for (const auto& list : cands_) {
      if (list.empty() || !list.front().bundle.is_empty())
        throw StructuralError("wdp: every candidate list must start with the empty bundle");
      for (const auto& b : list)
        if (b.bundle.size() != caps_.size()) throw StructuralError("wdp: candidate dimension mismatch");
    }
    rest_bound_.assign(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) {
      double mx = 0.0;
      for (const auto& b : cands_[i]) mx = std::max(mx, b.amount);
      rest_bound_[i] = rest_bound_[i + 1] + mx;
    }
  }

  WdpResult solve() {
    const auto n = cands_.size();
    remaining_ = caps_.vec();
    pick_.assign(n, 0);
    best_pick_.assign(n, 0);
    best_ = -std::numeric_limits<double>::infinity();
    visit(0, 0.0);
    WdpResult res;
    res.choice = best_pick_;
    res.welfare = best_;
    for (std::size_t i = 0; i < n; ++i) res.allocation.bundles.push_back(cands_[i][best_pick_[i]].bundle);
    return res;
  }

 private:
  void visit(std::size_t i, double acc) {
    if (i == cands_.size()) {
      if (acc > best_ + kMoneyTol || !std::isfinite(best_)) {
        best_ = acc;
        best_pick_ = pick_;
      }
      return;
    }
    if (strategy_ == WdpStrategy::kBranchAndBound && std::isfinite(best_)) {
      const double ub = acc + rest_bound_[i];
      if (ub + 1e-12 * (1.0 + std::abs(ub)) <= best_ + kMoneyTol) return;
    }
    const auto& list = cands_[i];
    for (std::size_t k = 0; k < list.size(); ++k) {
      const auto& b = list[k].bundle;
      bool fits = true;
      for (std::size_t j = 0; j < b.size(); ++j)
        if (b[j] > remaining_[j]) {
          fits = false;
          break;
        }
      if (!fits) continue;
      for (std::size_t j = 0; j < b.size(); ++j) remaining_[j] -= b[j];
      pick_[i] = k;
      visit(i + 1, acc + list[k].amount);
      for (std::size_t j = 0; j < b.size(); ++j) remaining_[j] += b[j];
    }
  }

  const CandidateSets& cands_;
  const Capacities& caps_;
  WdpStrategy strategy_;
  std::vector<double> rest_bound_;
  std::vector<int> remaining_;
  std::vector<std::size_t> pick_;
  std::vector<std::size_t> best_pick_;
  double best_ = 0.0;
};

}  // namespace detail

/// Welfare-maximizing feasible choice of one candidate per bidder; ties go
/// to the lexicographically smallest tuple of candidate ranks.
inline WdpResult wdp_candidates(const CandidateSets& cands, const Capacities& c,
                                WdpStrategy s = WdpStrategy::kBranchAndBound) {
  return detail::CandidateWdp(cands, c, s).solve();
}

inline WdpResult wdp_reports(const ReportSet& reports, const Capacities& c) {
  reports.validate(c.size());
  return wdp_candidates(build_candidates(reports, {}, c.size()), c);
}

struct TrueWdpResult {
  Allocation allocation;
  double welfare = 0.0;
};

/// Efficient allocation under true valuations, by dynamic programming over
/// remaining-capacity vectors (bidder 0 first, smallest-rank tie-break).
inline TrueWdpResult wdp_true(std::span<const Valuation> vals, const Capacities& c,
                              std::size_t cap = kDefaultEnumerationCap) {
  const auto n = vals.size();
  const auto m = c.size();
  BundleSpace space(c);
  space.require_enumerable(cap);
  std::vector<ValueTable> tables;
  for (const auto& v : vals) {
    if (!(v.capacities() == c)) throw StructuralError("wdp_true: valuation capacities mismatch");
    tables.push_back(v.table() ? *v.table() : tabulate(v, c, cap));
  }
  const std::size_t N = space.size();
  // f[i][rank(rem)] = best welfare of bidders i..n-1 within rem.
  std::vector<std::vector<double>> f(n + 1, std::vector<double>(N, 0.0));
  std::vector<std::vector<std::size_t>> arg(n, std::vector<std::size_t>(N, 0));
  std::vector<int> rem(m), x(m);
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t rr = 0; rr < N; ++rr) {
      space.unrank_into(rr, rem);
      double best = -std::numeric_limits<double>::infinity();
      std::size_t best_x = 0;
      std::fill(x.begin(), x.end(), 0);
      while (true) {
        const std::size_t xr = space.rank(x);
        const double w = tables[i].at_rank(xr) + f[i + 1][rr - xr];
        if (w > best + kMoneyTol || !std::isfinite(best)) {
          best = w;
          best_x = xr;
        }
        std::size_t j = m;
        while (j-- > 0) {
          if (++x[j] <= rem[j]) break;
          x[j] = 0;
        }
        if (j == static_cast<std::size_t>(-1)) break;
      }
      f[i][rr] = best;
      arg[i][rr] = best_x;
    }
  }
  TrueWdpResult res;
  std::size_t rr = N - 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t xr = arg[i][rr];
    res.allocation.bundles.push_back(space.unrank(xr));
    rr -= xr;
  }
  res.welfare = 0.0;
  for (std::size_t i = 0; i < n; ++i) res.welfare += tables[i].value(res.allocation.bundles[i].counts());
  return res;
}

inline TrueWdpResult wdp_true(const std::vector<ValueModel>& models, const Capacities& c,
                              std::size_t cap = kDefaultEnumerationCap) {
  const auto vals = make_valuations(models);
  return wdp_true(std::span<const Valuation>(vals), c, cap);
}

// ---------------------------------------------------------------------------
// Clearing price grid search
// ---------------------------------------------------------------------------

/// Grid {lo, lo+step, ..., <= hi} on every item.
struct PriceGrid {
  double lo = 0.0;
  double hi = 1.0;
  double step = 0.05;
  std::size_t max_points = 2'000'000;
};

/// Searches the grid for a price at which some tuple of utility-maximizing
/// bundles (ties enumerated exhaustively) sells every copy exactly.
inline std::optional<PriceVector> brute_force_clearing_search(std::span<const Valuation> vals, const Capacities& c,
                                                              const PriceGrid& grid, double tie_tol = kMoneyTol) {
  if (!(grid.step > 0.0) || grid.hi < grid.lo || grid.lo < 0.0) throw ValidationError("price grid: invalid spec");
  const auto m = c.size();
  const auto per_axis = static_cast<std::size_t>(std::floor((grid.hi - grid.lo) / grid.step + 1e-9)) + 1;
  std::size_t total = 1;
  for (std::size_t j = 0; j < m; ++j) {
    if (total > grid.max_points / per_axis) throw ResourceError("price grid: too many points");
    total *= per_axis;
  }
  std::vector<Valuation> tabs;
  for (const auto& v : vals) tabs.push_back(v.tabulated());

  std::vector<std::size_t> idx(m, 0);
  for (std::size_t g = 0; g < total; ++g) {
    std::vector<double> pv(m);
    for (std::size_t j = 0; j < m; ++j) pv[j] = grid.lo + grid.step * static_cast<double>(idx[j]);
    PriceVector p(pv);
    std::vector<std::vector<Bundle>> ties;
    for (const auto& v : tabs) ties.push_back(argmax_tie_set(v, p, tie_tol));
    std::vector<int> remaining = c.vec();
    std::function<bool(std::size_t)> search = [&](std::size_t i) -> bool {
      if (i == ties.size()) return std::all_of(remaining.begin(), remaining.end(), [](int r) { return r == 0; });
      for (const auto& b : ties[i]) {
        bool fits = true;
        for (std::size_t j = 0; j < m; ++j) fits = fits && b[j] <= remaining[j];
        if (!fits) continue;
        for (std::size_t j = 0; j < m; ++j) remaining[j] -= b[j];
        const bool ok = search(i + 1);
        for (std::size_t j = 0; j < m; ++j) remaining[j] += b[j];
        if (ok) return true;
      }
      return false;
    };
    if (search(0)) return p;
    for (std::size_t j = m; j-- > 0;) {
      if (++idx[j] < per_axis) break;
      idx[j] = 0;
    }
  }
  return std::nullopt;
}

}  // namespace mlcca
