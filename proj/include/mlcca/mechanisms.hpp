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

// Auction mechanisms: the clock auction baseline, supplementary bids, the
// ML-powered clock auction, and payment rules.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "mlcca/core.hpp"
#include "mlcca/detail/small_qp.hpp"
#include "mlcca/mmvnn.hpp"
#include "mlcca/oracles.hpp"
#include "mlcca/price_engine.hpp"
#include "mlcca/rng.hpp"
#include "mlcca/training.hpp"

namespace mlcca {

// ---------------------------------------------------------------------------
// Clock phase
// ---------------------------------------------------------------------------

struct CcaConfig {
  PriceVector reserve_prices;
  double increment = 0.05;
  int q_max = 100;
  bool early_stop = true;  // stop once nothing is over-demanded

  void validate(const Capacities& c) const {
    if (reserve_prices.size() != c.size()) throw StructuralError("cca config: reserve dimension mismatch");
    if (!(increment > 0.0)) throw ValidationError("cca config: increment must be > 0");
    if (q_max < 1) throw ValidationError("cca config: q_max must be >= 1");
  }
};

/// Raises every over-demanded item's price by the increment.
inline PriceVector cca_price_update(const PriceVector& p, std::span<const int> demand, const Capacities& c,
                                    double increment) {
  if (p.size() != c.size() || demand.size() != c.size()) throw StructuralError("cca_price_update: dimension mismatch");
  std::vector<double> out(p.values().begin(), p.values().end());
  for (std::size_t j = 0; j < out.size(); ++j)
    if (demand[j] > c[j]) out[j] *= 1.0 + increment;
  return PriceVector(std::move(out));
}

/// reserve_j = rho * mean_i max_x [v_i(x + e_j) - v_i(x)].
inline PriceVector default_reserve_prices(std::span<const Valuation> vals, const Capacities& c, double rho = 0.1) {
  const auto m = c.size();
  std::vector<double> r(m, 0.0);
  if (vals.empty()) return PriceVector(std::move(r));
  BundleSpace space(c);
  for (const auto& v : vals) {
    const auto tab = v.tabulated();
    const auto& t = *tab.table();
    std::vector<double> best(m, 0.0);
    space.for_each([&](std::size_t rank, std::span<const int> x) {
      for (std::size_t j = 0; j < m; ++j)
        if (x[j] < c[j]) best[j] = std::max(best[j], t.at_rank(rank + space.stride(j)) - t.at_rank(rank));
    });
    for (std::size_t j = 0; j < m; ++j) r[j] += best[j];
  }
  for (auto& x : r) x *= rho / static_cast<double>(vals.size());
  return PriceVector(std::move(r));
}

struct ClockPhase {
  ReportSet reports;
  std::vector<PriceVector> prices;        // one per round
  std::vector<std::vector<int>> demand;   // total demand per round
  bool cleared = false;
  Allocation last_allocation;
  int rounds = 0;
};

inline bool demand_clears(std::span<const int> d, const Capacities& c) {
  for (std::size_t j = 0; j < c.size(); ++j)
    if (d[j] != c[j]) return false;
  return true;
}

inline bool demand_overdemanded(std::span<const int> d, const Capacities& c) {
  for (std::size_t j = 0; j < c.size(); ++j)
    if (d[j] > c[j]) return true;
  return false;
}

/// Truthful clock phase under the fixed-increment price rule.
inline ClockPhase cca_clock_phase(std::span<const Valuation> vals, const Capacities& c, const CcaConfig& cfg) {
  cfg.validate(c);
  std::vector<Valuation> tabs;
  for (const auto& v : vals) tabs.push_back(v.tabulated());
  ClockPhase out;
  out.reports = ReportSet(vals.size());
  PriceVector p = cfg.reserve_prices;
  for (int r = 1; r <= cfg.q_max; ++r) {
    auto bundles = demands_at(tabs, p);
    const auto d = total_demand(bundles, c.size());
    for (std::size_t i = 0; i < bundles.size(); ++i) out.reports.add(i, DemandObservation(bundles[i], p, r));
    out.prices.push_back(p);
    out.demand.push_back(d);
    out.rounds = r;
    out.last_allocation = Allocation{std::move(bundles)};
    if (demand_clears(d, c)) {
      out.cleared = true;
      break;
    }
    if (cfg.early_stop && !demand_overdemanded(d, c)) break;
    p = cca_price_update(p, d, c, cfg.increment);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Supplementary bids
// ---------------------------------------------------------------------------

/// True-value bids on every distinct non-empty bundle a bidder demanded.
inline BidLists raised_clock_bids(const ReportSet& reports, std::span<const Valuation> vals) {
  if (reports.num_bidders() != vals.size()) throw StructuralError("raised_clock_bids: bidder count mismatch");
  BidLists out(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    std::set<Bundle> seen;
    for (const auto& obs : reports.per_bidder[i])
      if (!obs.bundle.is_empty()) seen.insert(obs.bundle);
    for (const auto& b : seen) out[i].push_back({b, vals[i].value(b)});
  }
  return out;
}

/// True-value bids on the q bundles of highest utility at p (ties by rank).
inline std::vector<ValueBid> profit_max_bids(const Valuation& val, const PriceVector& p, int q,
                                             std::size_t cap = kDefaultEnumerationCap) {
  if (q < 0) throw ValidationError("profit_max_bids: q must be >= 0");
  if (p.size() != val.capacities().size()) throw StructuralError("profit_max_bids: price dimension mismatch");
  BundleSpace space(val.capacities());
  space.require_enumerable(cap);
  const auto tab = val.tabulated(cap);
  const auto& t = *tab.table();
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(space.size());
  space.for_each([&](std::size_t r, std::span<const int> x) {
    scored.emplace_back(t.at_rank(r) - inner_product(p.values(), x), r);
  });
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(q), scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  std::vector<ValueBid> out;
  for (std::size_t s = 0; s < k; ++s) {
    const auto r = scored[s].second;
    out.push_back({space.unrank(r), t.at_rank(r)});
  }
  return out;
}

inline WdpResult wdp_with_bids(const ReportSet& reports, const BidLists& extra, const Capacities& c) {
  reports.validate(c.size());
  return wdp_candidates(build_candidates(reports, extra, c.size()), c);
}

/// True iff bid.amount <= inferred_final_bid + <p^r, bid.bundle - x^r>.
inline bool revealed_preference_ok(const ValueBid& bid, const DemandObservation& against, double inferred_final_bid) {
  if (bid.bundle.size() != against.bundle.size()) throw StructuralError("revealed_preference_ok: dimension mismatch");
  double delta = 0.0;
  for (std::size_t j = 0; j < bid.bundle.size(); ++j)
    delta += against.price[j] * static_cast<double>(bid.bundle[j] - against.bundle[j]);
  return bid.amount <= inferred_final_bid + delta + kMoneyTol;
}

// ---------------------------------------------------------------------------
// Payments
// ---------------------------------------------------------------------------

namespace detail {

inline double bid_for(const CandidateSets& cands, const Allocation& a, std::size_t i) {
  for (const auto& b : cands[i])
    if (b.bundle == a.bundles[i]) return b.amount;
  if (a.bundles[i].is_empty()) return 0.0;
  throw ValidationError("payments: allocated bundle is not among the bidder's candidates");
}

/// WDP restricted to the bidders flagged in `keep`.
inline double restricted_welfare(const CandidateSets& cands, const Capacities& c, const std::vector<bool>& keep) {
  CandidateSets sub(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (keep[i]) sub[i] = cands[i];
    else sub[i] = {cands[i].front()};
  }
  return wdp_candidates(sub, c).welfare;
}

}  // namespace detail

/// pi_i = W(-i) - (W - b_i), clamped to [0, b_i].
inline std::vector<double> vcg_payments(const CandidateSets& cands, const Allocation& a, const Capacities& c) {
  const auto n = cands.size();
  if (a.bundles.size() != n) throw StructuralError("vcg_payments: allocation size mismatch");
  std::vector<double> bids(n);
  double w = 0.0;
  for (std::size_t i = 0; i < n; ++i) w += bids[i] = detail::bid_for(cands, a, i);
  std::vector<double> pi(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (a.bundles[i].is_empty()) continue;
    std::vector<bool> keep(n, true);
    keep[i] = false;
    const double without = detail::restricted_welfare(cands, c, keep);
    pi[i] = std::clamp(without - (w - bids[i]), 0.0, bids[i]);
  }
  return pi;
}

struct CorePayments {
  std::vector<double> payments;
  std::vector<double> vcg;
  double min_core_revenue = 0.0;
  // Rows of sum_{i not in L} pi_i >= rhs_L, one per coalition L (bitmask).
  std::vector<std::pair<std::uint32_t, double>> constraints;
};

/// Minimum-revenue core payments closest in L2 to VCG.
inline CorePayments vcg_nearest_details(const CandidateSets& cands, const Allocation& a, const Capacities& c,
                                        std::size_t max_bidders = 16) {
  const auto n = cands.size();
  if (n > max_bidders) throw ResourceError("vcg_nearest: too many bidders for coalition enumeration");
  if (a.bundles.size() != n) throw StructuralError("vcg_nearest: allocation size mismatch");
  CorePayments out;
  out.vcg = vcg_payments(cands, a, c);
  std::vector<double> bids(n);
  double w = 0.0;
  for (std::size_t i = 0; i < n; ++i) w += bids[i] = detail::bid_for(cands, a, i);

  const std::uint32_t full = (n == 0) ? 0u : ((1u << n) - 1u);
  for (std::uint32_t mask = 0; mask <= full; ++mask) {
    std::vector<bool> keep(n);
    double inside = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      keep[i] = (mask >> i) & 1u;
      if (keep[i]) inside += bids[i];
    }
    const double wl = detail::restricted_welfare(cands, c, keep);
    out.constraints.emplace_back(mask, wl - inside);
    if (mask == full) break;
  }

  // y = b - pi:  sum_{i not in L} y_i <= W - W_L,  y_i <= b_i,  y >= 0.
  const auto rows = static_cast<Eigen::Index>(out.constraints.size() + n);
  const auto cols = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd h(rows);
  for (std::size_t k = 0; k < out.constraints.size(); ++k) {
    const auto [mask, rhs] = out.constraints[k];
    double outside = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (!((mask >> i) & 1u)) {
        G(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = 1.0;
        outside += bids[i];
      }
    h[static_cast<Eigen::Index>(k)] = std::max(0.0, outside - rhs);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(out.constraints.size() + i);
    G(r, static_cast<Eigen::Index>(i)) = 1.0;
    h[r] = bids[i];
  }
  const Eigen::VectorXd y = detail::simplex_max_sum(G, h);
  Eigen::VectorXd start(cols);
  for (std::size_t i = 0; i < n; ++i) start[static_cast<Eigen::Index>(i)] = std::clamp(bids[i] - y[static_cast<Eigen::Index>(i)], 0.0, bids[i]);
  out.min_core_revenue = start.sum();

  // Projection: core rows, 0 <= pi <= b, revenue <= min core revenue.
  const auto q = static_cast<Eigen::Index>(out.constraints.size() + 2 * n + 1);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(q, cols);
  Eigen::VectorXd rhs(q);
  Eigen::Index row = 0;
  for (const auto& [mask, bound] : out.constraints) {
    for (std::size_t i = 0; i < n; ++i)
      if (!((mask >> i) & 1u)) A(row, static_cast<Eigen::Index>(i)) = 1.0;
    rhs[row++] = bound;
  }
  for (std::size_t i = 0; i < n; ++i) {
    A(row, static_cast<Eigen::Index>(i)) = 1.0;
    rhs[row++] = 0.0;
    A(row, static_cast<Eigen::Index>(i)) = -1.0;
    rhs[row++] = -bids[i];
  }
  A.row(row).setConstant(-1.0);
  rhs[row] = -out.min_core_revenue;
  // The start point satisfies every row up to rounding; relax by that much.
  const Eigen::VectorXd slack = (A * start - rhs).cwiseMin(0.0);
  rhs += slack;

  Eigen::VectorXd target(cols);
  for (std::size_t i = 0; i < n; ++i) target[static_cast<Eigen::Index>(i)] = out.vcg[i];
  const Eigen::VectorXd pi = detail::project_onto_polytope(A, rhs, target, start);
  out.payments.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.payments[i] = std::clamp(pi[static_cast<Eigen::Index>(i)], 0.0, bids[i]);
  return out;
}

inline std::vector<double> vcg_nearest_payments(const CandidateSets& cands, const Allocation& a, const Capacities& c,
                                                std::size_t max_bidders = 16) {
  return vcg_nearest_details(cands, a, c, max_bidders).payments;
}

// ---------------------------------------------------------------------------
// Mechanisms
// ---------------------------------------------------------------------------

enum class PaymentRule { kVcg, kVcgNearest };
enum class PushBids { kNone, kRaised, kProfitMax };
enum class AnchorMode { kPrevious, kInitial };

struct AuctionOutcome {
  Allocation allocation;
  std::vector<double> payments;
  ReportSet reports;
  std::vector<PriceVector> prices;
  std::vector<double> clearing_error;      // per round
  std::vector<double> efficiency_trace;    // per round, inferred WDP over reports so far
  bool cleared = false;
  int rounds = 0;
  double inferred_welfare = 0.0;
};

struct SettleConfig {
  PushBids push = PushBids::kNone;
  int q_p_max = 100;
  PaymentRule payment = PaymentRule::kVcg;
};

/// Final WDP on the reports plus the selected push bids.
inline std::pair<WdpResult, CandidateSets> settle_allocation(const ReportSet& reports, std::span<const Valuation> vals,
                                                            const Capacities& c, const PriceVector& final_price,
                                                            PushBids push, int q_p_max) {
  BidLists extra;
  if (push == PushBids::kRaised) extra = raised_clock_bids(reports, vals);
  if (push == PushBids::kProfitMax) {
    extra.resize(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) extra[i] = profit_max_bids(vals[i], final_price, q_p_max);
  }
  auto cands = build_candidates(reports, extra, c.size());
  auto res = wdp_candidates(cands, c);
  return {std::move(res), std::move(cands)};
}

inline std::vector<double> compute_payments(const CandidateSets& cands, const Allocation& a, const Capacities& c,
                                            PaymentRule rule) {
  return rule == PaymentRule::kVcg ? vcg_payments(cands, a, c) : vcg_nearest_payments(cands, a, c);
}

namespace detail {

inline double squared_gap(std::span<const int> d, const Capacities& c) {
  double s = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) s += static_cast<double>(d[j] - c[j]) * static_cast<double>(d[j] - c[j]);
  return s;
}

/// Records one round of truthful demand; returns the per-bidder bundles.
inline std::vector<Bundle> query_round(std::span<const Valuation> tabs, const PriceVector& p, int round,
                                       const Capacities& c, AuctionOutcome& out, double optimum) {
  auto bundles = demands_at(tabs, p);
  for (std::size_t i = 0; i < bundles.size(); ++i) out.reports.add(i, DemandObservation(bundles[i], p, round));
  out.prices.push_back(p);
  out.clearing_error.push_back(squared_gap(total_demand(bundles, c.size()), c));
  const auto wdp = wdp_reports(out.reports, c);
  double v = 0.0;
  for (std::size_t i = 0; i < tabs.size(); ++i) v += tabs[i].value(wdp.allocation.bundles[i]);
  out.efficiency_trace.push_back(optimum > 0.0 ? v / optimum : 1.0);
  out.rounds = round;
  return bundles;
}

inline void finish_cleared(std::span<const Valuation> /*vals*/, const Capacities& c, std::vector<Bundle> bundles,
                           PaymentRule rule, AuctionOutcome& out) {
  out.cleared = true;
  out.allocation = Allocation{std::move(bundles)};
  auto cands = build_candidates(out.reports, {}, c.size());
  double w = 0.0;
  for (std::size_t i = 0; i < out.allocation.bundles.size(); ++i) w += detail::bid_for(cands, out.allocation, i);
  out.inferred_welfare = w;
  out.payments = compute_payments(cands, out.allocation, c, rule);
}

inline void finish_settled(std::span<const Valuation> vals, const Capacities& c, const SettleConfig& s,
                           AuctionOutcome& out) {
  auto [res, cands] = settle_allocation(out.reports, vals, c, out.prices.back(), s.push, s.q_p_max);
  out.allocation = res.allocation;
  out.inferred_welfare = res.welfare;
  out.payments = compute_payments(cands, out.allocation, c, s.payment);
}

inline double optimum_welfare(std::span<const Valuation> tabs, const Capacities& c) {
  return wdp_true(tabs, c).welfare;
}

}  // namespace detail

/// Clock auction baseline: clock phase, then push bids, WDP and payments.
inline AuctionOutcome cca(std::span<const Valuation> vals, const Capacities& c, const CcaConfig& cfg,
                          const SettleConfig& settle = {}) {
  cfg.validate(c);
  std::vector<Valuation> tabs;
  for (const auto& v : vals) tabs.push_back(v.tabulated());
  const double optimum = detail::optimum_welfare(tabs, c);
  AuctionOutcome out;
  out.reports = ReportSet(vals.size());
  PriceVector p = cfg.reserve_prices;
  for (int r = 1; r <= cfg.q_max; ++r) {
    auto bundles = detail::query_round(tabs, p, r, c, out, optimum);
    const auto d = total_demand(bundles, c.size());
    if (demand_clears(d, c)) {
      detail::finish_cleared(tabs, c, std::move(bundles), settle.payment, out);
      return out;
    }
    if (cfg.early_stop && !demand_overdemanded(d, c)) break;
    p = cca_price_update(p, d, c, cfg.increment);
  }
  detail::finish_settled(tabs, c, settle, out);
  return out;
}

struct MlCcaConfig {
  int q_init = 10;
  int q_max = 30;
  std::optional<double> f_init_increment;  // default: 1.05^(q_max/q_init) - 1
  std::optional<PriceVector> reserve_prices;  // default: default_reserve_prices(rho)
  double reserve_rho = 0.1;
  Architecture architecture;
  TrainConfig train;
  std::vector<TrainConfig> train_per_bidder;  // overrides `train` when non-empty
  std::vector<Architecture> architecture_per_bidder;
  NextPriceConfig next_price;
  AnchorMode anchor = AnchorMode::kPrevious;
  bool perfect_ml = false;  // true valuations in place of trained nets
  bool warm_start = false;
  SettleConfig settle;
  std::uint64_t seed = 0;

  [[nodiscard]] double increment() const {
    return f_init_increment ? *f_init_increment
                            : std::pow(1.05, static_cast<double>(q_max) / static_cast<double>(q_init)) - 1.0;
  }

  void validate(std::size_t n, const Capacities& c) const {
    if (q_init < 1) throw ValidationError("ml-cca config: q_init must be >= 1");
    if (q_init > q_max) throw ValidationError("ml-cca config: q_init must not exceed q_max");
    if (!(increment() > 0.0)) throw ValidationError("ml-cca config: increment must be > 0");
    if (reserve_prices && reserve_prices->size() != c.size()) throw StructuralError("ml-cca config: reserve dimension mismatch");
    if (!train_per_bidder.empty() && train_per_bidder.size() != n)
      throw StructuralError("ml-cca config: per-bidder train configs must match bidder count");
    if (!architecture_per_bidder.empty() && architecture_per_bidder.size() != n)
      throw StructuralError("ml-cca config: per-bidder architectures must match bidder count");
    next_price.validate();
    for (const auto& t : train_per_bidder) t.validate();
    train.validate();
  }
};

/// ML-powered clock auction.
inline AuctionOutcome ml_cca(std::span<const Valuation> vals, const Capacities& c, const MlCcaConfig& cfg) {
  const auto n = vals.size();
  cfg.validate(n, c);
  std::vector<Valuation> tabs;
  for (const auto& v : vals) tabs.push_back(v.tabulated());
  const double optimum = detail::optimum_welfare(tabs, c);
  AuctionOutcome out;
  out.reports = ReportSet(n);
  PriceVector p = cfg.reserve_prices ? *cfg.reserve_prices : default_reserve_prices(tabs, c, cfg.reserve_rho);

  int r = 1;
  for (; r <= cfg.q_init; ++r) {
    auto bundles = detail::query_round(tabs, p, r, c, out, optimum);
    const auto d = total_demand(bundles, c.size());
    if (demand_clears(d, c)) {
      detail::finish_cleared(tabs, c, std::move(bundles), cfg.settle.payment, out);
      return out;
    }
    if (r < cfg.q_init) p = cca_price_update(p, d, c, cfg.increment());
  }
  const PriceVector initial_anchor = out.prices.back();

  std::vector<std::optional<MmvnnNet>> nets(n);
  for (; r <= cfg.q_max; ++r) {
    std::vector<Valuation> predicted;
    for (std::size_t i = 0; i < n; ++i) {
      if (cfg.perfect_ml) {
        predicted.push_back(tabs[i]);
        continue;
      }
      const auto& arch = cfg.architecture_per_bidder.empty() ? cfg.architecture : cfg.architecture_per_bidder[i];
      TrainConfig tc = cfg.train_per_bidder.empty() ? cfg.train : cfg.train_per_bidder[i];
      tc.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(r), i, 1});
      MmvnnNet start = (cfg.warm_start && nets[i]) ? *nets[i] : init(arch, c, derive_seed(cfg.seed, {static_cast<std::uint64_t>(r), i, 0}));
      auto trained = train_on_dqs(std::move(start), out.reports.per_bidder[i], tc).first;
      predicted.push_back(tabulated_valuation(trained));
      nets[i] = std::move(trained);
    }
    NextPriceConfig np = cfg.next_price;
    np.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(r), n, 2});
    const PriceVector& anchor = cfg.anchor == AnchorMode::kPrevious ? out.prices.back() : initial_anchor;
    p = next_price(predicted, anchor, c, np).first;
    auto bundles = detail::query_round(tabs, p, r, c, out, optimum);
    if (demand_clears(total_demand(bundles, c.size()), c)) {
      detail::finish_cleared(tabs, c, std::move(bundles), cfg.settle.payment, out);
      return out;
    }
  }
  detail::finish_settled(tabs, c, cfg.settle, out);
  return out;
}

}  // namespace mlcca
