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

// Experiment orchestration over seeds, the worked-example reproduction, and
// prediction-vs-truth export.
//
// results.csv columns:
//   seed,mechanism,mode,rounds,cleared,e_clock,e_raise,e_profit,wallclock_ms

#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mlcca/mechanisms.hpp"
#include "mlcca/metrics.hpp"
#include "mlcca/serialization.hpp"
#include "mlcca/value_models.hpp"

namespace mlcca {

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

/// "101..105" or "7" or a comma list of either.
inline std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string part;
  auto num = [&](const std::string& s) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      throw ValidationError("seeds: cannot parse '" + s + "'");
    }
    if (used != s.size()) throw ValidationError("seeds: cannot parse '" + s + "'");
    return static_cast<std::uint64_t>(v);
  };
  while (std::getline(ss, part, ',')) {
    part.erase(0, part.find_first_not_of(" \t"));
    part.erase(part.find_last_not_of(" \t") + 1);
    if (part.empty()) continue;
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      out.push_back(num(part));
      continue;
    }
    const auto lo = num(part.substr(0, dots));
    const auto hi = num(part.substr(dots + 2));
    if (hi < lo) throw ValidationError("seeds: empty range '" + part + "'");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
  }
  if (out.empty()) throw ValidationError("seeds: no seeds given");
  return out;
}

/// Default synthetic domain: 4 items with 3 copies each, 4 synergy bidders.
inline DomainSpec native_synergy_domain() {
  DomainSpec d{Capacities{3, 3, 3, 3}, {}};
  BidderTypeSpec t;
  t.name = "synergy";
  t.count = 4;
  t.generator.capacities = d.capacities;
  t.generator.interest_size = 3;
  t.generator.base_lo = 1.0;
  t.generator.base_hi = 2.0;
  t.generator.synergy = 0.1;
  t.generator.num_bonuses = 2;
  t.generator.bonus_lo = 0.5;
  t.generator.bonus_hi = 2.0;
  d.types.push_back(t);
  return d;
}

enum class MechanismKind { kCca, kMlCca };

struct MechanismSpec {
  std::string name = "cca";
  MechanismKind kind = MechanismKind::kCca;
  double reserve_rho = 0.1;
  CcaConfig cca;  // reserve_prices filled per instance
  MlCcaConfig ml;

  [[nodiscard]] std::string mode() const {
    if (kind == MechanismKind::kCca) return "clock";
    if (ml.perfect_ml) return ml.next_price.unconstrained() ? "perfect_unconstrained" : "perfect";
    return ml.next_price.unconstrained() ? "unconstrained" : "constrained";
  }
};

struct ExperimentConfig {
  DomainSpec domain;
  std::vector<std::uint64_t> seeds;
  std::vector<MechanismSpec> mechanisms;
  int q_p_max = 100;
  std::string output_dir = "mlcca_out";
  bool record_wallclock = true;  // false writes 0 so reruns are byte-identical
  int workers = 0;               // 0: MLCCA_WORKERS or hardware concurrency

  void validate() const {
    if (seeds.empty()) throw ValidationError("experiment: seeds must be nonempty");
    if (mechanisms.empty()) throw ValidationError("experiment: no mechanisms configured");
    if (q_p_max < 0) throw ValidationError("experiment: q_p_max must be >= 0");
    for (const auto& m : mechanisms)
      if (m.name.empty() || m.name.find_first_of(",/\\ ") != std::string::npos)
        throw ValidationError("experiment: mechanism names must be nonempty without ',', '/' or spaces");
  }
};

inline MechanismSpec mechanism_from_json(const Json& j) {
  MechanismSpec m;
  m.name = j.value("name", m.name);
  const auto kind = j.value("kind", std::string("cca"));
  if (kind != "cca" && kind != "ml_cca") throw ValidationError("mechanism: kind must be cca or ml_cca");
  m.kind = kind == "cca" ? MechanismKind::kCca : MechanismKind::kMlCca;
  m.reserve_rho = j.value("reserve_rho", m.reserve_rho);
  m.cca.increment = j.value("increment", m.cca.increment);
  m.cca.q_max = j.value("q_max", m.cca.q_max);
  m.cca.early_stop = j.value("early_stop", m.cca.early_stop);
  auto& ml = m.ml;
  ml.q_init = j.value("q_init", ml.q_init);
  ml.q_max = j.value("q_max", ml.q_max);
  if (j.contains("f_init_increment")) ml.f_init_increment = j.at("f_init_increment").get<double>();
  ml.reserve_rho = m.reserve_rho;
  if (j.contains("architecture")) ml.architecture = architecture_from_json(j.at("architecture"));
  if (j.contains("train")) ml.train = train_config_from_json(j.at("train"));
  if (j.contains("next_price")) ml.next_price = next_price_config_from_json(j.at("next_price"));
  const auto mode = j.value("mode", std::string("constrained"));
  if (mode == "unconstrained") {
    ml.next_price.mu = 0.0;
    ml.next_price.nu = 0.0;
  } else if (mode != "constrained") {
    throw ValidationError("mechanism: mode must be constrained or unconstrained");
  }
  const auto anchor = j.value("anchor", std::string("previous"));
  if (anchor != "previous" && anchor != "initial") throw ValidationError("mechanism: anchor must be previous or initial");
  ml.anchor = anchor == "previous" ? AnchorMode::kPrevious : AnchorMode::kInitial;
  ml.perfect_ml = j.value("perfect_ml", ml.perfect_ml);
  ml.warm_start = j.value("warm_start", ml.warm_start);
  if (j.contains("payment")) ml.settle.payment = payment_rule_from_string(j.at("payment").get<std::string>());
  if (j.contains("push_bids")) ml.settle.push = push_bids_from_string(j.at("push_bids").get<std::string>());
  return m;
}

inline ExperimentConfig experiment_config_from_json(const Json& j) {
  return detail::parse_guarded("experiment config", [&] {
    detail::check_schema(j, "experiment config");
    ExperimentConfig cfg;
    cfg.domain = domain_spec_from_json(j.at("domain"));
    const auto& seeds = j.at("seeds");
    if (seeds.is_string()) cfg.seeds = parse_seeds(seeds.get<std::string>());
    else cfg.seeds = seeds.get<std::vector<std::uint64_t>>();
    for (const auto& m : j.at("mechanisms")) cfg.mechanisms.push_back(mechanism_from_json(m));
    cfg.q_p_max = j.value("q_p_max", cfg.q_p_max);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.record_wallclock = j.value("record_wallclock", cfg.record_wallclock);
    cfg.workers = j.value("workers", cfg.workers);
    cfg.validate();
    return cfg;
  });
}

inline int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MLCCA_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

struct HeuristicEfficiency {
  double e_clock = 0.0;
  double e_raise = 0.0;
  double e_profit = 0.0;
};

/// Efficiency of the final WDP under each push-bid heuristic; the clearing
/// allocation's efficiency for all three when the auction cleared.
inline HeuristicEfficiency evaluate_heuristics(const AuctionOutcome& o, std::span<const Valuation> vals,
                                               const Capacities& c, int q_p_max) {
  HeuristicEfficiency h;
  if (o.cleared) {
    h.e_clock = h.e_raise = h.e_profit = efficiency(o.allocation, vals, c);
    return h;
  }
  auto eff = [&](PushBids push) {
    return efficiency(settle_allocation(o.reports, vals, c, o.prices.back(), push, q_p_max).first.allocation, vals, c);
  };
  h.e_clock = eff(PushBids::kNone);
  h.e_raise = eff(PushBids::kRaised);
  h.e_profit = eff(PushBids::kProfitMax);
  return h;
}

struct MetricsRow {
  std::uint64_t seed = 0;
  std::string mechanism;
  std::string mode;
  int rounds = 0;
  bool cleared = false;
  HeuristicEfficiency eff;
  long long wallclock_ms = 0;
  std::vector<double> clearing_error;
};

inline AuctionOutcome run_mechanism(const MechanismSpec& spec, std::span<const Valuation> vals, const Capacities& c,
                                    std::uint64_t seed) {
  const auto reserve = default_reserve_prices(vals, c, spec.reserve_rho);
  if (spec.kind == MechanismKind::kCca) {
    CcaConfig cfg = spec.cca;
    cfg.reserve_prices = reserve;
    return cca(vals, c, cfg);
  }
  MlCcaConfig cfg = spec.ml;
  cfg.reserve_prices = reserve;
  cfg.seed = seed;
  return ml_cca(vals, c, cfg);
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trace_csv(const AuctionOutcome& o) {
  std::string out = "round";
  const auto m = o.prices.empty() ? 0 : o.prices.front().size();
  for (std::size_t j = 0; j < m; ++j) out += ",p" + std::to_string(j);
  out += ",clearing_error,efficiency\n";
  for (std::size_t r = 0; r < o.prices.size(); ++r) {
    out += std::to_string(r + 1);
    for (std::size_t j = 0; j < m; ++j) out += "," + fmt_double(o.prices[r][j]);
    out += "," + fmt_double(o.clearing_error[r]) + "," + fmt_double(o.efficiency_trace[r]) + "\n";
  }
  return out;
}

}  // namespace detail

inline std::string results_csv_header() {
  return "seed,mechanism,mode,rounds,cleared,e_clock,e_raise,e_profit,wallclock_ms\n";
}

inline std::string results_csv_row(const MetricsRow& r) {
  return std::to_string(r.seed) + "," + r.mechanism + "," + r.mode + "," + std::to_string(r.rounds) + "," +
         (r.cleared ? "1" : "0") + "," + detail::fmt_double(r.eff.e_clock) + "," + detail::fmt_double(r.eff.e_raise) +
         "," + detail::fmt_double(r.eff.e_profit) + "," + std::to_string(r.wallclock_ms) + "\n";
}

/// Per-mechanism means and clearing rates, recomputed from the rows.
inline Json summarize(const std::vector<MetricsRow>& rows, const std::vector<MechanismSpec>& mechs) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["mechanisms"] = Json::array();
  for (const auto& m : mechs) {
    double n = 0, clock = 0, raise = 0, profit = 0, cleared = 0, rounds = 0;
    for (const auto& r : rows) {
      if (r.mechanism != m.name) continue;
      n += 1;
      clock += r.eff.e_clock;
      raise += r.eff.e_raise;
      profit += r.eff.e_profit;
      cleared += r.cleared ? 1 : 0;
      rounds += r.rounds;
    }
    if (n == 0) continue;
    out["mechanisms"].push_back({{"name", m.name},
                                 {"mode", m.mode()},
                                 {"instances", static_cast<int>(n)},
                                 {"mean_e_clock", clock / n},
                                 {"mean_e_raise", raise / n},
                                 {"mean_e_profit", profit / n},
                                 {"clearing_rate", cleared / n},
                                 {"mean_rounds", rounds / n}});
  }
  return out;
}

/// Runs every mechanism on every seed's instance and writes
///   results.csv, summary.json, outcomes/<mechanism>_seed<seed>.json,
///   traces/<mechanism>_seed<seed>.csv
/// under cfg.output_dir. Returns the rows in (seed, mechanism) order.
inline std::vector<MetricsRow> run_experiment(const ExperimentConfig& cfg, bool write_files = true) {
  cfg.validate();
  namespace fs = std::filesystem;
  const fs::path root(cfg.output_dir);
  if (write_files) {
    std::error_code ec;
    fs::create_directories(root / "outcomes", ec);
    fs::create_directories(root / "traces", ec);
    if (ec) throw ResourceError("cannot create output directory '" + root.string() + "': " + ec.message());
  }
  const auto& c = cfg.domain.capacities;
  const std::size_t per_seed = cfg.mechanisms.size();
  std::vector<MetricsRow> rows(cfg.seeds.size() * per_seed);
  std::vector<std::exception_ptr> errors(cfg.seeds.size());
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t s = next++; s < cfg.seeds.size(); s = next++) {
      try {
        const auto seed = cfg.seeds[s];
        const auto models = generate_domain(seed, cfg.domain);
        const auto vals = make_valuations(models);
        for (std::size_t k = 0; k < per_seed; ++k) {
          const auto& mech = cfg.mechanisms[k];
          const auto t0 = std::chrono::steady_clock::now();
          const auto outcome = run_mechanism(mech, vals, c, seed);
          MetricsRow row;
          row.seed = seed;
          row.mechanism = mech.name;
          row.mode = mech.mode();
          row.rounds = outcome.rounds;
          row.cleared = outcome.cleared;
          row.eff = evaluate_heuristics(outcome, vals, c, cfg.q_p_max);
          row.clearing_error = outcome.clearing_error;
          const auto t1 = std::chrono::steady_clock::now();
          if (cfg.record_wallclock)
            row.wallclock_ms = std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
          if (write_files) {
            const auto stem = mech.name + "_seed" + std::to_string(seed);
            write_json_file((root / "outcomes" / (stem + ".json")).string(), outcome_to_json(outcome));
            write_text_file((root / "traces" / (stem + ".csv")).string(), detail::trace_csv(outcome));
          }
          rows[s * per_seed + k] = std::move(row);
        }
      } catch (...) {
        errors[s] = std::current_exception();
      }
    }
  };
  const int n_workers = std::min<int>(worker_count(cfg.workers), static_cast<int>(cfg.seeds.size()));
  std::vector<std::thread> pool;
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (std::size_t s = 0; s < errors.size(); ++s) {
    if (!errors[s]) continue;
    try {
      std::rethrow_exception(errors[s]);
    } catch (const std::exception& e) {
      throw Error("seed " + std::to_string(cfg.seeds[s]) + ": " + e.what());
    }
  }
  if (write_files) {
    std::string csv = results_csv_header();
    for (const auto& r : rows) csv += results_csv_row(r);
    write_text_file((root / "results.csv").string(), csv);
    write_json_file((root / "summary.json").string(), summarize(rows, cfg.mechanisms));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Worked examples
// ---------------------------------------------------------------------------

struct ExampleCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExampleReport {
  std::vector<ExampleCheck> checks;
  PriceVector two_item_constrained;
  PriceVector two_item_unconstrained;
  PriceVector one_item_constrained;
  double two_item_full_scw = 0.0;
  double two_item_restricted_scw = 0.0;
  double one_item_constrained_scw = 0.0;
  double one_item_restricted_scw = 0.0;

  [[nodiscard]] bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
  }
};

/// Two items, c = (10,10); no clearing prices exist.
inline std::pair<std::vector<ValueModel>, Capacities> two_item_example() {
  Capacities c{10, 10};
  ThresholdParams a{{{Bundle{7, 3}, 10.0}, {Bundle{3, 7}, 10.0}, {Bundle{4, 4}, 9.0}}, ThresholdCombine::kMax};
  ThresholdParams b{{{Bundle{8, 2}, 10.0}, {Bundle{2, 8}, 10.0}, {Bundle{4, 4}, 9.0}}, ThresholdCombine::kMax};
  return {{ValueModel::threshold(c, a), ValueModel::threshold(c, b)}, c};
}

/// One item, c = 10; v1 = 6*1{x>=6}, v2 = 3*1{x>=1} + 2*1{x>=5}.
inline std::pair<std::vector<ValueModel>, Capacities> one_item_example() {
  Capacities c{10};
  ThresholdParams a{{{Bundle{6}, 6.0}}, ThresholdCombine::kSum};
  ThresholdParams b{{{Bundle{1}, 3.0}, {Bundle{5}, 2.0}}, ThresholdCombine::kSum};
  return {{ValueModel::threshold(c, a), ValueModel::threshold(c, b)}, c};
}

namespace detail {

inline void query_all(ReportSet& reports, std::span<const Valuation> vals, const PriceVector& p, int& round) {
  const auto bundles = demands_at(vals, p);
  ++round;
  for (std::size_t i = 0; i < bundles.size(); ++i) reports.add(i, DemandObservation(bundles[i], p, round));
}

/// Prices k * 0.05 for k = 1..9 on every item, i.e. strictly inside (0, 0.5).
inline ReportSet restricted_queries(std::span<const Valuation> vals, std::size_t m, int& round) {
  ReportSet r(vals.size());
  for (int k = 1; k <= 9; ++k) query_all(r, vals, PriceVector(std::vector<double>(m, 0.05 * k)), round);
  return r;
}

inline double true_scw(const Allocation& a, std::span<const Valuation> vals) {
  double s = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) s += vals[i].value(a.bundles[i]);
  return s;
}

}  // namespace detail

/// Runs both worked examples end to end with true-value oracles.
inline ExampleReport reproduce_examples(double anchor = 1.0, std::uint64_t seed = 0) {
  ExampleReport rep;
  auto check = [&](std::string name, bool ok, std::string detail) { rep.checks.push_back({std::move(name), ok, std::move(detail)}); };
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9; };

  {
    const auto [models, c] = two_item_example();
    const auto vals = make_valuations(models);
    NextPriceConfig cfg;
    cfg.seed = seed;
    const PriceVector start(std::vector<double>(2, anchor));
    const auto constrained = next_price(vals, start, c, cfg).first;
    NextPriceConfig ucfg = cfg;
    ucfg.mu = ucfg.nu = 0.0;
    const auto unconstrained = next_price(vals, start, c, ucfg).first;
    rep.two_item_constrained = constrained;
    rep.two_item_unconstrained = unconstrained;

    int round = 0;
    ReportSet full = detail::restricted_queries(vals, 2, round);
    ReportSet partial = full;
    int round2 = round;
    detail::query_all(full, vals, constrained, round);
    detail::query_all(partial, vals, unconstrained, round2);
    rep.two_item_full_scw = detail::true_scw(wdp_reports(full, c).allocation, vals);
    rep.two_item_restricted_scw = detail::true_scw(wdp_reports(partial, c).allocation, vals);

    const double dist = std::max(std::abs(constrained[0] - 0.5), std::abs(constrained[1] - 0.5));
    check("two-item constrained price within 0.05 of (0.5,0.5)", dist <= 0.05,
          "p = (" + detail::fmt_double(constrained[0]) + ", " + detail::fmt_double(constrained[1]) + ")");
    check("two-item WDP with constrained query SCW = 18", near(rep.two_item_full_scw, 18.0),
          "SCW = " + detail::fmt_double(rep.two_item_full_scw));
    check("two-item WDP with unconstrained query SCW = 10", near(rep.two_item_restricted_scw, 10.0),
          "SCW = " + detail::fmt_double(rep.two_item_restricted_scw));
  }
  {
    const auto [models, c] = one_item_example();
    const auto vals = make_valuations(models);
    NextPriceConfig cfg;
    cfg.seed = seed;
    const auto constrained = next_price(vals, PriceVector{anchor}, c, cfg).first;
    rep.one_item_constrained = constrained;
    const auto [clears, alloc] = check_clearing(vals, constrained, c);
    (void)clears;
    rep.one_item_constrained_scw = detail::true_scw(alloc, vals);
    int round = 0;
    const ReportSet restricted = detail::restricted_queries(vals, 1, round);
    rep.one_item_restricted_scw = detail::true_scw(wdp_reports(restricted, c).allocation, vals);

    check("one-item constrained price > 0.5", constrained[0] > 0.5, "p = " + detail::fmt_double(constrained[0]));
    const bool alloc_ok = alloc.bundles[0] == Bundle{6} && alloc.bundles[1] == Bundle{1};
    check("one-item demanded allocation ((6),(1)) with SCW = 9", alloc_ok && near(rep.one_item_constrained_scw, 9.0),
          "allocation (" + alloc.bundles[0].to_string() + "," + alloc.bundles[1].to_string() + "), SCW = " +
              detail::fmt_double(rep.one_item_constrained_scw));
    check("one-item restricted-query WDP SCW = 6", near(rep.one_item_restricted_scw, 6.0),
          "SCW = " + detail::fmt_double(rep.one_item_restricted_scw));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Prediction export
// ---------------------------------------------------------------------------

struct PredictionSampleSpec {
  int val1_size = 500;
  int val2_size = 500;
  double price_range = 3.0;  // item prices ~ U[0, price_range * mean max single-copy marginal value]
  std::uint64_t seed = 0;
};

struct PredictionRow {
  std::string set;  // train, val1, val2
  std::size_t rank = 0;
  double truth = 0.0;
  double predicted = 0.0;
  double inferred_lb = 0.0;  // <p, x> for demand responses, 0 for val1
};

inline std::vector<PredictionRow> prediction_rows(const MmvnnNet& net, const Valuation& model,
                                                  const std::vector<DemandObservation>& train,
                                                  const PredictionSampleSpec& spec) {
  const auto& c = model.capacities();
  if (!(net.capacities() == c)) throw StructuralError("prediction export: net and model capacities differ");
  if (spec.val1_size < 0 || spec.val2_size < 0 || !(spec.price_range >= 0.0))
    throw ValidationError("prediction export: invalid sample spec");
  BundleSpace space(c);
  const auto tab = model.tabulated();
  const auto pred = net.tabulate();
  std::vector<PredictionRow> rows;
  auto add = [&](const char* set, const Bundle& x, double lb) {
    const auto r = space.rank(x);
    rows.push_back({set, r, tab.table()->at_rank(r), pred.at_rank(r), lb});
  };
  for (const auto& o : train) add("train", o.bundle, inner_product(o.price, o.bundle));
  Rng rng(derive_seed(spec.seed, {1}));
  for (int k = 0; k < spec.val1_size; ++k)
    add("val1", space.unrank(static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(space.size()) - 1))), 0.0);
  const std::vector<Valuation> one{tab};
  const double scale = [&] {
    const auto r = default_reserve_prices(one, c, 1.0);
    double s = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) s += r[j];
    return s / static_cast<double>(c.size());
  }();
  Rng prng(derive_seed(spec.seed, {2}));
  for (int k = 0; k < spec.val2_size; ++k) {
    std::vector<double> p(c.size());
    for (auto& v : p) v = prng.uniform(0.0, spec.price_range * scale);
    const PriceVector pv(std::move(p));
    const auto x = argmax_utility(tab, pv).bundle;
    add("val2", x, inner_product(pv, x));
  }
  return rows;
}

inline std::string prediction_csv(const std::vector<PredictionRow>& rows) {
  std::string out = "set,rank,true_value,predicted_value,inferred_lower_bound\n";
  for (const auto& r : rows)
    out += r.set + "," + std::to_string(r.rank) + "," + detail::fmt_double(r.truth) + "," + detail::fmt_double(r.predicted) +
           "," + detail::fmt_double(r.inferred_lb) + "\n";
  return out;
}

inline std::string export_prediction_plot_data(const MmvnnNet& net, const Valuation& model,
                                               const std::vector<DemandObservation>& train,
                                               const PredictionSampleSpec& spec = {}) {
  return prediction_csv(prediction_rows(net, model, train, spec));
}

}  // namespace mlcca
