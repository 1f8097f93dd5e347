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


// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "mlcca/mlcca.hpp"
#include "support/reference.hpp"

using namespace mlcca;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double limit_s, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < limit_s;
  const bool ok = v.pass && in_time;
  if (!ok) ++failures;
  std::printf("%s criterion %d: %s | %s | %.2fs (limit %.0fs)%s\n", ok ? "PASS" : "FAIL", id, title, v.detail.c_str(), secs,
              limit_s, in_time ? "" : " TIMEOUT");
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Valuation table_valuation(const std::vector<int>& caps, const std::vector<double>& values) {
  return Valuation(ValueTable(BundleSpace(Capacities(caps)), values));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict example_checks(std::size_t from, std::size_t to) {
  const auto rep = reproduce_examples();
  Verdict v{true, ""};
  for (std::size_t k = from; k < to; ++k) {
    const auto& c = rep.checks.at(k);
    v.pass = v.pass && c.pass;
    v.detail += (k > from ? "; " : "") + c.name + " [" + c.detail + "]";
  }
  return v;
}

// Random valuations for the W property suites: half tabular, half nets.
std::vector<Valuation> random_valuations(std::mt19937_64& rng, const std::vector<int>& caps, std::size_t n, bool nets) {
  std::vector<Valuation> vals;
  for (std::size_t i = 0; i < n; ++i) {
    if (nets) vals.push_back(tabulated_valuation(ref::random_net(rng, Capacities(caps))));
    else vals.push_back(table_valuation(caps, ref::random_monotone_table(rng, caps)));
  }
  return vals;
}

double max_marginal(std::span<const Valuation> vals, const Capacities& c) {
  const auto r = default_reserve_prices(vals, c, 1.0);
  double hi = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) hi = std::max(hi, r[j]);
  return hi > 0.0 ? hi : 1.0;
}

Verdict universality() {
  std::mt19937_64 rng(303);
  double worst = 0.0;
  std::size_t biggest = 0;
  for (int t = 0; t < 50; ++t) {
    const auto caps = ref::random_caps(rng, 4, 5, 256);
    const auto vals = ref::random_monotone_table(rng, caps);
    const BundleSpace space{Capacities(caps)};
    biggest = std::max(biggest, space.size());
    const auto net = construct_exact(ValueTable(space, vals));
    for (const auto& x : ref::bundles(caps))
      worst = std::max(worst, std::abs(net.forward(std::span<const int>(x)) - vals[space.rank(std::span<const int>(x))]));
  }
  return {worst <= 1e-9, fmt("50 tables, largest |X| = %zu, max error %.3g", biggest, worst)};
}

Verdict w_properties() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int convex_bad = 0, lipschitz_bad = 0, subgrad_bad = 0, trials = 0;
  for (int kind = 0; kind < 2; ++kind) {
    for (int t = 0; t < 500; ++t, ++trials) {
      const auto caps = ref::random_caps(rng, 4, 9, 10000);
      const Capacities c(caps);
      const std::size_t n = 1 + rng() % 4;
      const auto vals = random_valuations(rng, caps, n, kind == 1);
      const double hi = 1.5 * max_marginal(vals, c);
      const PriceVector p(ref::random_prices(rng, caps.size(), hi));
      const PriceVector q(ref::random_prices(rng, caps.size(), hi));
      const double a = unit(rng);
      std::vector<double> mix(caps.size());
      for (std::size_t j = 0; j < mix.size(); ++j) mix[j] = a * p[j] + (1 - a) * q[j];
      const double wp = clearing_objective(p, vals, c);
      const double wq = clearing_objective(q, vals, c);
      if (clearing_objective(PriceVector(mix), vals, c) > a * wp + (1 - a) * wq + 1e-7) ++convex_bad;
      double cn = 0, d = 0, lin = 0;
      const auto g = subgradient_w(p, vals, c);
      for (std::size_t j = 0; j < caps.size(); ++j) {
        cn += double(caps[j]) * caps[j];
        d += (p[j] - q[j]) * (p[j] - q[j]);
        lin += g[j] * (q[j] - p[j]);
      }
      if (std::abs(wp - wq) > double(n + 1) * std::sqrt(cn) * std::sqrt(d) + 1e-9) ++lipschitz_bad;
      if (wq < wp + lin - 1e-7) ++subgrad_bad;
    }
  }
  return {convex_bad == 0 && lipschitz_bad == 0 && subgrad_bad == 0,
          fmt("%d trials (tabular + nets): convexity %d, Lipschitz %d, subgradient %d violations", trials, convex_bad,
              lipschitz_bad, subgrad_bad)};
}

Verdict gradient_check() {
  std::mt19937_64 rng(505);
  const double h = 1e-6;
  int stable = 0, attempts = 0, bad = 0;
  double worst = 0.0;
  while (stable < 120 && attempts < 5000) {
    ++attempts;
    const auto caps = ref::random_caps(rng, 3, 6, 2000);
    const Capacities c(caps);
    const auto vals = random_valuations(rng, caps, 1 + rng() % 4, attempts % 2 == 0);
    const PriceVector p(ref::random_prices(rng, caps.size(), 1.5 * max_marginal(vals, c)));
    const auto base = demands_at(vals, p);
    bool is_stable = true;
    for (std::size_t j = 0; j < caps.size() && is_stable; ++j) {
      for (double s : {-h, h}) {
        auto v = p.vec();
        v[j] = std::max(0.0, v[j] + s);
        if (demands_at(vals, PriceVector(v)) != base) is_stable = false;
      }
    }
    if (!is_stable || std::any_of(p.vec().begin(), p.vec().end(), [&](double x) { return x < h; })) continue;
    ++stable;
    const auto d = total_demand(base, caps.size());
    for (std::size_t j = 0; j < caps.size(); ++j) {
      auto up = p.vec(), down = p.vec();
      up[j] += h;
      down[j] -= h;
      const double fd = (clearing_objective(PriceVector(up), vals, c) - clearing_objective(PriceVector(down), vals, c)) / (2 * h);
      const double err = std::abs(fd - double(caps[j] - d[j]));
      worst = std::max(worst, err);
      if (err > 1e-5) ++bad;
    }
  }
  return {stable >= 100 && bad == 0,
          fmt("%d stable points of %d sampled, %d coordinate mismatches, max |fd - (c - sum x)| = %.3g", stable, attempts, bad,
              worst)};
}

struct LcpInstance {
  std::uint64_t seed;
  Capacities caps;
  std::vector<Valuation> vals;
};

std::vector<LcpInstance> lcp_instances(int wanted, int& examined) {
  std::vector<LcpInstance> out;
  examined = 0;
  for (std::uint64_t s = 0; static_cast<int>(out.size()) < wanted && s < 2000; ++s) {
    ++examined;
    Rng rng(derive_seed(6000, {s}));
    const int m = 1 + static_cast<int>(rng.uniform_int(0, 2));
    std::vector<int> caps(static_cast<std::size_t>(m));
    std::size_t size = 0;
    do {
      size = 1;
      for (auto& x : caps) {
        x = static_cast<int>(rng.uniform_int(1, 4));
        size *= static_cast<std::size_t>(x + 1);
      }
    } while (size > 125);
    const Capacities c(caps);
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 1));
    const SynergyGeneratorSpec g{c, 0, 1.0, 3.0, rng.uniform(0.0, 0.3), static_cast<int>(rng.uniform_int(0, 2)), 0.2, 1.5};
    std::vector<ValueModel> models;
    for (int i = 0; i < n; ++i) models.push_back(generate_synergy_model(derive_seed(6000, {s, std::uint64_t(i) + 1}), g));
    auto vals = make_valuations(models);
    const double hi = 1.5 * max_marginal(vals, c);
    if (!brute_force_clearing_search(vals, c, PriceGrid{0.0, hi, hi / 40}).has_value()) continue;
    out.push_back({s, c, std::move(vals)});
  }
  return out;
}

Verdict clearing_efficiency() {
  int examined = 0;
  const auto inst = lcp_instances(30, examined);
  int cleared = 0, inefficient = 0;
  for (std::size_t k = 0; k < inst.size(); ++k) {
    MlCcaConfig cfg;
    cfg.q_init = 5;
    cfg.q_max = 50;
    cfg.perfect_ml = true;
    cfg.seed = inst[k].seed;
    const auto out = ml_cca(inst[k].vals, inst[k].caps, cfg);
    if (!out.cleared) continue;
    ++cleared;
    if (std::abs(efficiency(out.allocation, inst[k].vals, inst[k].caps) - 1.0) > 1e-9) ++inefficient;
  }
  const bool enough = inst.size() == 30;
  return {enough && cleared >= 27 && inefficient == 0,
          fmt("%zu LCP instances (of %d generated), cleared %d within 50 rounds, %d cleared but inefficient", inst.size(),
              examined, cleared, inefficient)};
}

Verdict training_fixed_point() {
  int zero_loss = 0, reproduced = 0;
  double min_r2 = 1.0;
  const int grid = 20;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Capacities c = (s % 2) ? Capacities{2, 2} : Capacities{3, 1};
    const Architecture arch{{8, 8}, 1.0, false};
    auto truth_net = init(arch, c, derive_seed(1000 + s, {0}));
    truth_net.mutable_params().weights.back() *= 4.0;
    const Valuation truth(truth_net.tabulate());
    const std::vector<Valuation> one{truth};
    const double hi = 1.2 * max_marginal(one, c);
    std::vector<DemandObservation> obs;
    int round = 0;
    for (int a = 0; a <= grid; ++a)
      for (int b = 0; b <= grid; ++b) {
        const PriceVector p{hi * a / grid, hi * b / grid};
        obs.emplace_back(argmax_utility(truth, p).bundle, p, ++round);
      }
    TrainConfig tc;
    tc.epochs = 5000;
    tc.learning_rate = 0.003;
    tc.seed = s;
    const auto [net, rep] = train_on_dqs(init(arch, c, derive_seed(2000 + s, {0})), obs, tc);
    if (rep.epoch_loss.back() == 0.0 && rep.epoch_mismatches.back() == 0) ++zero_loss;
    const auto learned = tabulated_valuation(net);
    bool all = true;
    for (const auto& o : obs) all = all && argmax_utility(learned, o.price).bundle == o.bundle;
    reproduced += all;
    PredictionSampleSpec ps;
    ps.seed = s;
    ps.val1_size = 0;
    std::vector<double> pred, tr;
    for (const auto& row : prediction_rows(net, truth, obs, ps))
      if (row.set == "val2") {
        pred.push_back(row.predicted);
        tr.push_back(row.truth);
      }
    min_r2 = std::min(min_r2, r_squared_shift_invariant(pred, tr));
  }
  return {zero_loss == 20 && reproduced == 20 && min_r2 >= 0.99,
          fmt("20 bidders x %d queries: zero loss %d, all responses reproduced %d, min val2 R2_c %.5f", (grid + 1) * (grid + 1),
              zero_loss, reproduced, min_r2)};
}

ExperimentConfig directional_config(const fs::path& out, int workers) {
  ExperimentConfig cfg;
  cfg.domain = native_synergy_domain();
  cfg.seeds = parse_seeds("101..130");
  MechanismSpec cca_spec;
  cca_spec.name = "cca";
  cca_spec.cca.q_max = 30;
  MechanismSpec ml;
  ml.name = "ml_cca";
  ml.kind = MechanismKind::kMlCca;
  ml.ml.q_init = 10;
  ml.ml.q_max = 30;
  cfg.mechanisms = {cca_spec, ml};
  cfg.output_dir = out.string();
  cfg.record_wallclock = false;
  cfg.workers = workers;
  return cfg;
}

const fs::path kOut1 = fs::temp_directory_path() / "mlcca_acceptance_w1";
const fs::path kOut8 = fs::temp_directory_path() / "mlcca_acceptance_w8";

Verdict directional() {
  fs::remove_all(kOut1);
  const auto rows = run_experiment(directional_config(kOut1, 1));
  double e_cca = 0, e_ml = 0, c_cca = 0, c_ml = 0;
  for (const auto& r : rows) {
    (r.mechanism == "cca" ? e_cca : e_ml) += r.eff.e_clock / 30.0;
    (r.mechanism == "cca" ? c_cca : c_ml) += (r.cleared ? 1.0 : 0.0) / 30.0;
  }
  return {e_ml >= e_cca - 0.01 && c_ml >= c_cca,
          fmt("30 seeds: mean E_clock ML-CCA %.4f vs CCA %.4f; clearing rate ML-CCA %.3f vs CCA %.3f", e_ml, e_cca, c_ml, c_cca)};
}

Verdict oracle_equivalence() {
  std::mt19937_64 rng(909);
  int argmax_bad = 0, wdp_bad = 0;
  for (int t = 0; t < 500; ++t) {
    const auto caps = ref::random_caps(rng, 4, 9, 10000);
    const auto vals = (t % 2) ? tabulated_valuation(ref::random_net(rng, Capacities(caps)))
                              : table_valuation(caps, ref::random_monotone_table(rng, caps, t % 4 == 0 ? 0.7 : 0.3));
    const std::vector<Valuation> one{vals};
    const PriceVector p(ref::random_prices(rng, caps.size(), 1.5 * max_marginal(one, Capacities(caps))));
    const auto naive = argmax_utility(vals, p, {ArgmaxStrategy::kNaive});
    const auto pruned = argmax_utility(vals, p, {ArgmaxStrategy::kPruned});
    const auto oracle = ref::argmax(ref::fn(vals), caps, p.vec());
    if (!(pruned.bundle == naive.bundle) || pruned.utility != naive.utility || naive.bundle.vec() != oracle.bundle) ++argmax_bad;
  }
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int t = 0; t < 500; ++t) {
    const auto caps = ref::random_caps(rng, 3, 4, 200);
    const auto all = ref::bundles(caps);
    const std::size_t n = 1 + rng() % 5;
    CandidateSets cands(n);
    std::vector<std::vector<std::pair<ref::Vec, double>>> rc(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::set<std::size_t> picks{0};
      const std::size_t k = 1 + rng() % 6;
      while (picks.size() < std::min(k + 1, all.size())) picks.insert(rng() % all.size());
      for (auto r : picks) {
        const double amount = r == 0 ? 0.0 : std::round(u(rng) * 4) / 4;
        cands[i].push_back({Bundle(all[r]), amount});
        rc[i].push_back({all[r], amount});
      }
    }
    const Capacities c(caps);
    const auto bb = wdp_candidates(cands, c, WdpStrategy::kBranchAndBound);
    const auto naive = wdp_candidates(cands, c, WdpStrategy::kNaive);
    const auto oracle = ref::wdp(rc, caps);
    if (bb.choice != naive.choice || naive.choice != oracle.pick || std::abs(bb.welfare - oracle.welfare) > 1e-9) ++wdp_bad;
  }
  return {argmax_bad == 0 && wdp_bad == 0,
          fmt("500 argmax instances: %d disagreements; 500 WDP instances: %d disagreements", argmax_bad, wdp_bad)};
}

Verdict determinism() {
  fs::remove_all(kOut8);
  if (!fs::exists(kOut1 / "results.csv")) run_experiment(directional_config(kOut1, 1));
  run_experiment(directional_config(kOut8, 8));
  int files = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(kOut1)) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto rel = fs::relative(e.path(), kOut1);
    if (!fs::exists(kOut8 / rel) || slurp(e.path()) != slurp(kOut8 / rel)) ++differing;
  }
  const bool same_csv = slurp(kOut1 / "results.csv") == slurp(kOut8 / "results.csv");
  return {same_csv && differing == 0 && files > 0,
          fmt("workers 1 vs 8: results.csv %s, %d of %d output files differ", same_csv ? "identical" : "DIFFERS", differing, files)};
}

}  // namespace

int main() {
  criterion(1, "two-item worked example", 10, [] { return example_checks(0, 3); });
  criterion(2, "one-item worked example", 10, [] { return example_checks(3, 6); });
  criterion(3, "exact construction reproduces monotone tables", 30, universality);
  criterion(4, "convexity, Lipschitz and subgradient properties of W", 120, w_properties);
  criterion(5, "finite-difference gradient of W at stable points", 60, gradient_check);
  criterion(6, "clearing implies efficiency under perfect ML", 300, clearing_efficiency);
  criterion(7, "training reaches the demand-query fixed point", 180, training_fixed_point);
  criterion(8, "ML-CCA vs CCA on the native synergy domain", 1800, directional);
  criterion(9, "pruned oracles agree with naive enumeration", 120, oracle_equivalence);
  criterion(10, "byte-identical outputs across worker counts", 1800, determinism);
  fs::remove_all(kOut1);
  fs::remove_all(kOut8);
  std::printf("%s: %d of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
