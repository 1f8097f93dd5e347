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

// mlcca command-line tool.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mlcca/mlcca.hpp"

namespace {

using namespace mlcca;

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size() && part.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ValidationError("cannot parse number '" + part + "'");
    }
  }
  return out;
}

void print_json(const Json& j) { std::cout << j.dump(2) << "\n"; }

// --- run ---------------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::string seeds;
  std::string output;
  int workers = 0;
  bool no_wallclock = false;
};

int cmd_run(const RunArgs& a) {
  auto j = read_json_file(a.config);
  if (!a.seeds.empty()) j["seeds"] = a.seeds;
  if (!a.output.empty()) j["output_dir"] = a.output;
  if (a.workers > 0) j["workers"] = a.workers;
  if (a.no_wallclock) j["record_wallclock"] = false;
  const auto cfg = experiment_config_from_json(j);
  const auto rows = run_experiment(cfg);
  const auto summary = summarize(rows, cfg.mechanisms);
  std::cout << "wrote " << rows.size() << " rows to " << cfg.output_dir << "/results.csv\n";
  print_json(summary);
  return 0;
}

// --- cca ---------------------------------------------------------------------

struct CcaArgs {
  std::string models;
  std::string out;
  int q_max = 100;
  double increment = 0.05;
  double reserve_rho = 0.1;
  std::string reserve;
  bool no_early_stop = false;
  std::string push = "none";
  int q_p_max = 100;
  std::string payment = "vcg";
};

int cmd_cca(const CcaArgs& a) {
  const auto file = models_from_json(read_json_file(a.models));
  const auto vals = make_valuations(file.bidders);
  CcaConfig cfg;
  cfg.reserve_prices = a.reserve.empty() ? default_reserve_prices(vals, file.capacities, a.reserve_rho)
                                         : PriceVector(parse_doubles(a.reserve));
  cfg.increment = a.increment;
  cfg.q_max = a.q_max;
  cfg.early_stop = !a.no_early_stop;
  SettleConfig settle{push_bids_from_string(a.push), a.q_p_max, payment_rule_from_string(a.payment)};
  const auto outcome = cca(vals, file.capacities, cfg, settle);
  if (!a.out.empty()) write_json_file(a.out, outcome_to_json(outcome));
  const auto eff = evaluate_heuristics(outcome, vals, file.capacities, a.q_p_max);
  print_json({{"rounds", outcome.rounds},
              {"cleared", outcome.cleared},
              {"efficiency", efficiency(outcome.allocation, vals, file.capacities)},
              {"e_clock", eff.e_clock},
              {"e_raise", eff.e_raise},
              {"e_profit", eff.e_profit},
              {"payments", outcome.payments}});
  return 0;
}

// --- next-price --------------------------------------------------------------

struct NextPriceArgs {
  std::string nets;
  std::string anchor;
  std::string config;
  std::string trace;
  bool unconstrained = false;
  std::optional<std::uint64_t> seed;
};

int cmd_next_price(const NextPriceArgs& a) {
  const auto doc = read_json_file(a.nets);
  const auto nets = doc.contains("nets") ? nets_from_json(doc) : std::vector<MmvnnNet>{net_from_json(doc)};
  if (nets.empty()) throw ValidationError("next-price: net set is empty");
  const auto& c = nets.front().capacities();
  std::vector<Valuation> vals;
  for (const auto& n : nets) {
    if (!(n.capacities() == c)) throw StructuralError("next-price: nets disagree on capacities");
    vals.push_back(tabulated_valuation(n));
  }
  NextPriceConfig cfg;
  if (!a.config.empty()) cfg = next_price_config_from_json(read_json_file(a.config));
  if (a.unconstrained) cfg.mu = cfg.nu = 0.0;
  if (a.seed) cfg.seed = *a.seed;
  const PriceVector anchor(parse_doubles(a.anchor));
  const auto [p, trace] = next_price(vals, anchor, c, cfg);
  if (!a.trace.empty()) {
    std::string csv = "iteration";
    for (std::size_t j = 0; j < c.size(); ++j) csv += ",p" + std::to_string(j);
    csv += ",w,feasible\n";
    for (std::size_t t = 0; t < trace.iterations.size(); ++t) {
      const auto& e = trace.iterations[t];
      csv += std::to_string(t);
      for (std::size_t j = 0; j < c.size(); ++j) csv += "," + detail::fmt_double(e.price[j]);
      csv += "," + detail::fmt_double(e.w) + "," + (e.feasible ? "1" : "0") + "\n";
    }
    write_text_file(a.trace, csv);
  }
  print_json({{"price", p.vec()},
              {"predicted_clearing", trace.predicted_clearing},
              {"feasible", trace.iterations[trace.returned].feasible},
              {"w", trace.iterations[trace.returned].w},
              {"iterations", trace.iterations.size()}});
  return 0;
}

// --- train -------------------------------------------------------------------

struct TrainArgs {
  std::string models;
  std::size_t bidder = 0;
  std::string observations;
  int clock_rounds = 50;
  std::string config;
  std::string architecture;
  std::uint64_t seed = 0;
  std::string out;
  std::string plot_csv;
};

int cmd_train(const TrainArgs& a) {
  const auto file = models_from_json(read_json_file(a.models));
  if (a.bidder >= file.bidders.size()) throw ValidationError("train: bidder index out of range");
  const auto vals = make_valuations(file.bidders);
  const auto& c = file.capacities;

  std::vector<DemandObservation> obs;
  if (!a.observations.empty()) {
    obs = observations_from_json(read_json_file(a.observations));
  } else {
    CcaConfig cc;
    cc.reserve_prices = default_reserve_prices(vals, c);
    cc.q_max = a.clock_rounds;
    cc.early_stop = false;
    obs = cca_clock_phase(vals, c, cc).reports.per_bidder[a.bidder];
  }
  TrainConfig tc;
  if (!a.config.empty()) tc = train_config_from_json(read_json_file(a.config));
  Architecture arch;
  if (!a.architecture.empty()) arch = architecture_from_json(read_json_file(a.architecture));
  auto [net, report] = train_on_dqs(init(arch, c, a.seed), obs, tc);
  if (!a.out.empty()) write_json_file(a.out, net_to_json(net));
  if (!a.plot_csv.empty()) {
    PredictionSampleSpec spec;
    spec.seed = a.seed;
    write_text_file(a.plot_csv, export_prediction_plot_data(net, vals[a.bidder], obs, spec));
  }
  int reproduced = 0;
  for (const auto& o : obs) reproduced += dq_loss(net, o) == 0.0 && argmax_utility(tabulated_valuation(net), o.price).bundle == o.bundle;
  print_json({{"observations", obs.size()},
              {"reproduced", reproduced},
              {"final_epoch_loss", report.epoch_loss.back()},
              {"epoch_loss", report.epoch_loss},
              {"epoch_mismatches", report.epoch_mismatches},
              {"steps", report.steps},
              {"price_scale", report.price_scale},
              {"snapshot_id", report.snapshot_id}});
  return 0;
}

// --- eval --------------------------------------------------------------------

struct EvalArgs {
  std::string outcome;
  std::string models;
  int q_p_max = 100;
};

int cmd_eval(const EvalArgs& a) {
  const auto o = outcome_from_json(read_json_file(a.outcome));
  const auto file = models_from_json(read_json_file(a.models));
  const auto vals = make_valuations(file.bidders);
  const auto& c = file.capacities;
  if (o.allocation.bundles.size() != vals.size()) throw StructuralError("eval: outcome and models disagree on bidders");
  if (!is_feasible(o.allocation, c)) throw ValidationError("eval: outcome allocation is infeasible");
  const auto eff = evaluate_heuristics(o, vals, c, a.q_p_max);
  double revenue = 0.0;
  for (double p : o.payments) revenue += p;
  print_json({{"efficiency", efficiency(o.allocation, vals, c)},
              {"e_clock", eff.e_clock},
              {"e_raise", eff.e_raise},
              {"e_profit", eff.e_profit},
              {"cleared", o.cleared},
              {"rounds", o.rounds},
              {"final_clearing_error", o.clearing_error.empty() ? 0.0 : o.clearing_error.back()},
              {"revenue", revenue}});
  return 0;
}

// --- reproduce-examples ------------------------------------------------------

int cmd_reproduce(double anchor, std::uint64_t seed) {
  const auto rep = reproduce_examples(anchor, seed);
  for (const auto& c : rep.checks) std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
  std::cout << "SCW pairs (" << rep.two_item_full_scw << "," << rep.two_item_restricted_scw << ") and ("
            << rep.one_item_constrained_scw << "," << rep.one_item_restricted_scw << ")\n";
  std::cout << (rep.all_pass() ? "PASS" : "FAIL") << "\n";
  return rep.all_pass() ? 0 : 1;
}

// --- gen-domain --------------------------------------------------------------

int cmd_gen_domain(std::uint64_t seed, const std::string& config, const std::string& out) {
  const DomainSpec spec = config.empty() ? native_synergy_domain() : domain_spec_from_json(read_json_file(config));
  const auto models = generate_domain(seed, spec);
  const auto j = models_to_json(models, spec.capacities);
  if (out.empty()) print_json(j);
  else write_json_file(out, j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mlcca: clock auctions with demand-query-trained monotone networks"};
  app.require_subcommand(1);

  RunArgs run;
  auto* s_run = app.add_subcommand("run", "Run an experiment config over seeds");
  s_run->add_option("config", run.config, "Experiment config JSON")->required()->check(CLI::ExistingFile);
  s_run->add_option("--seeds", run.seeds, "Seed list, e.g. 101..130");
  s_run->add_option("--output", run.output, "Output directory");
  s_run->add_option("--workers", run.workers, "Worker threads (default: MLCCA_WORKERS or core count)");
  s_run->add_flag("--no-wallclock", run.no_wallclock, "Write 0 in wallclock_ms");

  CcaArgs cca_args;
  auto* s_cca = app.add_subcommand("cca", "Run the clock auction baseline on a value-model file");
  s_cca->add_option("models", cca_args.models, "Value-model JSON")->required()->check(CLI::ExistingFile);
  s_cca->add_option("--out", cca_args.out, "Write the outcome JSON here");
  s_cca->add_option("--q-max", cca_args.q_max, "Round cap");
  s_cca->add_option("--increment", cca_args.increment, "Price increment");
  s_cca->add_option("--reserve-rho", cca_args.reserve_rho, "Reserve scale");
  s_cca->add_option("--reserve", cca_args.reserve, "Explicit reserve prices, comma separated");
  s_cca->add_flag("--no-early-stop", cca_args.no_early_stop, "Always run q-max rounds");
  s_cca->add_option("--push", cca_args.push, "none | raised | profit_max");
  s_cca->add_option("--q-p-max", cca_args.q_p_max, "Profit-max bids per bidder");
  s_cca->add_option("--payment", cca_args.payment, "vcg | vcg_nearest");

  NextPriceArgs np;
  auto* s_np = app.add_subcommand("next-price", "Generate one demand query from serialized nets");
  s_np->add_option("nets", np.nets, "Net set JSON, or a single net JSON")->required()->check(CLI::ExistingFile);
  s_np->add_option("--anchor", np.anchor, "Anchor prices, comma separated")->required();
  s_np->add_option("--config", np.config, "Next-price config JSON");
  s_np->add_option("--trace", np.trace, "Write the iterate trace CSV here");
  s_np->add_flag("--unconstrained", np.unconstrained, "Set mu = nu = 0");
  s_np->add_option("--seed", np.seed, "Jitter seed");

  TrainArgs tr;
  auto* s_tr = app.add_subcommand("train", "Train one bidder's net on demand observations");
  s_tr->add_option("models", tr.models, "Value-model JSON")->required()->check(CLI::ExistingFile);
  s_tr->add_option("--bidder", tr.bidder, "Bidder index");
  s_tr->add_option("--observations", tr.observations, "Observation JSON (default: clock-phase responses)");
  s_tr->add_option("--clock-rounds", tr.clock_rounds, "Clock rounds used when no observations are given");
  s_tr->add_option("--config", tr.config, "Train config JSON");
  s_tr->add_option("--architecture", tr.architecture, "Architecture JSON");
  s_tr->add_option("--seed", tr.seed, "Initialization seed");
  s_tr->add_option("--out", tr.out, "Write the trained net JSON here");
  s_tr->add_option("--plot-csv", tr.plot_csv, "Write prediction-vs-truth CSV here");

  EvalArgs ev;
  auto* s_ev = app.add_subcommand("eval", "Metrics for a saved outcome");
  s_ev->add_option("outcome", ev.outcome, "Outcome JSON")->required()->check(CLI::ExistingFile);
  s_ev->add_option("models", ev.models, "Value-model JSON")->required()->check(CLI::ExistingFile);
  s_ev->add_option("--q-p-max", ev.q_p_max, "Profit-max bids per bidder");

  double anchor = 1.0;
  std::uint64_t rep_seed = 0;
  auto* s_rep = app.add_subcommand("reproduce-examples", "Run the two worked examples and check their welfare values");
  s_rep->add_option("--anchor", anchor, "Anchor price on every item");
  s_rep->add_option("--seed", rep_seed, "Jitter seed");

  std::uint64_t gen_seed = 0;
  std::string gen_config, gen_out;
  auto* s_gen = app.add_subcommand("gen-domain", "Emit a value-model file for one seed");
  s_gen->add_option("--seed", gen_seed, "Domain seed");
  s_gen->add_option("--config", gen_config, "Domain spec JSON (default: native synergy domain)");
  s_gen->add_option("--out", gen_out, "Output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s_run) return cmd_run(run);
    if (*s_cca) return cmd_cca(cca_args);
    if (*s_np) return cmd_next_price(np);
    if (*s_tr) return cmd_train(tr);
    if (*s_ev) return cmd_eval(ev);
    if (*s_rep) return cmd_reproduce(anchor, rep_seed);
    if (*s_gen) return cmd_gen_domain(gen_seed, gen_config, gen_out);
  } catch (const mlcca::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
