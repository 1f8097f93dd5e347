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

// JSON documents. Every top-level document carries "schema_version".
//
//   value models  {schema_version, capacities, bidders: [{kind, ...}]}
//   nets          {schema_version, capacities, layer_dims, cutoffs,
//                  weights: [row-major flat], biases, skip}
//   net sets      {schema_version, nets: [net, ...]}
//   outcomes      {schema_version, allocation, payments, prices, ...}
//
// Tables are flat arrays in rank order.

#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlcca/core.hpp"
#include "mlcca/mechanisms.hpp"
#include "mlcca/mmvnn.hpp"
#include "mlcca/price_engine.hpp"
#include "mlcca/training.hpp"
#include "mlcca/value_models.hpp"

namespace mlcca {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

inline void check_schema(const Json& j, const char* what) {
  if (!j.is_object() || !j.contains("schema_version"))
    throw ValidationError(std::string(what) + ": missing schema_version");
  const int v = j.at("schema_version").get<int>();
  if (v != kSchemaVersion)
    throw ValidationError(std::string(what) + ": unsupported schema_version " + std::to_string(v));
}

template <class F>
auto parse_guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
}

inline Json terms_to_json(const std::vector<ThresholdTerm>& terms) {
  Json out = Json::array();
  for (const auto& t : terms) out.push_back({{"threshold", t.threshold.vec()}, {"bonus", t.bonus}});
  return out;
}

inline std::vector<ThresholdTerm> terms_from_json(const Json& j) {
  std::vector<ThresholdTerm> out;
  for (const auto& t : j) out.push_back({Bundle(t.at("threshold").get<std::vector<int>>()), t.at("bonus").get<double>()});
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Value models
// ---------------------------------------------------------------------------

inline Json model_to_json(const ValueModel& m) {
  Json j;
  j["kind"] = to_string(m.kind());
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, TabularParams>) {
          j["values"] = p.values;
        } else if constexpr (std::is_same_v<P, SynergyParams>) {
          std::vector<int> interest;
          for (bool b : p.interest) interest.push_back(b ? 1 : 0);
          j["interest"] = interest;
          j["base"] = p.base;
          j["synergy"] = p.synergy;
          j["bonuses"] = detail::terms_to_json(p.bonuses);
        } else {
          j["combine"] = p.combine == ThresholdCombine::kSum ? "sum" : "max";
          j["terms"] = detail::terms_to_json(p.terms);
        }
      },
      m.params());
  return j;
}

inline ValueModel model_from_json(const Json& j, const Capacities& c) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "tabular") {
    return ValueModel::tabular(ValueTable(BundleSpace(c), j.at("values").get<std::vector<double>>()));
  }
  if (kind == "synergy") {
    SynergyParams p;
    for (int b : j.at("interest").get<std::vector<int>>()) p.interest.push_back(b != 0);
    p.base = j.at("base").get<std::vector<double>>();
    p.synergy = j.at("synergy").get<double>();
    if (j.contains("bonuses")) p.bonuses = detail::terms_from_json(j.at("bonuses"));
    return ValueModel::synergy(c, std::move(p));
  }
  if (kind == "threshold") {
    ThresholdParams p;
    const auto combine = j.value("combine", std::string("sum"));
    if (combine != "sum" && combine != "max") throw ValidationError("value model: combine must be sum or max");
    p.combine = combine == "sum" ? ThresholdCombine::kSum : ThresholdCombine::kMax;
    p.terms = detail::terms_from_json(j.at("terms"));
    return ValueModel::threshold(c, std::move(p));
  }
  throw ValidationError("value model: unknown kind '" + kind + "'");
}

inline Json models_to_json(const std::vector<ValueModel>& models, const Capacities& c) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["capacities"] = c.vec();
  j["bidders"] = Json::array();
  for (const auto& m : models) j["bidders"].push_back(model_to_json(m));
  return j;
}

struct ModelFile {
  Capacities capacities;
  std::vector<ValueModel> bidders;
};

inline ModelFile models_from_json(const Json& j) {
  return detail::parse_guarded("value model file", [&] {
    detail::check_schema(j, "value model file");
    ModelFile f{Capacities(j.at("capacities").get<std::vector<int>>()), {}};
    for (const auto& b : j.at("bidders")) f.bidders.push_back(model_from_json(b, f.capacities));
    return f;
  });
}

// ---------------------------------------------------------------------------
// Nets
// ---------------------------------------------------------------------------

inline Json net_to_json(const MmvnnNet& net) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["capacities"] = net.capacities().vec();
  j["layer_dims"] = net.layer_dims();
  j["cutoffs"] = net.cutoffs();
  j["weights"] = Json::array();
  for (const auto& w : net.params().weights) {
    std::vector<double> flat;
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index q = 0; q < w.cols(); ++q) flat.push_back(w(r, q));
    j["weights"].push_back(flat);
  }
  j["biases"] = Json::array();
  for (const auto& b : net.params().biases) j["biases"].push_back(std::vector<double>(b.data(), b.data() + b.size()));
  const auto& s = net.params().skip;
  j["skip"] = std::vector<double>(s.data(), s.data() + s.size());
  return j;
}

inline MmvnnNet net_from_json(const Json& j) {
  return detail::parse_guarded("net", [&] {
    detail::check_schema(j, "net");
    Capacities c(j.at("capacities").get<std::vector<int>>());
    const auto dims = j.at("layer_dims").get<std::vector<int>>();
    const auto& ws = j.at("weights");
    if (dims.size() < 2 || ws.size() != dims.size() - 1) throw StructuralError("net: layer_dims and weights disagree");
    NetParams p;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
      const auto flat = ws[k].get<std::vector<double>>();
      if (flat.size() != static_cast<std::size_t>(dims[k + 1]) * static_cast<std::size_t>(dims[k]))
        throw StructuralError("net: weight matrix size mismatch");
      Eigen::MatrixXd w(dims[k + 1], dims[k]);
      for (int r = 0; r < dims[k + 1]; ++r)
        for (int q = 0; q < dims[k]; ++q) w(r, q) = flat[static_cast<std::size_t>(r) * dims[k] + q];
      p.weights.push_back(std::move(w));
    }
    for (const auto& b : j.at("biases")) {
      const auto v = b.get<std::vector<double>>();
      p.biases.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    const auto skip = j.value("skip", std::vector<double>{});
    p.skip = Eigen::Map<const Eigen::VectorXd>(skip.data(), static_cast<Eigen::Index>(skip.size()));
    return MmvnnNet(std::move(c), std::move(p), j.at("cutoffs").get<std::vector<double>>());
  });
}

inline Json nets_to_json(const std::vector<MmvnnNet>& nets) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["nets"] = Json::array();
  for (const auto& n : nets) j["nets"].push_back(net_to_json(n));
  return j;
}

inline std::vector<MmvnnNet> nets_from_json(const Json& j) {
  return detail::parse_guarded("net set", [&] {
    detail::check_schema(j, "net set");
    std::vector<MmvnnNet> out;
    for (const auto& n : j.at("nets")) out.push_back(net_from_json(n));
    return out;
  });
}

// ---------------------------------------------------------------------------
// Reports and outcomes
// ---------------------------------------------------------------------------

inline Json reports_to_json(const ReportSet& r) {
  Json out = Json::array();
  for (const auto& list : r.per_bidder) {
    Json b = Json::array();
    for (const auto& o : list)
      b.push_back({{"round", o.round}, {"bundle", o.bundle.vec()}, {"price", std::vector<double>(o.price.values().begin(), o.price.values().end())}});
    out.push_back(b);
  }
  return out;
}

inline ReportSet reports_from_json(const Json& j) {
  ReportSet r(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    for (const auto& o : j[i])
      r.add(i, DemandObservation(Bundle(o.at("bundle").get<std::vector<int>>()),
                                 PriceVector(o.at("price").get<std::vector<double>>()), o.at("round").get<int>()));
  return r;
}

/// Observations of one bidder: {schema_version, observations: [{round, bundle, price}]}.
inline std::vector<DemandObservation> observations_from_json(const Json& j) {
  return detail::parse_guarded("observations", [&] {
    detail::check_schema(j, "observations");
    std::vector<DemandObservation> out;
    for (const auto& o : j.at("observations"))
      out.emplace_back(Bundle(o.at("bundle").get<std::vector<int>>()), PriceVector(o.at("price").get<std::vector<double>>()),
                       o.value("round", static_cast<int>(out.size()) + 1));
    return out;
  });
}

inline Json outcome_to_json(const AuctionOutcome& o) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  Json alloc = Json::array();
  for (const auto& b : o.allocation.bundles) alloc.push_back(b.vec());
  j["allocation"] = alloc;
  j["payments"] = o.payments;
  Json prices = Json::array();
  for (const auto& p : o.prices) prices.push_back(std::vector<double>(p.values().begin(), p.values().end()));
  j["prices"] = prices;
  j["clearing_error"] = o.clearing_error;
  j["efficiency_trace"] = o.efficiency_trace;
  j["cleared"] = o.cleared;
  j["rounds"] = o.rounds;
  j["inferred_welfare"] = o.inferred_welfare;
  j["reports"] = reports_to_json(o.reports);
  return j;
}

inline AuctionOutcome outcome_from_json(const Json& j) {
  return detail::parse_guarded("outcome", [&] {
    detail::check_schema(j, "outcome");
    AuctionOutcome o;
    for (const auto& b : j.at("allocation")) o.allocation.bundles.emplace_back(b.get<std::vector<int>>());
    o.payments = j.at("payments").get<std::vector<double>>();
    for (const auto& p : j.at("prices")) o.prices.emplace_back(p.get<std::vector<double>>());
    o.clearing_error = j.value("clearing_error", std::vector<double>{});
    o.efficiency_trace = j.value("efficiency_trace", std::vector<double>{});
    o.cleared = j.at("cleared").get<bool>();
    o.rounds = j.at("rounds").get<int>();
    o.inferred_welfare = j.value("inferred_welfare", 0.0);
    o.reports = reports_from_json(j.at("reports"));
    return o;
  });
}

// ---------------------------------------------------------------------------
// Configs (all keys optional; defaults from the structs)
// ---------------------------------------------------------------------------

inline Architecture architecture_from_json(const Json& j, Architecture a = {}) {
  a.hidden_dims = j.value("hidden_dims", a.hidden_dims);
  a.cutoff = j.value("cutoff", a.cutoff);
  a.linear_skip = j.value("linear_skip", a.linear_skip);
  a.validate();
  return a;
}

inline Json architecture_to_json(const Architecture& a) {
  return {{"hidden_dims", a.hidden_dims}, {"cutoff", a.cutoff}, {"linear_skip", a.linear_skip}};
}

inline TrainConfig train_config_from_json(const Json& j, TrainConfig t = {}) {
  t.epochs = j.value("epochs", t.epochs);
  t.learning_rate = j.value("learning_rate", t.learning_rate);
  t.l2 = j.value("l2", t.l2);
  t.cosine_annealing = j.value("cosine_annealing", t.cosine_annealing);
  const auto opt = j.value("optimizer", std::string(t.optimizer == OptimizerKind::kAdam ? "adam" : "sgd"));
  if (opt != "sgd" && opt != "adam") throw ValidationError("train config: optimizer must be sgd or adam");
  t.optimizer = opt == "adam" ? OptimizerKind::kAdam : OptimizerKind::kSgd;
  t.batch_per_epoch = j.value("batch_per_epoch", t.batch_per_epoch);
  t.shuffle = j.value("shuffle", t.shuffle);
  t.normalize_prices = j.value("normalize_prices", t.normalize_prices);
  t.seed = j.value("seed", t.seed);
  t.validate();
  return t;
}

inline Json train_config_to_json(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"learning_rate", t.learning_rate},
          {"l2", t.l2},
          {"cosine_annealing", t.cosine_annealing},
          {"optimizer", t.optimizer == OptimizerKind::kAdam ? "adam" : "sgd"},
          {"batch_per_epoch", t.batch_per_epoch},
          {"shuffle", t.shuffle},
          {"normalize_prices", t.normalize_prices},
          {"seed", t.seed}};
}

inline NextPriceConfig next_price_config_from_json(const Json& j, NextPriceConfig c = {}) {
  c.epochs = j.value("epochs", c.epochs);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.decay = j.value("decay", c.decay);
  c.mu = j.value("mu", c.mu);
  c.nu = j.value("nu", c.nu);
  c.jitter_lo = j.value("jitter_lo", c.jitter_lo);
  c.jitter_hi = j.value("jitter_hi", c.jitter_hi);
  const auto f = j.value("overdemand_factor", std::string(c.overdemand_factor == OverdemandFactor::kMu ? "mu" : "one_plus_mu"));
  if (f != "mu" && f != "one_plus_mu") throw ValidationError("next-price config: overdemand_factor must be mu or one_plus_mu");
  c.overdemand_factor = f == "mu" ? OverdemandFactor::kMu : OverdemandFactor::kOnePlusMu;
  c.decay_per_item = j.value("decay_per_item", c.decay_per_item);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

inline Json next_price_config_to_json(const NextPriceConfig& c) {
  return {{"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"decay", c.decay},
          {"mu", c.mu},
          {"nu", c.nu},
          {"jitter_lo", c.jitter_lo},
          {"jitter_hi", c.jitter_hi},
          {"overdemand_factor", c.overdemand_factor == OverdemandFactor::kMu ? "mu" : "one_plus_mu"},
          {"decay_per_item", c.decay_per_item},
          {"seed", c.seed}};
}

inline PushBids push_bids_from_string(const std::string& s) {
  if (s == "none" || s == "clock") return PushBids::kNone;
  if (s == "raised") return PushBids::kRaised;
  if (s == "profit_max") return PushBids::kProfitMax;
  throw ValidationError("unknown push-bid heuristic '" + s + "'");
}

inline PaymentRule payment_rule_from_string(const std::string& s) {
  if (s == "vcg") return PaymentRule::kVcg;
  if (s == "vcg_nearest") return PaymentRule::kVcgNearest;
  throw ValidationError("unknown payment rule '" + s + "'");
}

inline SettleConfig settle_config_from_json(const Json& j, SettleConfig s = {}) {
  if (j.contains("push_bids")) s.push = push_bids_from_string(j.at("push_bids").get<std::string>());
  s.q_p_max = j.value("q_p_max", s.q_p_max);
  if (j.contains("payment")) s.payment = payment_rule_from_string(j.at("payment").get<std::string>());
  return s;
}

inline SynergyGeneratorSpec generator_from_json(const Json& j, SynergyGeneratorSpec g = {}) {
  g.interest_size = j.value("interest_size", g.interest_size);
  g.base_lo = j.value("base_lo", g.base_lo);
  g.base_hi = j.value("base_hi", g.base_hi);
  g.synergy = j.value("synergy", g.synergy);
  g.num_bonuses = j.value("num_bonuses", g.num_bonuses);
  g.bonus_lo = j.value("bonus_lo", g.bonus_lo);
  g.bonus_hi = j.value("bonus_hi", g.bonus_hi);
  return g;
}

inline DomainSpec domain_spec_from_json(const Json& j) {
  DomainSpec d{Capacities(j.at("capacities").get<std::vector<int>>()), {}};
  for (const auto& t : j.at("types")) {
    BidderTypeSpec b;
    b.name = t.value("name", b.name);
    b.count = t.value("count", b.count);
    if (b.count < 0) throw ValidationError("domain: negative bidder count");
    b.generator = generator_from_json(t.value("generator", Json::object()));
    b.generator.capacities = d.capacities;
    b.generator.validate();
    d.types.push_back(std::move(b));
  }
  if (d.num_bidders() < 1) throw ValidationError("domain: need at least one bidder");
  return d;
}

inline Json domain_spec_to_json(const DomainSpec& d) {
  Json types = Json::array();
  for (const auto& t : d.types) {
    const auto& g = t.generator;
    types.push_back({{"name", t.name},
                     {"count", t.count},
                     {"generator",
                      {{"interest_size", g.interest_size},
                       {"base_lo", g.base_lo},
                       {"base_hi", g.base_hi},
                       {"synergy", g.synergy},
                       {"num_bonuses", g.num_bonuses},
                       {"bonus_lo", g.bonus_lo},
                       {"bonus_hi", g.bonus_hi}}}});
  }
  return {{"capacities", d.capacities.vec()}, {"types", types}};
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot open '" + path + "' for reading");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("'" + path + "': " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw ResourceError("write to '" + path + "' failed");
}

inline void write_json_file(const std::string& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace mlcca
