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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "mlcca/core.hpp"
#include "mlcca/rng.hpp"

namespace mlcca {

/// Full value table over X, stored in mixed-radix rank order.
struct ValueTable {
  BundleSpace space;
  std::vector<double> values;

  ValueTable() = default;
  ValueTable(BundleSpace s, std::vector<double> v) : space(std::move(s)), values(std::move(v)) {
    if (values.size() != space.size()) throw StructuralError("value table: size does not match bundle space");
  }

  [[nodiscard]] const Capacities& capacities() const { return space.capacities(); }
  [[nodiscard]] double value(std::span<const int> x) const { return values[space.rank(x)]; }
  [[nodiscard]] double at_rank(std::size_t r) const { return values[r]; }
};

/// Checks (N) and (M) on a table via the covering relation x -> x + e_j.
inline bool is_monotone_normalized(const ValueTable& t, double tol = 0.0) {
  if (t.values.empty() || t.values[0] != 0.0) return false;
  const auto& caps = t.space.capacities();
  bool ok = true;
  t.space.for_each([&](std::size_t r, std::span<const int> x) {
    if (!ok) return;
    const double v = t.values[r];
    if (!std::isfinite(v) || v < 0.0) {
      ok = false;
      return;
    }
    for (std::size_t j = 0; j < caps.size(); ++j) {
      if (x[j] < caps[j] && t.values[r + t.space.stride(j)] < v - tol) {
        ok = false;
        return;
      }
    }
  });
  return ok;
}

/// One indicator term w * 1{x >= threshold}.
struct ThresholdTerm {
  Bundle threshold;
  double bonus = 0.0;
  friend bool operator==(const ThresholdTerm&, const ThresholdTerm&) = default;
};

enum class ThresholdCombine { kSum, kMax };

struct ThresholdParams {
  std::vector<ThresholdTerm> terms;
  ThresholdCombine combine = ThresholdCombine::kSum;
  friend bool operator==(const ThresholdParams&, const ThresholdParams&) = default;
};

/// Synthetic synergy valuation: bundle value is the summed per-copy base
/// value of held interest copies, scaled by (1+synergy)^(k-1) where k is
/// the number of held interest copies, plus additive threshold bonuses.
struct SynergyParams {
  std::vector<bool> interest;
  std::vector<double> base;  // per-copy value, 0 for non-interest items
  double synergy = 0.0;
  std::vector<ThresholdTerm> bonuses;
  friend bool operator==(const SynergyParams&, const SynergyParams&) = default;
};

struct TabularParams {
  std::vector<double> values;  // rank order
  friend bool operator==(const TabularParams&, const TabularParams&) = default;
};

enum class ModelKind { kTabular, kSynergyGenerated, kThreshold };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kTabular: return "tabular";
    case ModelKind::kSynergyGenerated: return "synergy";
    case ModelKind::kThreshold: return "threshold";
  }
  return "unknown";
}

/// Monotone, normalized true valuation of one bidder.
class ValueModel {
 public:
  using Params = std::variant<TabularParams, SynergyParams, ThresholdParams>;

  ValueModel() = default;

  static ValueModel tabular(const ValueTable& t) {
    if (!is_monotone_normalized(t)) throw ValidationError("tabular model: table is not monotone and normalized");
    return ValueModel(t.space.capacities(), TabularParams{t.values});
  }

  static ValueModel threshold(Capacities c, ThresholdParams p) {
    for (const auto& term : p.terms) {
      if (!term.threshold.within(c)) throw ValidationError("threshold model: threshold outside capacities");
      if (!(term.bonus >= 0.0) || !std::isfinite(term.bonus)) throw ValidationError("threshold model: bonus must be >= 0");
      if (term.threshold.is_empty() && term.bonus > 0.0)
        throw ValidationError("threshold model: empty threshold violates normalization");
    }
    return ValueModel(std::move(c), std::move(p));
  }

  static ValueModel synergy(Capacities c, SynergyParams p) {
    if (p.interest.size() != c.size() || p.base.size() != c.size())
      throw ValidationError("synergy model: parameter dimension mismatch");
    if (!(p.synergy >= 0.0) || !std::isfinite(p.synergy)) throw ValidationError("synergy model: synergy must be >= 0");
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (!(p.base[j] >= 0.0) || !std::isfinite(p.base[j])) throw ValidationError("synergy model: base values must be >= 0");
      if (!p.interest[j] && p.base[j] != 0.0) throw ValidationError("synergy model: base value on non-interest item");
    }
    for (const auto& term : p.bonuses) {
      if (!term.threshold.within(c) || term.threshold.is_empty() || !(term.bonus >= 0.0))
        throw ValidationError("synergy model: invalid threshold bonus");
    }
    return ValueModel(std::move(c), std::move(p));
  }

  [[nodiscard]] ModelKind kind() const { return static_cast<ModelKind>(params_.index()); }
  [[nodiscard]] const Capacities& capacities() const { return space_.capacities(); }
  [[nodiscard]] const BundleSpace& space() const { return space_; }
  [[nodiscard]] const Params& params() const { return params_; }

  [[nodiscard]] double value(std::span<const int> x) const {
    if (!within(x)) throw DomainError("value: bundle outside model capacities");
    return std::visit([&](const auto& p) { return eval(p, x); }, params_);
  }
  [[nodiscard]] double value(const Bundle& x) const { return value(x.counts()); }

  friend bool operator==(const ValueModel& a, const ValueModel& b) {
    return a.capacities() == b.capacities() && a.params_ == b.params_;
  }

 private:
  ValueModel(Capacities c, Params p) : space_(std::move(c)), params_(std::move(p)) {
    if (const auto* t = std::get_if<TabularParams>(&params_)) {
      if (t->values.size() != space_.size()) throw ValidationError("tabular model: table size mismatch");
    }
  }

  [[nodiscard]] bool within(std::span<const int> x) const {
    const auto& c = capacities();
    if (x.size() != c.size()) return false;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (x[j] < 0 || x[j] > c[j]) return false;
    return true;
  }

  static bool covers(std::span<const int> x, const Bundle& t) {
    for (std::size_t j = 0; j < x.size(); ++j)
      if (x[j] < t[j]) return false;
    return true;
  }

  [[nodiscard]] double eval(const TabularParams& p, std::span<const int> x) const { return p.values[space_.rank(x)]; }

  static double eval(const ThresholdParams& p, std::span<const int> x) {
    double v = 0.0;
    for (const auto& term : p.terms) {
      if (!covers(x, term.threshold)) continue;
      v = p.combine == ThresholdCombine::kSum ? v + term.bonus : std::max(v, term.bonus);
    }
    return v;
  }

  static double eval(const SynergyParams& p, std::span<const int> x) {
    double base_sum = 0.0;
    int held = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (!p.interest[j]) continue;
      base_sum += p.base[j] * x[j];
      held += x[j];
    }
    double v = held > 0 ? base_sum * std::pow(1.0 + p.synergy, held - 1) : 0.0;
    for (const auto& term : p.bonuses)
      if (covers(x, term.threshold)) v += term.bonus;
    return v;
  }

  BundleSpace space_;
  Params params_;
};

/// Tabulates any valuation over X.
template <class V>
ValueTable tabulate(const V& model, const Capacities& c, std::size_t cap = kDefaultEnumerationCap) {
  BundleSpace space(c);
  space.require_enumerable(cap);
  std::vector<double> values(space.size());
  space.for_each([&](std::size_t r, std::span<const int> x) { values[r] = model.value(x); });
  return ValueTable(std::move(space), std::move(values));
}

inline ValueTable to_table(const ValueModel& model, std::size_t cap = kDefaultEnumerationCap) {
  return tabulate(model, model.capacities(), cap);
}

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

/// Parameters of the seeded synergy generator for one bidder.
struct SynergyGeneratorSpec {
  Capacities capacities;
  int interest_size = 0;  // 0 = all items
  double base_lo = 1.0;
  double base_hi = 2.0;
  double synergy = 0.1;
  int num_bonuses = 0;
  double bonus_lo = 0.0;
  double bonus_hi = 0.0;

  void validate() const {
    if (capacities.size() == 0) throw ValidationError("generator: capacities missing");
    if (interest_size < 0 || interest_size > static_cast<int>(capacities.size()))
      throw ValidationError("generator: interest_size out of range");
    if (!(base_lo >= 0.0) || !(base_hi >= base_lo)) throw ValidationError("generator: invalid base value range");
    if (!(synergy >= 0.0) || !std::isfinite(synergy)) throw ValidationError("generator: synergy must be >= 0");
    if (num_bonuses < 0 || !(bonus_lo >= 0.0) || !(bonus_hi >= bonus_lo))
      throw ValidationError("generator: invalid bonus spec");
  }
};

inline ValueModel generate_synergy_model(std::uint64_t seed, const SynergyGeneratorSpec& spec) {
  spec.validate();
  const auto m = spec.capacities.size();
  Rng rng(seed);

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates with the portable generator.
  for (std::size_t j = m; j-- > 1;) {
    const auto k = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(j)));
    std::swap(order[j], order[k]);
  }
  const auto k_interest = spec.interest_size == 0 ? m : static_cast<std::size_t>(spec.interest_size);

  SynergyParams p;
  p.interest.assign(m, false);
  p.base.assign(m, 0.0);
  p.synergy = spec.synergy;
  for (std::size_t i = 0; i < k_interest; ++i) p.interest[order[i]] = true;
  for (std::size_t j = 0; j < m; ++j) {
    const double draw = rng.uniform(spec.base_lo, spec.base_hi);
    if (p.interest[j]) p.base[j] = draw;
  }
  for (int b = 0; b < spec.num_bonuses; ++b) {
    std::vector<int> t(m, 0);
    for (std::size_t j = 0; j < m; ++j)
      if (p.interest[j]) t[j] = static_cast<int>(rng.uniform_int(0, spec.capacities[j]));
    const double w = rng.uniform(spec.bonus_lo, spec.bonus_hi);
    Bundle tb(std::move(t));
    if (!tb.is_empty()) p.bonuses.push_back({std::move(tb), w});
  }
  return ValueModel::synergy(spec.capacities, std::move(p));
}

/// A group of identically-distributed bidders (e.g. "regional", "national").
struct BidderTypeSpec {
  std::string name = "bidder";
  int count = 1;
  SynergyGeneratorSpec generator;
};

struct DomainSpec {
  Capacities capacities;
  std::vector<BidderTypeSpec> types;

  [[nodiscard]] int num_bidders() const {
    int n = 0;
    for (const auto& t : types) n += t.count;
    return n;
  }
};

/// Bidder i of the domain draws from the stream derive_seed(seed, {i}).
inline std::vector<ValueModel> generate_domain(std::uint64_t seed, const DomainSpec& spec) {
  std::vector<ValueModel> models;
  std::uint64_t i = 0;
  for (const auto& type : spec.types) {
    auto gen = type.generator;
    gen.capacities = spec.capacities;
    for (int k = 0; k < type.count; ++k, ++i) models.push_back(generate_synergy_model(derive_seed(seed, {i}), gen));
  }
  return models;
}

}  // namespace mlcca
