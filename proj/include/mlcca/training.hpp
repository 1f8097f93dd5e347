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

// Fitting an mMVNN to one bidder's demand responses.
//
// For each observation (x*, p) the net predicts x_hat = argmax M(x) - <p,x>.
// When x_hat != x*, the predicted utility difference
//   (M(x_hat) - <p,x_hat>) - (M(x*) - <p,x*>)  >= 0
// is the loss and one projected gradient step is taken on it.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "mlcca/core.hpp"
#include "mlcca/mmvnn.hpp"
#include "mlcca/oracles.hpp"
#include "mlcca/rng.hpp"

namespace mlcca {

enum class OptimizerKind { kSgd, kAdam };

struct TrainConfig {
  int epochs = 30;
  double learning_rate = 0.005;
  double l2 = 0.0;
  bool cosine_annealing = false;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  bool batch_per_epoch = false;  // accumulate the epoch's losses, then step once
  bool shuffle = false;          // seeded permutation of observations per epoch
  bool normalize_prices = true;  // train on p / 2^k, fold 2^k into the output layer
  std::uint64_t seed = 0;

  void validate() const {
    if (epochs < 1) throw ValidationError("train config: epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw ValidationError("train config: learning rate must be > 0");
    if (!(l2 >= 0.0)) throw ValidationError("train config: l2 must be >= 0");
  }
};

struct TrainReport {
  std::vector<double> epoch_loss;     // in value units
  std::vector<int> epoch_mismatches;
  int steps = 0;
  double price_scale = 1.0;
  std::uint64_t snapshot_id = 0;      // hash of the final parameters
};

/// Deterministic FNV-1a hash over the parameter bytes.
inline std::uint64_t parameter_hash(const MmvnnNet& net) {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&](const double* p, Eigen::Index n) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n) * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& w : net.params().weights) feed(w.data(), w.size());
  for (const auto& b : net.params().biases) feed(b.data(), b.size());
  feed(net.params().skip.data(), net.params().skip.size());
  return h;
}

namespace detail {

struct LossEval {
  double loss = 0.0;
  bool mismatch = false;
  Bundle predicted;
};

inline LossEval dq_loss_on_table(const ValueTable& table, const DemandObservation& obs, double price_scale) {
  std::vector<double> scaled(obs.price.size());
  for (std::size_t j = 0; j < scaled.size(); ++j) scaled[j] = obs.price[j] / price_scale;
  const PriceVector p(std::move(scaled));
  const Valuation val(table);
  auto res = argmax_utility(val, p, {ArgmaxStrategy::kNaive});
  LossEval out;
  out.predicted = res.bundle;
  if (res.bundle == obs.bundle) return out;
  out.mismatch = true;
  const double observed_u = table.value(obs.bundle.counts()) - inner_product(p.values(), obs.bundle.counts());
  out.loss = std::max(0.0, res.utility - observed_u);
  return out;
}

inline void scale_output(MmvnnNet& net, double factor) {
  auto& p = net.mutable_params();
  p.weights.back() *= factor;
  if (p.skip.size()) p.skip *= factor;
}

class AdamState {
 public:
  explicit AdamState(const NetParams& shape) : m_(shape.zeros_like()), v_(shape.zeros_like()) {}

  void apply(NetParams& params, const NetParams& grad, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    auto step = [&](auto& p, const auto& g, auto& m, auto& v) {
      m = kBeta1 * m + (1.0 - kBeta1) * g;
      v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
      p -= (lr * (m / c1).array() / ((v / c2).array().sqrt() + kEps)).matrix();
    };
    for (std::size_t k = 0; k < params.weights.size(); ++k) step(params.weights[k], grad.weights[k], m_.weights[k], v_.weights[k]);
    for (std::size_t k = 0; k < params.biases.size(); ++k) step(params.biases[k], grad.biases[k], m_.biases[k], v_.biases[k]);
    if (params.skip.size()) step(params.skip, grad.skip, m_.skip, v_.skip);
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  NetParams m_;
  NetParams v_;
  int t_ = 0;
};

inline void sgd_apply(NetParams& params, const NetParams& grad, double lr) {
  for (std::size_t k = 0; k < params.weights.size(); ++k) params.weights[k] -= lr * grad.weights[k];
  for (std::size_t k = 0; k < params.biases.size(); ++k) params.biases[k] -= lr * grad.biases[k];
  if (params.skip.size()) params.skip -= lr * grad.skip;
}

inline double power_of_two_scale(const std::vector<DemandObservation>& obs, const Capacities& c) {
  double mx = 0.0;
  for (const auto& o : obs) mx = std::max(mx, inner_product(o.price.values(), c.counts()));
  if (!(mx > 0.0)) return 1.0;
  return std::exp2(std::round(std::log2(mx)));
}

}  // namespace detail

/// Predicted utility difference of `net` at one observation; 0 when the
/// net's own demand at obs.price (smallest-rank tie-break) equals obs.bundle.
inline double dq_loss(const MmvnnNet& net, const DemandObservation& obs) {
  if (obs.bundle.size() != net.capacities().size()) throw StructuralError("dq_loss: dimension mismatch");
  return detail::dq_loss_on_table(net.tabulate(), obs, 1.0).loss;
}

/// Trains `net` on the observations of a single bidder.
inline std::pair<MmvnnNet, TrainReport> train_on_dqs(MmvnnNet net, const std::vector<DemandObservation>& obs,
                                                     const TrainConfig& cfg) {
  cfg.validate();
  if (obs.empty()) throw ValidationError("train_on_dqs: no observations");
  for (const auto& o : obs)
    if (!o.bundle.within(net.capacities())) throw DomainError("train_on_dqs: observation outside capacities");

  TrainReport report;
  const double scale = cfg.normalize_prices ? detail::power_of_two_scale(obs, net.capacities()) : 1.0;
  report.price_scale = scale;
  detail::scale_output(net, 1.0 / scale);

  std::vector<std::size_t> order(obs.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed);
  detail::AdamState adam(net.params());
  NetParams grad = net.params().zeros_like();

  ValueTable table = net.tabulate();
  bool dirty = false;
  auto step = [&](double lr) {
    if (cfg.l2 > 0.0)
      for (std::size_t k = 0; k < grad.weights.size(); ++k) grad.weights[k] += cfg.l2 * net.params().weights[k];
    if (cfg.optimizer == OptimizerKind::kAdam) adam.apply(net.mutable_params(), grad, lr);
    else detail::sgd_apply(net.mutable_params(), grad, lr);
    net.project();
    grad.set_zero();
    dirty = true;
    ++report.steps;
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double lr = cfg.learning_rate;
    if (cfg.cosine_annealing) lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * epoch / cfg.epochs));
    if (cfg.shuffle) {
      for (std::size_t j = order.size(); j-- > 1;) {
        const auto k = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(j)));
        std::swap(order[j], order[k]);
      }
    }
    double epoch_loss = 0.0;
    int mismatches = 0;
    for (std::size_t idx : order) {
      const auto& o = obs[idx];
      if (dirty) {
        table = net.tabulate();
        dirty = false;
      }
      const auto ev = detail::dq_loss_on_table(table, o, scale);
      if (!ev.mismatch) continue;
      ++mismatches;
      epoch_loss += ev.loss * scale;
      net.accumulate_gradient(ev.predicted.counts(), 1.0, grad);
      net.accumulate_gradient(o.bundle.counts(), -1.0, grad);
      if (!cfg.batch_per_epoch) step(lr);
    }
    if (cfg.batch_per_epoch && mismatches > 0) step(lr);
    report.epoch_loss.push_back(epoch_loss);
    report.epoch_mismatches.push_back(mismatches);
    // With no mismatch no step was taken, so every later epoch is identical.
    if (mismatches == 0) {
      report.epoch_loss.resize(static_cast<std::size_t>(cfg.epochs), 0.0);
      report.epoch_mismatches.resize(static_cast<std::size_t>(cfg.epochs), 0);
      break;
    }
  }
  detail::scale_output(net, scale);
  report.snapshot_id = parameter_hash(net);
  return {std::move(net), std::move(report)};
}

}  // namespace mlcca
