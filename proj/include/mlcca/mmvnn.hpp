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

// Multiset monotone-value networks.
//
//   M(x) = W_K bReLU_t( ... bReLU_t(W_1 (D x) + b_1) ... ) [+ s^T (D x)]
//
// with W_k >= 0, b_k <= 0, D = diag(1/c_1, ..., 1/c_m) fixed, and an
// optional nonnegative linear skip term s. Any parameter vector obeying the
// sign constraints gives a monotone, normalized valuation over X.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mlcca/core.hpp"
#include "mlcca/rng.hpp"
#include "mlcca/value_models.hpp"

namespace mlcca {

inline double brelu(double z, double t) { return std::min(t, std::max(0.0, z)); }

/// Derivative used in backprop: 1 on the closed band [0, t], i.e. the
/// right-derivative at 0 and the left-derivative at t.
inline double brelu_grad(double z, double t) { return (z >= 0.0 && z <= t) ? 1.0 : 0.0; }

struct Architecture {
  std::vector<int> hidden_dims{10, 10};
  double cutoff = 1.0;
  bool linear_skip = false;

  void validate() const {
    if (hidden_dims.empty()) throw ValidationError("architecture: need at least one hidden layer");
    for (int d : hidden_dims)
      if (d < 1) throw ValidationError("architecture: hidden dims must be positive");
    if (!(cutoff > 0.0)) throw ValidationError("architecture: cutoff must be positive");
  }
};

/// Parameter-shaped container; used for the net itself and its gradients.
struct NetParams {
  std::vector<Eigen::MatrixXd> weights;  // hidden layers, then the 1 x d output row
  std::vector<Eigen::VectorXd> biases;   // hidden layers only
  Eigen::VectorXd skip;                  // size m, or size 0 without skip

  void set_zero() {
    for (auto& w : weights) w.setZero();
    for (auto& b : biases) b.setZero();
    skip.setZero();
  }
  [[nodiscard]] NetParams zeros_like() const {
    NetParams g = *this;
    g.set_zero();
    return g;
  }
};

class MmvnnNet {
 public:
  MmvnnNet() = default;
  MmvnnNet(Capacities c, NetParams params, std::vector<double> cutoffs)
      : caps_(std::move(c)), params_(std::move(params)), cutoffs_(std::move(cutoffs)) {
    validate_shapes();
  }

  [[nodiscard]] const Capacities& capacities() const { return caps_; }
  [[nodiscard]] const NetParams& params() const { return params_; }
  [[nodiscard]] NetParams& mutable_params() { return params_; }
  [[nodiscard]] const std::vector<double>& cutoffs() const { return cutoffs_; }
  [[nodiscard]] std::size_t num_hidden() const { return params_.biases.size(); }
  [[nodiscard]] bool has_skip() const { return params_.skip.size() > 0; }

  [[nodiscard]] std::vector<int> layer_dims() const {
    std::vector<int> dims{static_cast<int>(caps_.size())};
    for (const auto& w : params_.weights) dims.push_back(static_cast<int>(w.rows()));
    return dims;
  }

  /// True iff every weight >= 0, every bias <= 0 and every cutoff > 0.
  [[nodiscard]] bool satisfies_constraints() const {
    for (const auto& w : params_.weights)
      if (w.size() && w.minCoeff() < 0.0) return false;
    for (const auto& b : params_.biases)
      if (b.size() && b.maxCoeff() > 0.0) return false;
    if (params_.skip.size() && params_.skip.minCoeff() < 0.0) return false;
    return std::all_of(cutoffs_.begin(), cutoffs_.end(), [](double t) { return t > 0.0; });
  }

  [[nodiscard]] Eigen::VectorXd normalize(std::span<const int> x) const {
    if (x.size() != caps_.size()) throw StructuralError("mmvnn: bundle dimension mismatch");
    Eigen::VectorXd h(static_cast<Eigen::Index>(x.size()));
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] < 0 || x[j] > caps_[j]) throw DomainError("mmvnn: bundle outside capacities");
      h[static_cast<Eigen::Index>(j)] = static_cast<double>(x[j]) / static_cast<double>(caps_[j]);
    }
    return h;
  }

  [[nodiscard]] double forward(std::span<const int> x) const {
    const Eigen::VectorXd h0 = normalize(x);
    Eigen::VectorXd h = h0;
    for (std::size_t k = 0; k < num_hidden(); ++k) {
      Eigen::VectorXd z = params_.weights[k] * h + params_.biases[k];
      const double t = cutoffs_[k];
      h = z.unaryExpr([t](double v) { return brelu(v, t); });
    }
    double out = (params_.weights.back() * h)(0);
    if (has_skip()) out += params_.skip.dot(h0);
    return out;
  }
  [[nodiscard]] double forward(const Bundle& x) const { return forward(x.counts()); }
  [[nodiscard]] double value(std::span<const int> x) const { return forward(x); }

  /// Adds scale * d forward(x) / d params into grad.
  void accumulate_gradient(std::span<const int> x, double scale, NetParams& grad) const {
    const Eigen::VectorXd h0 = normalize(x);
    std::vector<Eigen::VectorXd> acts{h0};
    std::vector<Eigen::VectorXd> pre;
    for (std::size_t k = 0; k < num_hidden(); ++k) {
      pre.push_back(params_.weights[k] * acts.back() + params_.biases[k]);
      const double t = cutoffs_[k];
      acts.push_back(pre.back().unaryExpr([t](double v) { return brelu(v, t); }));
    }
    const std::size_t K = num_hidden();
    grad.weights[K] += scale * acts[K].transpose();
    if (has_skip()) grad.skip += scale * h0;
    Eigen::VectorXd delta = params_.weights[K].row(0).transpose();
    for (std::size_t k = K; k-- > 0;) {
      const double t = cutoffs_[k];
      for (Eigen::Index u = 0; u < delta.size(); ++u) delta[u] *= brelu_grad(pre[k][u], t);
      grad.weights[k] += scale * delta * acts[k].transpose();
      grad.biases[k] += scale * delta;
      if (k > 0) delta = params_.weights[k].transpose() * delta;
    }
  }

  /// Restores the sign constraints: w <- max(0, w), b <- min(0, b).
  void project() {
    for (auto& w : params_.weights) w = w.cwiseMax(0.0);
    for (auto& b : params_.biases) b = b.cwiseMin(0.0);
    if (has_skip()) params_.skip = params_.skip.cwiseMax(0.0);
  }

  /// Values of the net on every bundle of X, in rank order.
  [[nodiscard]] ValueTable tabulate(std::size_t cap = kDefaultEnumerationCap) const {
    BundleSpace space(caps_);
    space.require_enumerable(cap);
    const auto N = static_cast<Eigen::Index>(space.size());
    const auto m = static_cast<Eigen::Index>(caps_.size());
    Eigen::MatrixXd h0(m, N);
    space.for_each([&](std::size_t r, std::span<const int> x) {
      for (Eigen::Index j = 0; j < m; ++j)
        h0(j, static_cast<Eigen::Index>(r)) = static_cast<double>(x[j]) / static_cast<double>(caps_[j]);
    });
    Eigen::MatrixXd h = h0;
    for (std::size_t k = 0; k < num_hidden(); ++k) {
      Eigen::MatrixXd z = params_.weights[k] * h;
      z.colwise() += params_.biases[k];
      const double t = cutoffs_[k];
      h = z.unaryExpr([t](double v) { return brelu(v, t); });
    }
    Eigen::RowVectorXd out = params_.weights.back() * h;
    if (has_skip()) out += params_.skip.transpose() * h0;
    std::vector<double> values(out.data(), out.data() + out.size());
    return ValueTable(std::move(space), std::move(values));
  }

  friend bool operator==(const MmvnnNet& a, const MmvnnNet& b) {
    if (!(a.caps_ == b.caps_) || a.cutoffs_ != b.cutoffs_) return false;
    const auto& pa = a.params_;
    const auto& pb = b.params_;
    if (pa.weights.size() != pb.weights.size() || pa.skip.size() != pb.skip.size()) return false;
    for (std::size_t k = 0; k < pa.weights.size(); ++k)
      if (pa.weights[k].rows() != pb.weights[k].rows() || pa.weights[k].cols() != pb.weights[k].cols() ||
          pa.weights[k] != pb.weights[k])
        return false;
    for (std::size_t k = 0; k < pa.biases.size(); ++k)
      if (pa.biases[k] != pb.biases[k]) return false;
    return pa.skip.size() == 0 || pa.skip == pb.skip;
  }

 private:
  void validate_shapes() const {
    const auto& p = params_;
    if (p.weights.size() < 2 || p.biases.size() + 1 != p.weights.size() || cutoffs_.size() != p.biases.size())
      throw StructuralError("mmvnn: inconsistent layer count");
    Eigen::Index in = static_cast<Eigen::Index>(caps_.size());
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
      if (p.weights[k].cols() != in) throw StructuralError("mmvnn: weight shape mismatch");
      if (k < p.biases.size() && p.biases[k].size() != p.weights[k].rows())
        throw StructuralError("mmvnn: bias shape mismatch");
      in = p.weights[k].rows();
    }
    if (in != 1) throw StructuralError("mmvnn: output layer must have one unit");
    if (p.skip.size() != 0 && p.skip.size() != static_cast<Eigen::Index>(caps_.size()))
      throw StructuralError("mmvnn: skip shape mismatch");
  }

  Capacities caps_;
  NetParams params_;
  std::vector<double> cutoffs_;
};

/// Weights ~ U(0, 2/fan_in), biases ~ -U(0, 0.1 * cutoff).
inline MmvnnNet init(const Architecture& arch, const Capacities& c, std::uint64_t seed) {
  arch.validate();
  Rng rng(seed);
  NetParams p;
  Eigen::Index in = static_cast<Eigen::Index>(c.size());
  std::vector<int> dims = arch.hidden_dims;
  dims.push_back(1);
  for (std::size_t k = 0; k < dims.size(); ++k) {
    Eigen::MatrixXd w(dims[k], in);
    const double hi = 2.0 / static_cast<double>(in);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index q = 0; q < w.cols(); ++q) w(r, q) = rng.uniform(0.0, hi);
    p.weights.push_back(std::move(w));
    if (k + 1 < dims.size()) {
      Eigen::VectorXd b(dims[k]);
      for (Eigen::Index r = 0; r < b.size(); ++r) b[r] = -rng.uniform(0.0, 0.1 * arch.cutoff);
      p.biases.push_back(std::move(b));
    }
    in = dims[k];
  }
  if (arch.linear_skip) {
    p.skip.resize(static_cast<Eigen::Index>(c.size()));
    for (Eigen::Index j = 0; j < p.skip.size(); ++j) p.skip[j] = rng.uniform(0.0, 2.0 / static_cast<double>(c.size()));
  }
  return MmvnnNet(c, std::move(p), std::vector<double>(arch.hidden_dims.size(), arch.cutoff));
}

inline MmvnnNet project_params(MmvnnNet net) {
  net.project();
  return net;
}

/// Exact representation of a monotone normalized table as a net with three
/// hidden bReLU layers of widths m(|X|-1), |X|-1, |X|-1 and cutoff 1.
///
/// With bundles x_1 = 0, x_2, ..., x_N sorted by value w_1 <= ... <= w_N,
///   v(y) = sum_{l<N} (w_{l+1} - w_l) * 1{ y is not <= x_j for all j <= l },
/// and each indicator is built from bReLUs: layer 1 computes y_k - x_{j,k},
/// layer 2 ORs over items, layer 3 ANDs over the first l bundles.
inline MmvnnNet construct_exact(const ValueTable& table, std::size_t cap = 4096) {
  if (table.space.size() > cap)
    throw ResourceError("construct_exact: |X| = " + std::to_string(table.space.size()) + " exceeds cap");
  if (!is_monotone_normalized(table)) throw ValidationError("construct_exact: table is not monotone and normalized");

  const auto& c = table.capacities();
  const auto m = static_cast<Eigen::Index>(c.size());
  const std::size_t N = table.space.size();
  const auto L = static_cast<Eigen::Index>(N - 1);

  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return table.values[a] < table.values[b]; });

  NetParams p;
  Eigen::MatrixXd w1 = Eigen::MatrixXd::Zero(m * L, m);
  Eigen::VectorXd b1(m * L);
  std::vector<int> xj(static_cast<std::size_t>(m));
  for (Eigen::Index l = 0; l < L; ++l) {
    table.space.unrank_into(order[static_cast<std::size_t>(l)], xj);
    for (Eigen::Index k = 0; k < m; ++k) {
      w1(l * m + k, k) = static_cast<double>(c[static_cast<std::size_t>(k)]);
      b1[l * m + k] = -static_cast<double>(xj[static_cast<std::size_t>(k)]);
    }
  }
  Eigen::MatrixXd w2 = Eigen::MatrixXd::Zero(L, m * L);
  for (Eigen::Index l = 0; l < L; ++l) w2.block(l, l * m, 1, m).setOnes();
  Eigen::MatrixXd w3 = Eigen::MatrixXd::Zero(L, L);
  Eigen::VectorXd b3(L);
  for (Eigen::Index l = 0; l < L; ++l) {
    w3.block(l, 0, 1, l + 1).setOnes();
    b3[l] = -static_cast<double>(l);
  }
  Eigen::MatrixXd w4(1, L);
  for (Eigen::Index l = 0; l < L; ++l)
    w4(0, l) = table.values[order[static_cast<std::size_t>(l) + 1]] - table.values[order[static_cast<std::size_t>(l)]];

  p.weights = {std::move(w1), std::move(w2), std::move(w3), std::move(w4)};
  p.biases = {std::move(b1), Eigen::VectorXd::Zero(L), std::move(b3)};
  return MmvnnNet(c, std::move(p), {1.0, 1.0, 1.0});
}

}  // namespace mlcca
