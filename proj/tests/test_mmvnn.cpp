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


#include <gtest/gtest.h>

#include <random>

#include "mlcca/mlcca.hpp"
#include "support/reference.hpp"

using namespace mlcca;

namespace {

/// Distance of the nearest hidden pre-activation to a bReLU kink.
double kink_margin(const MmvnnNet& net, std::span<const int> x) {
  Eigen::VectorXd h = net.normalize(x);
  double margin = std::numeric_limits<double>::infinity();
  const auto& p = net.params();
  for (std::size_t k = 0; k < net.num_hidden(); ++k) {
    const Eigen::VectorXd z = p.weights[k] * h + p.biases[k];
    const double t = net.cutoffs()[k];
    for (Eigen::Index u = 0; u < z.size(); ++u) margin = std::min({margin, std::abs(z[u]), std::abs(z[u] - t)});
    h = z.unaryExpr([t](double v) { return brelu(v, t); });
  }
  return margin;
}

template <class F>
void for_each_param(NetParams& p, F&& f) {
  for (auto& w : p.weights)
    for (Eigen::Index i = 0; i < w.size(); ++i) f(w.data()[i]);
  for (auto& b : p.biases)
    for (Eigen::Index i = 0; i < b.size(); ++i) f(b.data()[i]);
  for (Eigen::Index i = 0; i < p.skip.size(); ++i) f(p.skip.data()[i]);
}

}  // namespace

TEST(Brelu, Examples) {
  EXPECT_EQ(brelu(-1, 1), 0.0);
  EXPECT_EQ(brelu(0.5, 1), 0.5);
  EXPECT_EQ(brelu(7, 1), 1.0);
}

TEST(Mmvnn, InitDeterministicAndValid) {
  Architecture arch{{5, 4}, 1.0, true};
  const Capacities c{2, 3};
  const auto a = init(arch, c, 42);
  const auto b = init(arch, c, 42);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == init(arch, c, 43));
  EXPECT_TRUE(a.satisfies_constraints());
  EXPECT_EQ(a.forward(Bundle{0, 0}), 0.0);
  EXPECT_EQ(a.layer_dims(), (std::vector<int>{2, 5, 4, 1}));
}

TEST(Mmvnn, ArchitectureValidation) {
  EXPECT_THROW((void)init(Architecture{{}, 1.0, false}, Capacities{2}, 0), ValidationError);
  EXPECT_THROW((void)init(Architecture{{0}, 1.0, false}, Capacities{2}, 0), ValidationError);
  EXPECT_THROW((void)init(Architecture{{3}, 0.0, false}, Capacities{2}, 0), ValidationError);
}

TEST(Mmvnn, ForwardErrors) {
  const auto net = init(Architecture{}, Capacities{2, 2}, 1);
  EXPECT_THROW((void)net.forward(Bundle{1}), StructuralError);
  EXPECT_THROW((void)net.forward(Bundle{3, 0}), DomainError);
}

TEST(Mmvnn, RandomNetsMonotoneAndNormalized) {
  std::mt19937_64 rng(5);
  const Capacities c{2, 2};
  const auto all = ref::bundles(c.vec());
  for (int trial = 0; trial < 50; ++trial) {
    const auto net = ref::random_net(rng, c);
    EXPECT_EQ(net.forward(Bundle{0, 0}), 0.0);
    for (const auto& x : all)
      for (const auto& y : all)
        if (ref::leq(x, y)) {
          EXPECT_LE(net.forward(std::span<const int>(x)), net.forward(std::span<const int>(y)) + 1e-12);
        }
  }
}

TEST(Mmvnn, TabulateMatchesForward) {
  std::mt19937_64 rng(6);
  const Capacities c{3, 1, 2};
  const auto net = ref::random_net(rng, c);
  const auto t = net.tabulate();
  for (const auto& x : ref::bundles(c.vec())) EXPECT_NEAR(t.value(std::span<const int>(x)), net.forward(std::span<const int>(x)), 1e-12);
}

TEST(Mmvnn, Projection) {
  auto net = init(Architecture{{2}, 1.0, false}, Capacities{2}, 3);
  const auto valid = net;
  EXPECT_TRUE(project_params(valid) == valid);
  net.mutable_params().weights[0](0, 0) = -0.3;
  net.mutable_params().biases[0](1) = 0.2;
  EXPECT_FALSE(net.satisfies_constraints());
  const auto fixed = project_params(net);
  EXPECT_EQ(fixed.params().weights[0](0, 0), 0.0);
  EXPECT_EQ(fixed.params().biases[0](1), 0.0);
  EXPECT_TRUE(fixed.satisfies_constraints());
}

TEST(ConstructExact, SmallExamples) {
  BundleSpace s1(Capacities{2});
  const auto zero = construct_exact(ValueTable(s1, {0, 0, 0}));
  for (int x = 0; x <= 2; ++x) EXPECT_NEAR(zero.forward(Bundle{x}), 0.0, 1e-12);
  const auto lin = construct_exact(ValueTable(s1, {0, 2, 4}));
  for (int x = 0; x <= 2; ++x) EXPECT_NEAR(lin.forward(Bundle{x}), 2.0 * x, 1e-12);
  EXPECT_TRUE(lin.satisfies_constraints());

  std::mt19937_64 rng(9);
  BundleSpace s2(Capacities{1, 1});
  const auto vals = ref::random_monotone_table(rng, {1, 1});
  const auto net = construct_exact(ValueTable(s2, vals));
  for (const auto& x : ref::bundles({1, 1})) EXPECT_NEAR(net.forward(std::span<const int>(x)), vals[s2.rank(std::span<const int>(x))], 1e-12);
}

TEST(ConstructExact, LayerShapes) {
  BundleSpace s(Capacities{2, 1});
  std::mt19937_64 rng(1);
  const auto net = construct_exact(ValueTable(s, ref::random_monotone_table(rng, {2, 1})));
  EXPECT_EQ(net.layer_dims(), (std::vector<int>{2, 2 * 5, 5, 5, 1}));
}

TEST(ConstructExact, RejectsInvalidTables) {
  BundleSpace s(Capacities{2});
  EXPECT_THROW((void)construct_exact(ValueTable(s, {0, 2, 1})), ValidationError);
  EXPECT_THROW((void)construct_exact(ValueTable(s, {1, 2, 3})), ValidationError);
  EXPECT_THROW((void)construct_exact(ValueTable(s, {0, 1, 2}), 2), ResourceError);
}

TEST(ConstructExact, WorkedExampleTables) {
  const auto [models, c] = one_item_example();
  for (const auto& m : models) {
    const auto t = to_table(m);
    const auto net = construct_exact(t);
    for (int x = 0; x <= 10; ++x) EXPECT_NEAR(net.forward(Bundle{x}), m.value(Bundle{x}), 1e-9);
  }
}

TEST(Mmvnn, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(21);
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 40; ++trial) {
    const Capacities c{2, 3};
    auto net = ref::random_net(rng, c);
    const std::vector<int> x{static_cast<int>(rng() % 3), static_cast<int>(rng() % 4)};
    if (kink_margin(net, x) < 1e-3) continue;
    ++checked;
    NetParams grad = net.params().zeros_like();
    net.accumulate_gradient(x, 1.0, grad);
    std::vector<double> analytic;
    for_each_param(grad, [&](double& g) { analytic.push_back(g); });
    std::size_t k = 0;
    const double h = 1e-5;
    auto params = net.params();
    for_each_param(params, [&](double& w) {
      const double saved = w;
      w = saved + h;
      const double up = MmvnnNet(c, params, net.cutoffs()).forward(x);
      w = saved - h;
      const double down = MmvnnNet(c, params, net.cutoffs()).forward(x);
      w = saved;
      const double fd = (up - down) / (2 * h);
      EXPECT_LE(std::abs(fd - analytic[k]), 1e-4 * std::max(1.0, std::abs(fd))) << "parameter " << k;
      ++k;
    });
  }
  EXPECT_GE(checked, 20);
}
