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

#include "mlcca/mlcca.hpp"
#include "support/reference.hpp"

using namespace mlcca;

namespace {

bool monotone_by_pairs(const ValueModel& m) {
  const auto all = ref::bundles(m.capacities().vec());
  for (const auto& x : all)
    for (const auto& y : all)
      if (ref::leq(x, y) && m.value(std::span<const int>(x)) > m.value(std::span<const int>(y))) return false;
  return m.value(Bundle::empty(m.capacities().size())) == 0.0;
}

}  // namespace

TEST(ValueModel, WorkedExampleValues) {
  const auto [one, c1] = one_item_example();
  EXPECT_DOUBLE_EQ(one[1].value(Bundle{5}), 5.0);
  EXPECT_DOUBLE_EQ(one[1].value(Bundle{4}), 3.0);
  EXPECT_DOUBLE_EQ(one[0].value(Bundle{0}), 0.0);
  const auto [two, c2] = two_item_example();
  EXPECT_DOUBLE_EQ(two[0].value(Bundle{7, 3}), 10.0);
  EXPECT_DOUBLE_EQ(two[0].value(Bundle{4, 4}), 9.0);
  EXPECT_DOUBLE_EQ(two[1].value(Bundle{8, 2}), 10.0);
  EXPECT_DOUBLE_EQ(two[1].value(Bundle{4, 5}), 9.0);
  EXPECT_DOUBLE_EQ(two[1].value(Bundle{7, 2}), 0.0);
  EXPECT_DOUBLE_EQ(two[1].value(Bundle{3, 3}), 0.0);
}

TEST(ValueModel, OutOfCapacityThrows) {
  const auto [one, c] = one_item_example();
  EXPECT_THROW((void)one[0].value(Bundle{11}), DomainError);
  EXPECT_THROW((void)one[0].value(Bundle{1, 1}), DomainError);
}

TEST(ValueModel, SynergyDeterministic) {
  SynergyGeneratorSpec spec{Capacities{2, 2, 2}, 2, 1.0, 2.0, 0.2, 2, 0.5, 1.5};
  EXPECT_EQ(generate_synergy_model(7, spec), generate_synergy_model(7, spec));
  EXPECT_FALSE(generate_synergy_model(7, spec) == generate_synergy_model(8, spec));
}

TEST(ValueModel, ZeroSynergyIsAdditive) {
  SynergyGeneratorSpec spec{Capacities{2, 3}, 0, 1.0, 2.0, 0.0, 0, 0.0, 0.0};
  const auto m = generate_synergy_model(3, spec);
  const auto& p = std::get<SynergyParams>(m.params());
  for (const auto& x : ref::bundles({2, 3})) {
    double expect = 0.0;
    for (std::size_t j = 0; j < 2; ++j) expect += p.base[j] * x[j];
    EXPECT_NEAR(m.value(std::span<const int>(x)), expect, 1e-12);
  }
}

TEST(ValueModel, GeneratedModelsMonotone) {
  SynergyGeneratorSpec spec{Capacities{2, 2, 2}, 0, 1.0, 2.0, 0.1, 3, 0.0, 2.0};
  EXPECT_TRUE(monotone_by_pairs(generate_synergy_model(7, spec)));
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto m = generate_domain(s, native_synergy_domain());
    for (const auto& v : m) EXPECT_TRUE(is_monotone_normalized(to_table(v)));
  }
}

TEST(ValueModel, ToTable) {
  BundleSpace space(Capacities{2});
  const auto lin = ValueModel::tabular(ValueTable(space, {0, 2, 4}));
  EXPECT_EQ(to_table(lin).values, (std::vector<double>{0, 2, 4}));
  const auto [one, c] = one_item_example();
  const auto t = to_table(one[0]);
  for (int x = 0; x <= 10; ++x) EXPECT_DOUBLE_EQ(t.values[static_cast<std::size_t>(x)], x >= 6 ? 6.0 : 0.0);
  EXPECT_THROW((void)to_table(one[0], 5), ResourceError);
}

TEST(ValueModel, TabularRoundTrip) {
  const auto m = generate_synergy_model(5, SynergyGeneratorSpec{Capacities{3, 2}, 0, 0.5, 1.5, 0.3, 1, 0.5, 1.0});
  const auto t = ValueModel::tabular(to_table(m));
  for (const auto& x : ref::bundles({3, 2})) EXPECT_DOUBLE_EQ(t.value(std::span<const int>(x)), m.value(std::span<const int>(x)));
}

TEST(ValueModel, RejectsInvalidTables) {
  BundleSpace space(Capacities{2});
  EXPECT_THROW(ValueModel::tabular(ValueTable(space, {0, 3, 2})), ValidationError);
  EXPECT_THROW(ValueModel::tabular(ValueTable(space, {1, 3, 4})), ValidationError);
  EXPECT_THROW(ValueTable(space, {0, 1}), StructuralError);
  EXPECT_THROW(ValueModel::threshold(Capacities{2}, ThresholdParams{{{Bundle{3}, 1.0}}, ThresholdCombine::kSum}),
               ValidationError);
}

TEST(ValueModel, GeneratorSpecValidation) {
  SynergyGeneratorSpec spec{Capacities{2, 2}, 0, 1.0, 2.0, -0.1, 0, 0.0, 0.0};
  EXPECT_THROW((void)generate_synergy_model(1, spec), ValidationError);
  spec.synergy = 0.1;
  spec.interest_size = 3;
  EXPECT_THROW((void)generate_synergy_model(1, spec), ValidationError);
}
