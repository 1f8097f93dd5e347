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


// Runs the clock auction and the ML-powered clock auction on one instance of
// the native synergy domain and prints the outcomes side by side.
//
//   auction_demo [seed]

#include <cstdlib>
#include <iostream>

#include "mlcca/mlcca.hpp"

int main(int argc, char** argv) {
  using namespace mlcca;
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 101;
  const auto domain = native_synergy_domain();
  const auto models = generate_domain(seed, domain);
  const auto vals = make_valuations(models);
  const auto& c = domain.capacities;

  const auto best = wdp_true(vals, c);
  std::cout << "seed " << seed << ", optimal welfare " << best.welfare << "\n";

  MechanismSpec clock;
  clock.cca.q_max = 30;
  MechanismSpec ml;
  ml.name = "ml_cca";
  ml.kind = MechanismKind::kMlCca;

  for (const auto* spec : {&clock, &ml}) {
    const auto out = run_mechanism(*spec, vals, c, seed);
    const auto eff = evaluate_heuristics(out, vals, c, 100);
    std::cout << spec->name << ": rounds " << out.rounds << ", cleared " << (out.cleared ? "yes" : "no")
              << ", E_clock " << eff.e_clock << ", E_raise " << eff.e_raise << ", E_profit " << eff.e_profit << "\n";
    std::cout << "  final prices";
    for (double p : out.prices.back().values()) std::cout << " " << p;
    std::cout << "\n  allocation";
    for (const auto& b : out.allocation.bundles) std::cout << " " << b.to_string();
    std::cout << "\n  payments";
    for (double p : out.payments) std::cout << " " << p;
    std::cout << "\n";
  }
  return 0;
}
