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

#include "mlcca/core.hpp"
#include "mlcca/experiment.hpp"
#include "mlcca/mechanisms.hpp"
#include "mlcca/metrics.hpp"
#include "mlcca/mmvnn.hpp"
#include "mlcca/oracles.hpp"
#include "mlcca/price_engine.hpp"
#include "mlcca/rng.hpp"
#include "mlcca/serialization.hpp"
#include "mlcca/training.hpp"
#include "mlcca/value_models.hpp"
