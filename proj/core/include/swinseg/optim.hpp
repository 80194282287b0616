// Copyright 2026 The swinseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swinseg/parameters.hpp"

namespace swinseg {

struct AdamWOptions {
  double learning_rate = 1e-4;
  double weight_decay = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

template <typename T>
struct OptimizerState {
  AdamWOptions options;
  std::int64_t step_count = 0;
  std::vector<std::string> names;
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;

  // Zero moments shaped after `params`.
  static OptimizerState init(const NamedParameterSet<T>& params, AdamWOptions options);
};

// One AdamW update from the gradients currently held by `params`.
// Weight decay is decoupled: theta <- theta * (1 - lr * wd) before the
// bias-corrected Adam step. Parameters without a gradient are treated as
// having a zero gradient. Throws ValidationError when `params` does not
// match the set the state was initialized from.
template <typename T>
void adamw_step(NamedParameterSet<T>& params, OptimizerState<T>& state);

}  // namespace swinseg
