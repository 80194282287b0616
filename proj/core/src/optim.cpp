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

#include "swinseg/optim.hpp"

#include <cmath>

namespace swinseg {

void AdamWOptions::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning rate must be finite and >= 0");
  }
  if (!(weight_decay >= 0.0)) throw ValidationError("weight decay must be >= 0");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw ValidationError("AdamW betas must lie in (0, 1)");
  }
  if (!(eps > 0.0)) throw ValidationError("AdamW eps must be positive");
}

template <typename T>
OptimizerState<T> OptimizerState<T>::init(const NamedParameterSet<T>& params,
                                          AdamWOptions options) {
  options.validate();
  OptimizerState state;
  state.options = options;
  for (const auto& [name, t] : params) {
    state.names.push_back(name);
    state.first_moment.emplace_back(static_cast<std::size_t>(t.numel()), T(0));
    state.second_moment.emplace_back(static_cast<std::size_t>(t.numel()), T(0));
  }
  return state;
}

template <typename T>
void adamw_step(NamedParameterSet<T>& params, OptimizerState<T>& state) {
  if (params.size() != state.names.size()) {
    throw ValidationError("adamw_step: parameter set has " + std::to_string(params.size()) +
                          " entries, optimizer state has " +
                          std::to_string(state.names.size()));
  }
  {
    std::size_t i = 0;
    for (const auto& [name, t] : params) {
      if (name != state.names[i] ||
          static_cast<std::size_t>(t.numel()) != state.first_moment[i].size()) {
        throw ValidationError("adamw_step: parameter '" + name +
                              "' does not match optimizer state entry '" + state.names[i] + "'");
      }
      ++i;
    }
  }

  const auto& o = state.options;
  ++state.step_count;
  const double step = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(o.beta1, step);
  const double bc2 = 1.0 - std::pow(o.beta2, step);
  const double decay = 1.0 - o.learning_rate * o.weight_decay;

  std::size_t i = 0;
  for (auto& [name, t] : params) {
    auto theta = t.mutable_data();
    auto grad = t.grad();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double g = grad.empty() ? 0.0 : static_cast<double>(grad[j]);
      const double mj = o.beta1 * m[j] + (1.0 - o.beta1) * g;
      const double vj = o.beta2 * v[j] + (1.0 - o.beta2) * g * g;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      const double update = (mj / bc1) / (std::sqrt(vj / bc2) + o.eps);
      theta[j] = static_cast<T>(static_cast<double>(theta[j]) * decay - o.learning_rate * update);
    }
    ++i;
  }
}

template struct OptimizerState<float>;
template struct OptimizerState<double>;
template void adamw_step(NamedParameterSet<float>&, OptimizerState<float>&);
template void adamw_step(NamedParameterSet<double>&, OptimizerState<double>&);

}  // namespace swinseg
