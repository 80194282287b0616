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

#include "swinseg/flops.hpp"

#include <algorithm>

#include "swinseg/error.hpp"

namespace swinseg {

void ComplexityQuery::validate() const {
  if (h <= 0 || w <= 0 || channels <= 0 || window <= 0) {
    throw ValidationError("complexity query extents must be positive");
  }
}

FlopCount msa_flops(const ComplexityQuery& q) {
  q.validate();
  const FlopCount hw = static_cast<FlopCount>(q.h) * static_cast<FlopCount>(q.w);
  const FlopCount c = static_cast<FlopCount>(q.channels);
  return 4 * hw * c * c + 2 * hw * hw * c;
}

FlopCount wmsa_flops(const ComplexityQuery& q) {
  q.validate();
  const FlopCount hw = static_cast<FlopCount>(q.h) * static_cast<FlopCount>(q.w);
  const FlopCount c = static_cast<FlopCount>(q.channels);
  const FlopCount m2 = static_cast<FlopCount>(q.window) * static_cast<FlopCount>(q.window);
  return 4 * hw * c * c + 2 * m2 * hw * c;
}

std::string to_string(FlopCount value) {
  if (value == 0) return "0";
  std::string digits;
  while (value > 0) {
    digits.push_back(static_cast<char>('0' + static_cast<int>(value % 10)));
    value /= 10;
  }
  std::reverse(digits.begin(), digits.end());
  return digits;
}

}  // namespace swinseg
