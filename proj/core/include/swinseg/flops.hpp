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

namespace swinseg {

// 128-bit so that 2 (hw)^2 C cannot overflow for h, w <= 4096.
using FlopCount = unsigned __int128;

struct ComplexityQuery {
  std::int64_t h = 0;  // feature height in patches
  std::int64_t w = 0;  // feature width in patches
  std::int64_t channels = 0;
  std::int64_t window = 0;

  void validate() const;  // all extents positive
};

// Global attention: 4 hw C^2 + 2 (hw)^2 C.
FlopCount msa_flops(const ComplexityQuery& q);
// Window attention: 4 hw C^2 + 2 M^2 hw C.
FlopCount wmsa_flops(const ComplexityQuery& q);

std::string to_string(FlopCount value);

}  // namespace swinseg
