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

#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "swinseg/error.hpp"
#include "swinseg/tensor.hpp"

namespace swinseg {

// Ordered name -> tensor map. Iteration follows insertion order, which is
// also the checkpoint order. Names are dotted paths ("encoder.stage0...").
template <typename T>
class NamedParameterSet {
 public:
  using Entry = std::pair<std::string, Tensor<T>>;

  void add(std::string name, Tensor<T> tensor) {
    if (index_.contains(name)) throw ValidationError("duplicate parameter name: " + name);
    index_.emplace(name, entries_.size());
    entries_.emplace_back(std::move(name), std::move(tensor));
  }

  bool contains(const std::string& name) const { return index_.contains(name); }

  const Tensor<T>& at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ValidationError("unknown parameter: " + name);
    return entries_[it->second].second;
  }
  Tensor<T>& at(const std::string& name) {
    return const_cast<Tensor<T>&>(std::as_const(*this).at(name));
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }

  void zero_grad() {
    for (auto& [name, t] : entries_) t.zero_grad();
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Total scalar count across all entries.
template <typename T>
Index count_params(const NamedParameterSet<T>& params) {
  Index n = 0;
  for (const auto& [name, t] : params) n += t.numel();
  return n;
}

}  // namespace swinseg
