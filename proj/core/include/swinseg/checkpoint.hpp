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

// Checkpoint file layout:
//
//   "SWSEGCKP"                      8-byte magic
//   {"version":1,"meta":{...},      one-line JSON header, '\n'-terminated
//    "tensors":[{"name","dtype","shape","offset"}...],"blob_bytes":N}
//   blob                            little-endian float32 values; each
//                                   tensor starts at its byte offset
//
// Tensors are written in parameter-set order. Double-precision sets are
// narrowed to float32 on save.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "swinseg/error.hpp"
#include "swinseg/parameters.hpp"

namespace swinseg {

inline constexpr char kCheckpointMagic[] = "SWSEGCKP";

enum class CheckpointErrc {
  io_failure = 1,
  bad_magic,
  malformed_header,
  truncated_blob,
  shape_mismatch,
  unknown_entry,
};

class CheckpointError : public DataError {
 public:
  CheckpointError(CheckpointErrc code, const std::string& what)
      : DataError(what), code_(code) {}
  CheckpointErrc code() const { return code_; }

 private:
  CheckpointErrc code_;
};

template <typename T>
void save_checkpoint(const NamedParameterSet<T>& params, const std::filesystem::path& path,
                     const nlohmann::json& meta = nlohmann::json::object());

// Returns fresh leaf tensors (requires_grad = false). `meta`, when given,
// receives the header's "meta" object.
template <typename T>
NamedParameterSet<T> load_checkpoint(const std::filesystem::path& path,
                                     nlohmann::json* meta = nullptr);

// Copies every entry of `source` into the same-named tensor of `target`.
// Throws CheckpointError(unknown_entry / shape_mismatch) naming the entry.
template <typename T>
void assign_parameters(NamedParameterSet<T>& target, const NamedParameterSet<T>& source);

enum class TransferScope { encoder_only, full };

struct TransferReport {
  std::vector<std::string> loaded;
  std::vector<std::string> skipped;  // present in the pretrained set but out of scope
};

// Overwrites the in-scope parameters of `params` with `pretrained` values.
// Out-of-scope parameters are left untouched.
template <typename T>
TransferReport init_transfer(NamedParameterSet<T>& params, const NamedParameterSet<T>& pretrained,
                             TransferScope scope);

}  // namespace swinseg
