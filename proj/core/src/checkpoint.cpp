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

#include "swinseg/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "swinseg/model.hpp"

namespace swinseg {
namespace {

constexpr std::size_t kMagicLen = 8;

void put_f32(std::string& out, float v) {
  const auto u = std::bit_cast<std::uint32_t>(v);
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((u >> (8 * b)) & 0xFF));
}

float get_f32(const unsigned char* p) {
  std::uint32_t u = 0;
  for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(p[b]) << (8 * b);
  return std::bit_cast<float>(u);
}

}  // namespace

template <typename T>
void save_checkpoint(const NamedParameterSet<T>& params, const std::filesystem::path& path,
                     const nlohmann::json& meta) {
  nlohmann::json entries = nlohmann::json::array();
  std::string blob;
  for (const auto& [name, t] : params) {
    entries.push_back({{"name", name}, {"dtype", "float32"}, {"shape", t.shape()},
                       {"offset", blob.size()}});
    for (T v : t.data()) put_f32(blob, static_cast<float>(v));
  }
  nlohmann::json header{{"version", 1}, {"meta", meta}, {"tensors", entries},
                        {"blob_bytes", blob.size()}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(CheckpointErrc::io_failure, "cannot write " + path.string());
  out.write(kCheckpointMagic, kMagicLen);
  const std::string text = header.dump();
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.put('\n');
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw CheckpointError(CheckpointErrc::io_failure, "write failed: " + path.string());
}

template <typename T>
NamedParameterSet<T> load_checkpoint(const std::filesystem::path& path, nlohmann::json* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointErrc::io_failure, "cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < kMagicLen || bytes.compare(0, kMagicLen, kCheckpointMagic) != 0) {
    throw CheckpointError(CheckpointErrc::bad_magic, path.string() + ": not a checkpoint file");
  }
  const auto newline = bytes.find('\n', kMagicLen);
  if (newline == std::string::npos) {
    throw CheckpointError(CheckpointErrc::malformed_header,
                          path.string() + ": header is not newline-terminated");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + kMagicLen, bytes.begin() + newline);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(CheckpointErrc::malformed_header, path.string() + ": " + e.what());
  }

  NamedParameterSet<T> params;
  const auto* blob = reinterpret_cast<const unsigned char*>(bytes.data()) + newline + 1;
  const std::size_t blob_size = bytes.size() - newline - 1;
  try {
    if (header.at("version").get<int>() != 1) {
      throw CheckpointError(CheckpointErrc::malformed_header, "unsupported checkpoint version");
    }
    const auto declared = header.at("blob_bytes").get<std::size_t>();
    if (blob_size < declared) {
      throw CheckpointError(CheckpointErrc::truncated_blob,
                            path.string() + ": blob has " + std::to_string(blob_size) +
                                " bytes, header declares " + std::to_string(declared));
    }
    for (const auto& e : header.at("tensors")) {
      const auto name = e.at("name").get<std::string>();
      if (e.at("dtype").get<std::string>() != "float32") {
        throw CheckpointError(CheckpointErrc::malformed_header, "unsupported dtype for " + name);
      }
      const auto shape = e.at("shape").get<Shape>();
      const auto offset = e.at("offset").get<std::size_t>();
      Index n = 0;
      try {
        n = numel(shape);
      } catch (const DimensionError&) {
        throw CheckpointError(CheckpointErrc::malformed_header, "bad shape for " + name);
      }
      const std::size_t end = offset + static_cast<std::size_t>(n) * 4;
      if (end > declared) {
        throw CheckpointError(CheckpointErrc::truncated_blob,
                              "tensor " + name + " extends past the end of the blob");
      }
      std::vector<T> values(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) values[i] = static_cast<T>(get_f32(blob + offset + 4 * i));
      params.add(name, Tensor<T>::from_data(shape, std::move(values)));
    }
    if (meta) *meta = header.value("meta", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(CheckpointErrc::malformed_header, path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw CheckpointError(CheckpointErrc::malformed_header, path.string() + ": " + e.what());
  }
  return params;
}

template <typename T>
void assign_parameters(NamedParameterSet<T>& target, const NamedParameterSet<T>& source) {
  for (const auto& [name, src] : source) {
    if (!target.contains(name)) {
      throw CheckpointError(CheckpointErrc::unknown_entry, "parameter '" + name +
                                                               "' does not exist in the model");
    }
    if (target.at(name).shape() != src.shape()) {
      throw CheckpointError(CheckpointErrc::shape_mismatch,
                            "parameter '" + name + "' has shape " + to_string(src.shape()) +
                                ", model expects " + to_string(target.at(name).shape()));
    }
  }
  for (const auto& [name, src] : source) {
    auto dst = target.at(name).mutable_data();
    std::copy(src.data().begin(), src.data().end(), dst.begin());
  }
}

template <typename T>
TransferReport init_transfer(NamedParameterSet<T>& params, const NamedParameterSet<T>& pretrained,
                             TransferScope scope) {
  TransferReport report;
  NamedParameterSet<T> in_scope;
  for (const auto& [name, t] : pretrained) {
    if (scope == TransferScope::encoder_only && !is_encoder_parameter(name)) {
      report.skipped.push_back(name);
      continue;
    }
    in_scope.add(name, t);
    report.loaded.push_back(name);
  }
  assign_parameters(params, in_scope);
  return report;
}

#define SWINSEG_INSTANTIATE_CKPT(T)                                                           \
  template void save_checkpoint(const NamedParameterSet<T>&, const std::filesystem::path&,    \
                                const nlohmann::json&);                                       \
  template NamedParameterSet<T> load_checkpoint(const std::filesystem::path&, nlohmann::json*); \
  template void assign_parameters(NamedParameterSet<T>&, const NamedParameterSet<T>&);        \
  template TransferReport init_transfer(NamedParameterSet<T>&, const NamedParameterSet<T>&,   \
                                        TransferScope);

SWINSEG_INSTANTIATE_CKPT(float)
SWINSEG_INSTANTIATE_CKPT(double)

}  // namespace swinseg
