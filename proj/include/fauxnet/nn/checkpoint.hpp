// Copyright 2026 The fauxnet Authors
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

// Checkpoint layout (little-endian):
//
//   "FXCK" | u32 version (=1)
//   u32 metadata count, then (u16 len + key, u16 len + value) pairs
//   u32 section count
//   per section (layer spec table):
//     u16 len + name | u32 layer count
//     per layer: u8 kind | u32 in_dim | u32 out_dim | f64 keep_prob | f64 momentum | f64 epsilon
//   per section, in table order (parameter data):
//     u64 optimizer step
//     per tensor in declaration order: value, first moment, second moment (f64 each)
//     per batchnorm: running mean, running variance (f64 each)

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fauxnet/binary_io.hpp"
#include "fauxnet/error.hpp"
#include "fauxnet/nn/network.hpp"

namespace fauxnet::nn {

inline constexpr std::string_view kCheckpointMagic = "FXCK";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::map<std::string, std::string> metadata;
  std::vector<std::pair<std::string, Network>> sections;

  const Network& section(const std::string& name) const {
    for (const auto& [n, net] : sections)
      if (n == name) return net;
    fail(ErrorCode::ParseError, "checkpoint has no section '" + name + "'");
  }

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline io::Bytes encode_checkpoint(const Checkpoint& ck) {
  io::ByteWriter w;
  w.raw(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(ck.metadata.size()));
  for (const auto& [k, v] : ck.metadata) {
    w.str16(k);
    w.str16(v);
  }
  w.u32(static_cast<std::uint32_t>(ck.sections.size()));
  for (const auto& [name, net] : ck.sections) {
    w.str16(name);
    w.u32(static_cast<std::uint32_t>(net.layers().size()));
    for (const auto& s : net.layers()) {
      w.u8(static_cast<std::uint8_t>(s.kind));
      w.u32(static_cast<std::uint32_t>(s.in_dim));
      w.u32(static_cast<std::uint32_t>(s.out_dim));
      w.f64(s.keep_prob);
      w.f64(s.momentum);
      w.f64(s.epsilon);
    }
  }
  for (const auto& [name, net] : ck.sections) {
    const auto& P = net.params();
    w.u64(P.step);
    for (const auto& t : P.tensors) {
      w.f64s(t.value);
      w.f64s(t.m);
      w.f64s(t.v);
    }
    for (const auto& b : P.buffers) w.f64s(b);
  }
  return std::move(w).bytes();
}

inline Checkpoint decode_checkpoint(std::span<const std::uint8_t> data) {
  if (data.size() < 4 || std::string_view(reinterpret_cast<const char*>(data.data()), 4) != kCheckpointMagic) {
    fail(ErrorCode::BadMagic, "not a checkpoint (missing FXCK magic)");
  }
  io::ByteReader in(data);
  in.raw(4);
  const auto version = in.u32();
  require(version == kCheckpointVersion, ErrorCode::VersionMismatch, "checkpoint version " + std::to_string(version));
  Checkpoint ck;
  const auto n_meta = in.u32();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    auto k = in.str16();
    ck.metadata[k] = in.str16();
  }
  const auto n_sections = in.u32();
  for (std::uint32_t si = 0; si < n_sections; ++si) {
    auto name = in.str16();
    const auto n_layers = in.u32();
    std::vector<LayerSpec> layers;
    for (std::uint32_t li = 0; li < n_layers; ++li) {
      LayerSpec s;
      const auto kind = in.u8();
      require(kind <= 3, ErrorCode::ParseError, "unknown layer kind " + std::to_string(kind));
      s.kind = static_cast<LayerKind>(kind);
      s.in_dim = in.u32();
      s.out_dim = in.u32();
      s.keep_prob = in.f64();
      s.momentum = in.f64();
      s.epsilon = in.f64();
      layers.push_back(s);
    }
    ck.sections.emplace_back(std::move(name), Network(std::move(layers)));
  }
  for (auto& [name, net] : ck.sections) {
    auto& P = net.params();
    P.step = in.u64();
    for (auto& t : P.tensors) {
      for (auto& x : t.value) x = in.f64();
      for (auto& x : t.m) x = in.f64();
      for (auto& x : t.v) x = in.f64();
    }
    for (auto& b : P.buffers) {
      for (auto& x : b) x = in.f64();
    }
  }
  require(in.at_end(), ErrorCode::TrailingBytes, std::to_string(in.remaining()) + " bytes after checkpoint data");
  return ck;
}

}  // namespace fauxnet::nn
