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

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fauxnet/binary_io.hpp"
#include "fauxnet/error.hpp"

// RFC 4648 base64 with padding; f64 arrays are encoded little-endian.

namespace fauxnet::b64 {

inline constexpr std::string_view kAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string encode(std::span<const std::uint8_t> in) {
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < in.size(); i += 3) {
    const std::uint32_t v = (in[i] << 16) | (in[i + 1] << 8) | in[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i < in.size()) {
    std::uint32_t v = in[i] << 16;
    if (i + 1 < in.size()) v |= in[i + 1] << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += i + 1 < in.size() ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

inline std::vector<std::uint8_t> decode(std::string_view in) {
  require(in.size() % 4 == 0, ErrorCode::ParseError, "base64 length not a multiple of 4");
  auto val = [](char c) -> int {
    const auto p = kAlphabet.find(c);
    require(p != std::string_view::npos, ErrorCode::ParseError, "invalid base64 character");
    return static_cast<int>(p);
  };
  std::vector<std::uint8_t> out;
  out.reserve(in.size() / 4 * 3);
  for (std::size_t i = 0; i < in.size(); i += 4) {
    const bool pad2 = in[i + 2] == '=';
    const bool pad3 = in[i + 3] == '=';
    require(!pad2 || pad3, ErrorCode::ParseError, "bad base64 padding");
    require(!(pad2 || pad3) || i + 4 == in.size(), ErrorCode::ParseError, "base64 padding before end");
    const std::uint32_t v = (val(in[i]) << 18) | (val(in[i + 1]) << 12) | ((pad2 ? 0 : val(in[i + 2])) << 6) |
                            (pad3 ? 0 : val(in[i + 3]));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (!pad2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (!pad3) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

inline std::string encode_f64(std::span<const double> values) {
  io::ByteWriter w;
  w.f64s(values);
  return encode(w.bytes());
}

inline std::vector<double> decode_f64(std::string_view text) {
  const auto bytes = decode(text);
  require(bytes.size() % 8 == 0, ErrorCode::ParseError, "f64 array byte length not a multiple of 8");
  io::ByteReader r(bytes);
  std::vector<double> out(bytes.size() / 8);
  for (auto& v : out) v = r.f64();
  return out;
}

}  // namespace fauxnet::b64
