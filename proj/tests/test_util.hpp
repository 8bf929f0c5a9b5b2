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

#include <gtest/gtest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "fauxnet/data_model.hpp"
#include "fauxnet/error.hpp"
#include "fauxnet/rng.hpp"

namespace testutil {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string name = info ? std::string(info->test_suite_name()) + "_" + info->name() : "scratch";
    for (auto& c : name)
      if (c == '/') c = '_';
    path_ = std::filesystem::temp_directory_path() / ("fauxnet_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

// Random well-formed bank: random dims, ids, labels, chunks and values.
inline fauxnet::Bank random_bank(fauxnet::Rng& rng, std::size_t max_records = 12, std::size_t max_dim = 9) {
  using namespace fauxnet;
  Bank b;
  b.dim = static_cast<std::uint32_t>(1 + rng.uniform_int(max_dim));
  const auto n = rng.uniform_int(max_records + 1);
  for (std::uint64_t i = 0; i < n; ++i) {
    EmbeddingRecord r;
    r.video_id = "v" + std::to_string(i) + "_" + std::to_string(rng.uniform_int(1000));
    r.identity_id = "id" + std::to_string(rng.uniform_int(5));
    r.label = rng.bernoulli(0.5) ? 1 : 0;
    if (r.label) r.technique = technique_from_index(rng.uniform_int(kNumTechniques));
    r.chunk_index = static_cast<std::uint32_t>(rng.uniform_int(3));
    r.embedding.resize(b.dim);
    for (auto& v : r.embedding) v = rng.normal() * std::pow(10.0, static_cast<double>(rng.uniform_int(7)) - 3.0);
    b.records.push_back(std::move(r));
  }
  b.manifest = manifest_from_records(b.records, static_cast<Source>(rng.uniform_int(3)));
  return b;
}

}  // namespace testutil

#define EXPECT_FAUXNET_ERROR(stmt, errcode)                                                        \
  do {                                                                                             \
    try {                                                                                          \
      stmt;                                                                                        \
      ADD_FAILURE() << "expected " << fauxnet::to_string(errcode) << ", nothing thrown";           \
    } catch (const fauxnet::Error& e_) {                                                           \
      EXPECT_EQ(e_.code(), errcode) << "got " << fauxnet::to_string(e_.code()) << ": " << e_.what(); \
    }                                                                                              \
  } while (0)
