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

// Dataset manifest, embedding bank file format and identity-disjoint splits.
//
// Bank layout (little-endian):
//
//   "VSRB" | u32 version (=1) | u32 record count | u32 dimension d
//   per record:
//     u16 len + UTF-8 video_id | u16 len + UTF-8 identity_id
//     u8 label (0 real, 1 fake) | u8 technique (255 = none) | u32 chunk_index
//     d x f64 embedding
//
// The manifest sidecar is JSON lines next to the bank (<bank>.manifest.jsonl).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fauxnet/binary_io.hpp"
#include "fauxnet/error.hpp"
#include "fauxnet/hash.hpp"
#include "fauxnet/rng.hpp"
#include "json.hpp"

namespace fauxnet {

enum class Technique : std::uint8_t { LIA = 0, PiRenderer, StyleTalk, SadTalker, DreamTalk, Wav2Lip };

inline constexpr std::size_t kNumTechniques = 6;
inline constexpr std::uint8_t kNoTechnique = 255;

inline constexpr std::array<std::string_view, kNumTechniques> kTechniqueNames = {
    "LIA", "PiRenderer", "StyleTalk", "SadTalker", "DreamTalk", "Wav2Lip"};

inline constexpr std::array<Technique, kNumTechniques> kAllTechniques = {
    Technique::LIA,       Technique::PiRenderer, Technique::StyleTalk,
    Technique::SadTalker, Technique::DreamTalk,  Technique::Wav2Lip};

constexpr std::size_t index_of(Technique t) { return static_cast<std::size_t>(t); }

constexpr std::string_view to_string(Technique t) { return kTechniqueNames[index_of(t)]; }

inline Technique technique_from_index(std::size_t i) {
  require(i < kNumTechniques, ErrorCode::UnknownTechnique, "technique index " + std::to_string(i));
  return static_cast<Technique>(i);
}

inline Technique parse_technique(std::string_view name) {
  for (std::size_t i = 0; i < kNumTechniques; ++i) {
    if (kTechniqueNames[i] == name) return static_cast<Technique>(i);
  }
  fail(ErrorCode::UnknownTechnique, std::string(name));
}

enum class Source : std::uint8_t { vox, hdtf, synthetic };

constexpr std::string_view to_string(Source s) {
  switch (s) {
    case Source::vox: return "vox";
    case Source::hdtf: return "hdtf";
    case Source::synthetic: return "synthetic";
  }
  return "?";
}

inline Source parse_source(std::string_view s) {
  if (s == "vox") return Source::vox;
  if (s == "hdtf") return Source::hdtf;
  if (s == "synthetic") return Source::synthetic;
  fail(ErrorCode::ParseError, "unknown source tag '" + std::string(s) + "'");
}

struct EmbeddingRecord {
  std::string video_id;
  std::string identity_id;
  std::uint8_t label = 0;  // 0 real, 1 fake
  std::optional<Technique> technique;
  std::uint32_t chunk_index = 0;
  std::vector<double> embedding;

  bool is_fake() const { return label == 1; }
  friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

struct ManifestEntry {
  std::string video_id;
  std::string identity_id;
  std::uint8_t label = 0;
  std::optional<Technique> technique;
  std::uint32_t chunk = 0;
  Source source = Source::synthetic;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  // Enumeration table: technique byte i in the bank names techniques[i].
  std::vector<std::string> techniques{kTechniqueNames.begin(), kTechniqueNames.end()};

  std::size_t size() const { return entries.size(); }
  friend bool operator==(const Manifest&, const Manifest&) = default;
};

struct Bank {
  std::uint32_t dim = 0;
  Manifest manifest;
  std::vector<EmbeddingRecord> records;

  friend bool operator==(const Bank&, const Bank&) = default;
};

inline void validate_record(const EmbeddingRecord& r, std::size_t dim) {
  require(r.label <= 1, ErrorCode::InvariantViolation, r.video_id + ": label must be 0 or 1");
  require(r.is_fake() == r.technique.has_value(), ErrorCode::InvariantViolation,
          r.video_id + ": technique label must be present iff the record is fake");
  require(r.embedding.size() == dim, ErrorCode::DimensionMismatch,
          r.video_id + ": embedding has " + std::to_string(r.embedding.size()) +
              " values, expected " + std::to_string(dim));
  for (double v : r.embedding) {
    require(std::isfinite(v), ErrorCode::NonFiniteValue, r.video_id + ": non-finite embedding value");
  }
}

inline ManifestEntry entry_for(const EmbeddingRecord& r, Source source) {
  return {r.video_id, r.identity_id, r.label, r.technique, r.chunk_index, source};
}

inline Manifest manifest_from_records(const std::vector<EmbeddingRecord>& records, Source source) {
  Manifest m;
  m.entries.reserve(records.size());
  for (const auto& r : records) m.entries.push_back(entry_for(r, source));
  return m;
}

inline void validate_manifest(const Manifest& m) {
  std::unordered_set<std::string> seen;
  for (const auto& e : m.entries) {
    require(seen.insert(e.video_id).second, ErrorCode::InvariantViolation,
            "duplicate video_id " + e.video_id);
    require(e.label <= 1 && (e.label == 1) == e.technique.has_value(), ErrorCode::InvariantViolation,
            e.video_id + ": label/technique mismatch");
    if (e.technique) {
      require(index_of(*e.technique) < m.techniques.size(), ErrorCode::UnknownTechnique,
              e.video_id + ": technique not in enumeration table");
    }
  }
}

// Records and manifest must describe the same videos in the same order.
inline void check_consistent(const Manifest& m, const std::vector<EmbeddingRecord>& records) {
  require(m.entries.size() == records.size(), ErrorCode::ManifestMismatch,
          "manifest has " + std::to_string(m.entries.size()) + " entries, bank has " +
              std::to_string(records.size()) + " records");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& e = m.entries[i];
    const auto& r = records[i];
    require(e.video_id == r.video_id && e.identity_id == r.identity_id && e.label == r.label &&
                e.technique == r.technique && e.chunk == r.chunk_index,
            ErrorCode::ManifestMismatch, "manifest entry " + std::to_string(i) + " (" + e.video_id +
                                             ") disagrees with bank record " + r.video_id);
  }
}

// ---------------------------------------------------------------------------
// Bank encoding

inline constexpr std::string_view kBankMagic = "VSRB";
inline constexpr std::uint32_t kBankVersion = 1;
inline constexpr std::size_t kBankHeaderSize = 16;

inline io::Bytes encode_bank(const std::vector<EmbeddingRecord>& records, std::uint32_t dim) {
  io::ByteWriter w;
  w.raw(kBankMagic);
  w.u32(kBankVersion);
  w.u32(static_cast<std::uint32_t>(records.size()));
  w.u32(dim);
  for (const auto& r : records) {
    validate_record(r, dim);
    w.str16(r.video_id);
    w.str16(r.identity_id);
    w.u8(r.label);
    w.u8(r.technique ? static_cast<std::uint8_t>(*r.technique) : kNoTechnique);
    w.u32(r.chunk_index);
    w.f64s(r.embedding);
  }
  return std::move(w).bytes();
}

struct DecodedBank {
  std::uint32_t dim = 0;
  std::vector<EmbeddingRecord> records;
};

inline DecodedBank decode_bank(std::span<const std::uint8_t> data) {
  if (data.size() < kBankMagic.size() ||
      std::string_view(reinterpret_cast<const char*>(data.data()), kBankMagic.size()) != kBankMagic) {
    fail(ErrorCode::BadMagic, "not an embedding bank (missing VSRB magic)");
  }
  io::ByteReader in(data);
  in.raw(kBankMagic.size());
  const std::uint32_t version = in.u32();
  require(version == kBankVersion, ErrorCode::VersionMismatch,
          "bank version " + std::to_string(version) + ", expected " + std::to_string(kBankVersion));
  const std::uint32_t count = in.u32();
  const std::uint32_t dim = in.u32();
  const std::size_t row_bytes = std::size_t{dim} * 8;

  DecodedBank out;
  out.dim = dim;
  out.records.reserve(std::min<std::size_t>(count, data.size() / (row_bytes + 10) + 1));
  for (std::uint32_t i = 0; i < count; ++i) {
    EmbeddingRecord r;
    r.video_id = in.str16();
    r.identity_id = in.str16();
    r.label = in.u8();
    const std::uint8_t tech = in.u8();
    r.chunk_index = in.u32();
    require(r.label <= 1, ErrorCode::InvariantViolation,
            "record " + std::to_string(i) + ": label byte " + std::to_string(r.label));
    if (tech != kNoTechnique) {
      require(tech < kNumTechniques, ErrorCode::UnknownTechnique,
              "record " + std::to_string(i) + ": technique byte " + std::to_string(tech));
      r.technique = static_cast<Technique>(tech);
    }
    if (in.remaining() < row_bytes) {
      // A final row cut short on a value boundary is a row of the wrong length.
      if (i + 1 == count && in.remaining() % 8 == 0) {
        fail(ErrorCode::DimensionMismatch, "record " + std::to_string(i) + " has " +
                                               std::to_string(in.remaining() / 8) + " values, header says " +
                                               std::to_string(dim));
      }
      fail(ErrorCode::TruncatedFile, "record " + std::to_string(i) + " payload cut short");
    }
    r.embedding.resize(dim);
    for (auto& v : r.embedding) v = in.f64();
    validate_record(r, dim);
    out.records.push_back(std::move(r));
  }
  if (!in.at_end()) {
    const std::size_t extra = in.remaining();
    // Fewer bytes than a minimal record, in whole f64s: the last row was too long.
    if (count > 0 && extra % 8 == 0 && extra < row_bytes + 10) {
      fail(ErrorCode::DimensionMismatch, "last record carries " + std::to_string(extra / 8) +
                                             " values beyond dimension " + std::to_string(dim));
    }
    fail(ErrorCode::TrailingBytes, std::to_string(extra) + " bytes after the last record");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifest JSON lines

inline nlohmann::ordered_json manifest_entry_json(const ManifestEntry& e) {
  nlohmann::ordered_json j;
  j["video_id"] = e.video_id;
  j["identity_id"] = e.identity_id;
  j["label"] = e.label;
  j["technique"] = e.technique ? nlohmann::ordered_json(std::string(to_string(*e.technique))) : nullptr;
  j["chunk"] = e.chunk;
  j["source"] = std::string(to_string(e.source));
  return j;
}

inline std::string encode_manifest_jsonl(const Manifest& m) {
  std::string out;
  for (const auto& e : m.entries) {
    out += manifest_entry_json(e).dump();
    out += '\n';
  }
  return out;
}

inline Manifest decode_manifest_jsonl(std::string_view text) {
  Manifest m;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ManifestEntry e;
      e.video_id = j.at("video_id").get<std::string>();
      e.identity_id = j.at("identity_id").get<std::string>();
      e.label = j.at("label").get<std::uint8_t>();
      if (!j.at("technique").is_null()) e.technique = parse_technique(j.at("technique").get<std::string>());
      e.chunk = j.at("chunk").get<std::uint32_t>();
      e.source = parse_source(j.at("source").get<std::string>());
      m.entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      fail(ErrorCode::ParseError, "manifest line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  validate_manifest(m);
  return m;
}

inline std::filesystem::path manifest_sidecar_path(const std::filesystem::path& bank_path) {
  return std::filesystem::path(bank_path.string() + ".manifest.jsonl");
}

/// Writes the bank and its manifest sidecar. Records are written in input order.
inline void write_embedding_bank(const Bank& bank, const std::filesystem::path& path) {
  validate_manifest(bank.manifest);
  check_consistent(bank.manifest, bank.records);
  io::write_file(path, encode_bank(bank.records, bank.dim));
  io::write_text(manifest_sidecar_path(path), encode_manifest_jsonl(bank.manifest));
}

inline void write_embedding_bank(const Manifest& manifest, const std::vector<EmbeddingRecord>& records,
                                 std::uint32_t dim, const std::filesystem::path& path) {
  write_embedding_bank(Bank{dim, manifest, records}, path);
}

/// Reads a bank. When the sidecar manifest exists it is loaded and cross-checked,
/// otherwise a manifest is derived from the records with `fallback_source`.
inline Bank read_embedding_bank(const std::filesystem::path& path, Source fallback_source = Source::synthetic) {
  const auto bytes = io::read_file(path);
  auto decoded = decode_bank(bytes);
  Bank bank;
  bank.dim = decoded.dim;
  bank.records = std::move(decoded.records);
  const auto sidecar = manifest_sidecar_path(path);
  if (std::filesystem::exists(sidecar)) {
    bank.manifest = decode_manifest_jsonl(io::read_text(sidecar));
    check_consistent(bank.manifest, bank.records);
  } else {
    bank.manifest = manifest_from_records(bank.records, fallback_source);
    validate_manifest(bank.manifest);
  }
  return bank;
}

// ---------------------------------------------------------------------------
// Splits

enum class Split : std::uint8_t { train = 0, val = 1, test = 2, excluded = 3 };

constexpr std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    case Split::excluded: return "excluded";
  }
  return "?";
}

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  if (s == "excluded") return Split::excluded;
  fail(ErrorCode::ParseError, "unknown split '" + std::string(s) + "'");
}

using SplitRatios = std::array<double, 3>;

inline constexpr SplitRatios kVoxRatios = {0.8, 0.1, 0.1};
inline constexpr SplitRatios kHdtfRatios = {0.7, 0.1, 0.2};

/// Partition of a manifest; `of[i]` is the split of manifest entry i.
struct SplitAssignment {
  std::vector<std::string> video_ids;
  std::vector<Split> of;
  SplitRatios ratios{};
  std::uint64_t seed = 0;

  std::size_t size() const { return of.size(); }

  std::size_t count(Split s) const { return static_cast<std::size_t>(std::count(of.begin(), of.end(), s)); }

  // Stable identifier for report metadata.
  std::string id() const {
    std::uint64_t h = fnv1a64("split");
    for (std::size_t i = 0; i < of.size(); ++i) {
      h = fnv1a64(video_ids[i], h);
      h = fnv1a64(to_string(of[i]), h);
    }
    return hex64(h);
  }

  friend bool operator==(const SplitAssignment&, const SplitAssignment&) = default;
};

inline void validate_ratios(const SplitRatios& r) {
  for (double x : r) {
    require(std::isfinite(x) && x > 0.0, ErrorCode::InvalidRatios, "split ratios must be positive");
  }
  require(std::abs(r[0] + r[1] + r[2] - 1.0) <= 1e-9, ErrorCode::InvalidRatios, "split ratios must sum to 1");
}

/// Identity-disjoint split. Identities (in first-appearance order) are shuffled
/// by `seed`, then each identity block goes to the split whose video quota is
/// least filled, measured as unfilled fraction of its target; ties go to the
/// earlier split. Videos are counted as chunk-0 entries.
inline SplitAssignment make_splits(const Manifest& manifest, const SplitRatios& ratios, std::uint64_t seed) {
  validate_ratios(ratios);
  require(!manifest.entries.empty(), ErrorCode::TooFewIdentities, "empty manifest");

  std::vector<std::string> identities;
  std::unordered_map<std::string, std::size_t> identity_index;
  std::vector<std::size_t> videos_per_identity;
  std::vector<std::size_t> identity_of(manifest.size());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& e = manifest.entries[i];
    auto [it, inserted] = identity_index.try_emplace(e.identity_id, identities.size());
    if (inserted) {
      identities.push_back(e.identity_id);
      videos_per_identity.push_back(0);
    }
    identity_of[i] = it->second;
    if (e.chunk == 0) ++videos_per_identity[it->second];
  }
  require(identities.size() >= 3, ErrorCode::TooFewIdentities,
          "need at least 3 identities, have " + std::to_string(identities.size()));

  std::vector<std::size_t> order(identities.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, 0x5b117));
  rng.shuffle(std::span(order));

  double total_videos = 0;
  for (auto n : videos_per_identity) total_videos += static_cast<double>(n);
  std::array<double, 3> target{};
  for (int s = 0; s < 3; ++s) target[s] = ratios[s] * total_videos;

  std::array<double, 3> filled{};
  std::vector<Split> identity_split(identities.size(), Split::train);
  for (std::size_t id : order) {
    int best = 0;
    double best_deficit = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < 3; ++s) {
      const double deficit = target[s] > 0 ? (target[s] - filled[s]) / target[s] : 0.0;
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best = s;
      }
    }
    identity_split[id] = static_cast<Split>(best);
    filled[best] += static_cast<double>(videos_per_identity[id]);
  }

  SplitAssignment out;
  out.ratios = ratios;
  out.seed = seed;
  out.video_ids.reserve(manifest.size());
  out.of.reserve(manifest.size());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    out.video_ids.push_back(manifest.entries[i].video_id);
    out.of.push_back(identity_split[identity_of[i]]);
  }
  return out;
}

/// Train/val keep real records plus fakes of `technique`; other fakes are
/// excluded there. The test portion is left untouched.
inline SplitAssignment one_vs_all_subset(const SplitAssignment& split, const Manifest& manifest,
                                         Technique technique) {
  require(index_of(technique) < manifest.techniques.size(), ErrorCode::UnknownTechnique,
          std::string(to_string(technique)));
  require(split.size() == manifest.size(), ErrorCode::ManifestMismatch, "split/manifest size differ");
  SplitAssignment out = split;
  std::size_t train_fakes = 0;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& e = manifest.entries[i];
    if (out.of[i] != Split::train && out.of[i] != Split::val) continue;
    if (e.label == 1 && e.technique != technique) {
      out.of[i] = Split::excluded;
    } else if (e.label == 1 && out.of[i] == Split::train) {
      ++train_fakes;
    }
  }
  require(train_fakes > 0, ErrorCode::EmptyTrainClass,
          "no " + std::string(to_string(technique)) + " fakes in the train split");
  return out;
}

/// Manifest indices in split `which`. The test split keeps only chunk 0 of
/// each video unless `all_chunks` is set; train/val always use every chunk.
inline std::vector<std::size_t> select(const SplitAssignment& split, const Manifest& manifest, Split which,
                                       bool all_chunks = false) {
  require(split.size() == manifest.size(), ErrorCode::ManifestMismatch, "split/manifest size differ");
  const bool first_chunk_only = which == Split::test && !all_chunks;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split.of[i] != which) continue;
    if (first_chunk_only && manifest.entries[i].chunk != 0) continue;
    idx.push_back(i);
  }
  return idx;
}

inline nlohmann::ordered_json split_to_json(const SplitAssignment& s) {
  nlohmann::ordered_json j;
  j["seed"] = s.seed;
  j["ratios"] = {s.ratios[0], s.ratios[1], s.ratios[2]};
  j["split_id"] = s.id();
  auto& arr = j["assignments"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    arr.push_back({{"video_id", s.video_ids[i]}, {"split", std::string(to_string(s.of[i]))}});
  }
  return j;
}

/// Parses a split file and aligns it to `manifest` order.
inline SplitAssignment split_from_json(const nlohmann::json& j, const Manifest& manifest) {
  SplitAssignment s;
  try {
    s.seed = j.at("seed").get<std::uint64_t>();
    const auto& r = j.at("ratios");
    s.ratios = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()};
    std::unordered_map<std::string, Split> by_id;
    for (const auto& a : j.at("assignments")) {
      by_id[a.at("video_id").get<std::string>()] = parse_split(a.at("split").get<std::string>());
    }
    require(by_id.size() == manifest.size(), ErrorCode::ManifestMismatch,
            "split file covers " + std::to_string(by_id.size()) + " videos, manifest has " +
                std::to_string(manifest.size()));
    for (const auto& e : manifest.entries) {
      auto it = by_id.find(e.video_id);
      require(it != by_id.end(), ErrorCode::ManifestMismatch, "video " + e.video_id + " missing from split file");
      s.video_ids.push_back(e.video_id);
      s.of.push_back(it->second);
    }
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::ParseError, std::string("split file: ") + ex.what());
  }
  return s;
}

}  // namespace fauxnet
