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

// Synthetic embedding banks and transcript corpora with controllable class
// geometry. Class 0 is real; class j+1 is techniques[j]. Each class is an
// isotropic Gaussian N(mu_c, sigma^2 I) with mu_c = s * sigma * e_c unless
// explicit means are supplied. Identities carry no class signal.
//
// Every record draws from its own stream seeded by (seed, record index), so
// output is a pure function of the SynthSpec.

#include <cstdio>
#include <string>
#include <vector>

#include "fauxnet/data_model.hpp"
#include "fauxnet/error.hpp"
#include "fauxnet/rng.hpp"
#include "fauxnet/text_metrics.hpp"

namespace fauxnet::synth {

struct CorruptionRates {
  double substitute = 0.0;
  double remove = 0.0;  // deletion
  double insert = 0.0;

  friend bool operator==(const CorruptionRates&, const CorruptionRates&) = default;
};

struct SynthSpec {
  std::size_t dim = 32;
  std::size_t identities = 60;
  std::size_t videos_per_identity = 14;
  std::size_t chunks_per_video = 1;
  std::vector<Technique> techniques{kAllTechniques.begin(), kAllTechniques.end()};
  double separation = 8.0;  // s, in units of sigma
  double sigma = 1.0;
  std::vector<std::vector<double>> class_means;  // optional override, one per class

  std::size_t vocab_size = 200;
  std::size_t min_words = 15;
  std::size_t max_words = 40;
  CorruptionRates real_rates{0.05, 0.0, 0.0};
  // One entry per technique, or a single entry shared by all.
  std::vector<CorruptionRates> fake_rates{{0.45, 0.05, 0.05}};

  Source source = Source::synthetic;
  std::uint64_t seed = 0;

  std::size_t num_classes() const { return techniques.size() + 1; }
  std::size_t num_videos() const { return identities * videos_per_identity; }
};

inline void check_rates(const CorruptionRates& r) {
  for (double p : {r.substitute, r.remove, r.insert}) {
    require(p >= 0.0 && p <= 1.0, ErrorCode::InvalidSpec, "corruption probabilities must lie in [0,1]");
  }
  require(r.substitute + r.remove <= 1.0 + 1e-12, ErrorCode::InvalidSpec, "substitute + delete rate exceeds 1");
}

inline void validate(const SynthSpec& s) {
  require(s.dim >= 1, ErrorCode::InvalidSpec, "dim must be >= 1");
  require(s.identities >= 1 && s.videos_per_identity >= 1 && s.chunks_per_video >= 1, ErrorCode::InvalidSpec,
          "identities, videos and chunks must be >= 1");
  require(!s.techniques.empty(), ErrorCode::InvalidSpec, "need at least one technique");
  for (std::size_t i = 0; i < s.techniques.size(); ++i)
    for (std::size_t j = i + 1; j < s.techniques.size(); ++j)
      require(s.techniques[i] != s.techniques[j], ErrorCode::InvalidSpec, "duplicate technique");
  require(s.separation >= 0.0 && std::isfinite(s.separation), ErrorCode::InvalidSpec, "separation must be >= 0");
  require(s.sigma > 0.0 && std::isfinite(s.sigma), ErrorCode::InvalidSpec, "sigma must be > 0");
  if (s.class_means.empty()) {
    require(s.dim >= s.num_classes(), ErrorCode::InvalidSpec,
            "dim must be >= number of classes when means are derived from axes");
  } else {
    require(s.class_means.size() == s.num_classes(), ErrorCode::InvalidSpec, "need one mean per class");
    for (const auto& m : s.class_means) require(m.size() == s.dim, ErrorCode::InvalidSpec, "class mean width != dim");
  }
  require(s.min_words >= 1 && s.min_words <= s.max_words, ErrorCode::InvalidSpec, "bad transcript length range");
  check_rates(s.real_rates);
  require(s.fake_rates.size() == 1 || s.fake_rates.size() == s.techniques.size(), ErrorCode::InvalidSpec,
          "fake_rates must have one entry or one per technique");
  for (const auto& r : s.fake_rates) check_rates(r);
}

inline std::vector<double> class_mean(const SynthSpec& s, std::size_t cls) {
  if (!s.class_means.empty()) return s.class_means[cls];
  std::vector<double> mu(s.dim, 0.0);
  mu[cls] = s.separation * s.sigma;
  return mu;
}

inline std::string fmt_id(const char* prefix, std::size_t n, int width) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, n);
  return buf;
}

/// Manifest only (no embeddings). Video i belongs to identity i mod I and
/// class (i / I + i mod I) mod C.
inline Manifest gen_manifest(const SynthSpec& s) {
  validate(s);
  Manifest m;
  const std::size_t I = s.identities;
  for (std::size_t v = 0; v < s.num_videos(); ++v) {
    const std::size_t k = v % I;
    const std::size_t cls = (v / I + k) % s.num_classes();
    for (std::size_t c = 0; c < s.chunks_per_video; ++c) {
      ManifestEntry e;
      e.video_id = fmt_id("syn-", v, 6);
      if (s.chunks_per_video > 1) e.video_id += "-c" + std::to_string(c);
      e.identity_id = fmt_id("id-", k, 4);
      e.label = cls == 0 ? 0 : 1;
      if (cls > 0) e.technique = s.techniques[cls - 1];
      e.chunk = static_cast<std::uint32_t>(c);
      e.source = s.source;
      m.entries.push_back(std::move(e));
    }
  }
  return m;
}

inline std::size_t class_of(const SynthSpec& s, const ManifestEntry& e) {
  if (e.label == 0) return 0;
  for (std::size_t j = 0; j < s.techniques.size(); ++j)
    if (s.techniques[j] == e.technique) return j + 1;
  fail(ErrorCode::InvalidSpec, "entry technique not listed in spec");
}

inline Bank gen_embeddings(const SynthSpec& s) {
  Bank bank;
  bank.manifest = gen_manifest(s);
  bank.dim = static_cast<std::uint32_t>(s.dim);
  std::vector<std::vector<double>> means;
  for (std::size_t c = 0; c < s.num_classes(); ++c) means.push_back(class_mean(s, c));
  bank.records.reserve(bank.manifest.size());
  for (std::size_t i = 0; i < bank.manifest.size(); ++i) {
    const auto& e = bank.manifest.entries[i];
    Rng rng(derive_seed(s.seed, 0xe3b, i));
    EmbeddingRecord r{e.video_id, e.identity_id, e.label, e.technique, e.chunk, {}};
    const auto& mu = means[class_of(s, e)];
    r.embedding.resize(s.dim);
    for (std::size_t d = 0; d < s.dim; ++d) r.embedding[d] = mu[d] + s.sigma * rng.normal();
    bank.records.push_back(std::move(r));
  }
  return bank;
}

inline std::string vocab_word(std::size_t i) { return "w" + std::to_string(i); }

inline std::vector<std::string> corrupt(const std::vector<std::string>& truth, const CorruptionRates& r,
                                        std::size_t vocab, Rng& rng) {
  std::vector<std::string> out;
  out.reserve(truth.size());
  for (const auto& tok : truth) {
    const double u = rng.uniform();
    if (u < r.remove) {
      // dropped
    } else if (u < r.remove + r.substitute) {
      // Uniform over the other vocab - 1 words.
      const std::string cur = tok;
      std::size_t pick = static_cast<std::size_t>(rng.uniform_int(vocab - 1));
      std::string w = vocab_word(pick);
      if (w == cur) w = vocab_word(vocab - 1);
      out.push_back(std::move(w));
    } else {
      out.push_back(tok);
    }
    if (rng.bernoulli(r.insert)) out.push_back(vocab_word(static_cast<std::size_t>(rng.uniform_int(vocab))));
  }
  return out;
}

inline std::string join(const std::vector<std::string>& toks) {
  std::string s;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) s.push_back(' ');
    s += toks[i];
  }
  return s;
}

inline const CorruptionRates& rates_for(const SynthSpec& s, const ManifestEntry& e) {
  if (e.label == 0) return s.real_rates;
  if (s.fake_rates.size() == 1) return s.fake_rates.front();
  return s.fake_rates[class_of(s, e) - 1];
}

/// One (ground truth, VSR text) pair per manifest entry; the ground truth is
/// uniform over the vocabulary and the VSR text is corrupted at the rates of
/// the entry's class.
inline std::vector<text::TranscriptPair> gen_transcripts(const SynthSpec& s, const Manifest& manifest) {
  validate(s);
  require(s.vocab_size >= 50, ErrorCode::InvalidSpec, "vocabulary must have at least 50 words");
  std::vector<text::TranscriptPair> corpus;
  corpus.reserve(manifest.size());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& e = manifest.entries[i];
    Rng rng(derive_seed(s.seed, 0x7e7, i));
    const std::size_t len = s.min_words + static_cast<std::size_t>(rng.uniform_int(s.max_words - s.min_words + 1));
    std::vector<std::string> truth(len);
    for (auto& t : truth) t = vocab_word(static_cast<std::size_t>(rng.uniform_int(s.vocab_size)));
    const auto hyp = corrupt(truth, rates_for(s, e), s.vocab_size, rng);
    corpus.push_back({e.video_id, join(truth), join(hyp)});
  }
  return corpus;
}

inline std::vector<text::TranscriptPair> gen_transcripts(const SynthSpec& s) {
  return gen_transcripts(s, gen_manifest(s));
}

}  // namespace fauxnet::synth
