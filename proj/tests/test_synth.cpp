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

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "fauxnet/synth.hpp"
#include "test_util.hpp"

using namespace fauxnet;
using namespace fauxnet::synth;

TEST(Synth, ManifestLayout) {
  SynthSpec s;
  s.identities = 5;
  s.videos_per_identity = 7;
  s.chunks_per_video = 2;
  s.techniques = {Technique::LIA, Technique::SadTalker};
  s.dim = 3;
  const auto m = gen_manifest(s);
  ASSERT_EQ(m.size(), 70u);
  EXPECT_EQ(m.entries[0].video_id, "syn-000000-c0");
  EXPECT_EQ(m.entries[1].video_id, "syn-000000-c1");
  EXPECT_EQ(m.entries[1].chunk, 1u);
  std::map<std::string, std::size_t> per_identity;
  std::array<std::size_t, 3> per_class{};
  for (const auto& e : m.entries) {
    if (e.chunk) continue;
    ++per_identity[e.identity_id];
    ++per_class[class_of(s, e)];
    EXPECT_EQ(e.label == 1, e.technique.has_value());
  }
  EXPECT_EQ(per_identity.size(), 5u);
  for (const auto& [id, n] : per_identity) EXPECT_EQ(n, 7u);
  // Every identity sees several classes, so identities carry no label signal.
  for (std::size_t c = 0; c < 3; ++c) EXPECT_GE(per_class[c], 11u);
}

TEST(Synth, DeterministicPerSeed) {
  SynthSpec s;
  s.identities = 8;
  s.seed = 42;
  const auto a = gen_embeddings(s), b = gen_embeddings(s);
  EXPECT_EQ(encode_bank(a.records, a.dim), encode_bank(b.records, b.dim));
  EXPECT_EQ(encode_manifest_jsonl(a.manifest), encode_manifest_jsonl(b.manifest));
  EXPECT_EQ(encode_corpus_jsonl(gen_transcripts(s)), encode_corpus_jsonl(gen_transcripts(s)));
  s.seed = 43;
  EXPECT_NE(encode_bank(gen_embeddings(s).records, a.dim), encode_bank(a.records, a.dim));
}

TEST(Synth, NearestCentroidAtLargeSeparation) {
  SynthSpec s;
  s.separation = 10;
  s.identities = 100;
  s.videos_per_identity = 10;
  s.seed = 5;
  const auto bank = gen_embeddings(s);
  ASSERT_EQ(bank.records.size(), 1000u);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < bank.records.size(); ++i) {
    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t c = 0; c < s.num_classes(); ++c) {
      const auto mu = class_mean(s, c);
      double d = 0;
      for (std::size_t k = 0; k < s.dim; ++k) d += (bank.records[i].embedding[k] - mu[k]) * (bank.records[i].embedding[k] - mu[k]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    ok += best == class_of(s, bank.manifest.entries[i]);
  }
  EXPECT_GT(static_cast<double>(ok) / 1000.0, 0.999);
}

TEST(Synth, EmpiricalMeansWithinFourSigma) {
  SynthSpec s;
  s.separation = 3;
  s.sigma = 2;
  s.identities = 70;
  s.videos_per_identity = 20;
  s.dim = 10;
  s.seed = 6;
  const auto bank = gen_embeddings(s);
  std::vector<std::vector<double>> sum(s.num_classes(), std::vector<double>(s.dim, 0.0));
  std::vector<std::size_t> n(s.num_classes(), 0);
  for (std::size_t i = 0; i < bank.records.size(); ++i) {
    const auto c = class_of(s, bank.manifest.entries[i]);
    ++n[c];
    for (std::size_t k = 0; k < s.dim; ++k) sum[c][k] += bank.records[i].embedding[k];
  }
  for (std::size_t c = 0; c < s.num_classes(); ++c) {
    const auto mu = class_mean(s, c);
    ASSERT_GT(n[c], 0u);
    for (std::size_t k = 0; k < s.dim; ++k)
      EXPECT_NEAR(sum[c][k] / static_cast<double>(n[c]), mu[k], 4 * s.sigma / std::sqrt(static_cast<double>(n[c])));
  }
}

TEST(Synth, CustomMeans) {
  SynthSpec s;
  s.dim = 2;
  s.techniques = {Technique::DreamTalk};
  s.class_means = {{1, 1}, {-1, -1}};
  s.sigma = 1e-9;
  const auto bank = gen_embeddings(s);
  for (const auto& r : bank.records) EXPECT_NEAR(r.embedding[0], r.label ? -1.0 : 1.0, 1e-6);
}

TEST(Synth, ZeroCorruptionCopiesText) {
  SynthSpec s;
  s.identities = 10;
  s.real_rates = {};
  s.fake_rates = {{}};
  for (const auto& p : gen_transcripts(s)) {
    EXPECT_EQ(p.ground_truth, p.vsr_text);
    const auto v = text::metric_vector(text::normalize_text(p.ground_truth), text::normalize_text(p.vsr_text));
    EXPECT_EQ(v[0], 1.0);
    EXPECT_EQ(v[5], 1.0);
  }
}

TEST(Synth, FullDeletionZeroesMetrics) {
  SynthSpec s;
  s.identities = 10;
  s.real_rates = {0, 1, 0};
  s.fake_rates = {{0, 1, 0}};
  for (const auto& p : gen_transcripts(s)) {
    EXPECT_TRUE(p.vsr_text.empty());
    const auto v = text::metric_vector(text::normalize_text(p.ground_truth), text::normalize_text(p.vsr_text));
    for (double x : v.values) EXPECT_EQ(x, 0.0);
  }
}

TEST(Synth, SubstitutionRateMatchesWer) {
  for (double p : {0.05, 0.2, 0.45}) {
    SynthSpec s;
    s.identities = 50;
    s.videos_per_identity = 10;  // 500 pairs
    s.min_words = s.max_words = 30;
    s.real_rates = {p, 0, 0};
    s.fake_rates = {{p, 0, 0}};
    s.seed = 9;
    const auto corpus = gen_transcripts(s);
    ASSERT_EQ(corpus.size(), 500u);
    double total = 0;
    for (const auto& c : corpus) total += text::wer(text::normalize_text(c.ground_truth), text::normalize_text(c.vsr_text));
    const double sd = std::sqrt(p * (1 - p) / 30.0 / 500.0);
    EXPECT_NEAR(total / 500.0, p, 3 * sd) << "p=" << p;
  }
}

TEST(Synth, SubstitutionAlwaysChangesTheWord) {
  Rng rng(1);
  const std::vector<std::string> truth{"w0", "w1", "w49", "w7"};
  for (int i = 0; i < 200; ++i) {
    const auto out = corrupt(truth, {1, 0, 0}, 50, rng);
    ASSERT_EQ(out.size(), truth.size());
    for (std::size_t k = 0; k < truth.size(); ++k) ASSERT_NE(out[k], truth[k]);
  }
}

TEST(Synth, InvalidSpecs) {
  auto bad = [](auto mutate) {
    SynthSpec s;
    mutate(s);
    EXPECT_FAUXNET_ERROR(validate(s), ErrorCode::InvalidSpec);
  };
  bad([](SynthSpec& s) { s.dim = 0; });
  bad([](SynthSpec& s) { s.dim = 5; });  // 7 classes on 5 axes
  bad([](SynthSpec& s) { s.separation = -1; });
  bad([](SynthSpec& s) { s.sigma = 0; });
  bad([](SynthSpec& s) { s.techniques = {}; });
  bad([](SynthSpec& s) { s.techniques = {Technique::LIA, Technique::LIA}; });
  bad([](SynthSpec& s) { s.real_rates.substitute = 1.5; });
  bad([](SynthSpec& s) { s.fake_rates = {{0.7, 0.7, 0}}; });
  bad([](SynthSpec& s) { s.fake_rates = {{}, {}}; });
  bad([](SynthSpec& s) { s.class_means = {{0.0}}; });
  bad([](SynthSpec& s) { s.min_words = 10, s.max_words = 5; });
  SynthSpec small_vocab;
  small_vocab.vocab_size = 49;
  EXPECT_FAUXNET_ERROR(gen_transcripts(small_vocab), ErrorCode::InvalidSpec);
}
