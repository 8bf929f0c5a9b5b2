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

// Transcript similarity metrics and the six-metric majority-vote baseline.
//
// Every metric is mapped to [0,1] with "higher = closer to the reference":
// WER is reported as wer_sim = max(0, 1 - WER).

#include <algorithm>
#include <array>
#include <span>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fauxnet/error.hpp"
#include "json.hpp"

namespace fauxnet::text {

using TokenSeq = std::vector<std::string>;

inline constexpr std::string_view kStripSet = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

/// Lowercase (ASCII), drop punctuation, split on whitespace.
/// Non-ASCII bytes pass through untouched.
inline TokenSeq normalize_text(std::string_view raw) {
  TokenSeq out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
      flush();
    } else if (c < 0x80 && kStripSet.find(ch) != std::string_view::npos) {
      continue;
    } else if (c >= 'A' && c <= 'Z') {
      cur.push_back(static_cast<char>(c - 'A' + 'a'));
    } else {
      cur.push_back(ch);
    }
  }
  flush();
  return out;
}

// ---------------------------------------------------------------------------
// WER

/// Token-level Levenshtein distance, unit costs.
inline std::size_t edit_distance(const TokenSeq& ref, const TokenSeq& hyp) {
  std::vector<std::size_t> prev(hyp.size() + 1), cur(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[hyp.size()];
}

inline double wer(const TokenSeq& ref, const TokenSeq& hyp) {
  require(!ref.empty(), ErrorCode::EmptyReference, "WER needs a non-empty reference");
  return static_cast<double>(edit_distance(ref, hyp)) / static_cast<double>(ref.size());
}

// ---------------------------------------------------------------------------
// n-grams

using NgramCounts = std::unordered_map<std::string, std::size_t>;

inline NgramCounts ngram_counts(const TokenSeq& toks, std::size_t n) {
  NgramCounts counts;
  if (n == 0 || toks.size() < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < n; ++k) {
      if (k) key.push_back('\x1f');
      key += toks[i + k];
    }
    ++counts[key];
  }
  return counts;
}

struct NgramOverlap {
  std::size_t overlap = 0;  // clipped: sum over n-grams of min(hyp count, ref count)
  std::size_t hyp_total = 0;
  std::size_t ref_total = 0;
};

inline NgramOverlap ngram_overlap(const TokenSeq& ref, const TokenSeq& hyp, std::size_t n) {
  NgramOverlap o;
  o.hyp_total = hyp.size() >= n ? hyp.size() - n + 1 : 0;
  o.ref_total = ref.size() >= n ? ref.size() - n + 1 : 0;
  const auto rc = ngram_counts(ref, n);
  for (const auto& [g, c] : ngram_counts(hyp, n)) {
    auto it = rc.find(g);
    if (it != rc.end()) o.overlap += std::min(c, it->second);
  }
  return o;
}

// ---------------------------------------------------------------------------
// BLEU

/// BLEU-4. Unigram precision is unsmoothed; n = 2..4 use (m + 1) / (c + 1).
/// Brevity penalty exp(1 - r/c) when c < r. Empty hypothesis scores 0.
inline double bleu(const TokenSeq& ref, const TokenSeq& hyp) {
  if (hyp.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto o = ngram_overlap(ref, hyp, n);
    double p;
    if (n == 1) {
      if (o.overlap == 0) return 0.0;
      p = static_cast<double>(o.overlap) / static_cast<double>(o.hyp_total);
    } else {
      p = static_cast<double>(o.overlap + 1) / static_cast<double>(o.hyp_total + 1);
    }
    log_sum += std::log(p);
  }
  const double c = static_cast<double>(hyp.size());
  const double r = static_cast<double>(ref.size());
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return bp * std::exp(log_sum / 4.0);
}

// ---------------------------------------------------------------------------
// METEOR (exact unigram matches only)

struct MeteorParams {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;
};

struct Alignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (hyp pos, ref pos), sorted by hyp pos
  std::size_t matches() const { return pairs.size(); }
};

// Chunks: maximal runs of pairs adjacent in both hypothesis and reference.
inline std::size_t count_chunks(const std::vector<std::pair<std::size_t, std::size_t>>& sorted_pairs) {
  if (sorted_pairs.empty()) return 0;
  std::size_t chunks = 1;
  for (std::size_t i = 1; i < sorted_pairs.size(); ++i) {
    const auto [h0, r0] = sorted_pairs[i - 1];
    const auto [h1, r1] = sorted_pairs[i];
    if (!(h1 == h0 + 1 && r1 == r0 + 1)) ++chunks;
  }
  return chunks;
}

/// Maximum exact-match alignment built left to right over the hypothesis.
/// Each hypothesis token takes, in order of preference: the reference slot
/// continuing the current chunk; else the unused occurrence that starts the
/// longest run of further matches; else the leftmost unused occurrence.
/// The match count is always maximal; the chunk count is a greedy upper bound
/// on the minimum (exact whenever the matching is forced, e.g. no repeats).
inline Alignment meteor_align(const TokenSeq& ref, const TokenSeq& hyp) {
  std::unordered_map<std::string, std::vector<std::size_t>> where;
  for (std::size_t r = 0; r < ref.size(); ++r) where[ref[r]].push_back(r);
  std::vector<bool> used(ref.size(), false);
  Alignment al;
  long prev = -1;
  for (std::size_t h = 0; h < hyp.size(); ++h) {
    auto it = where.find(hyp[h]);
    long pick = -1;
    if (it != where.end()) {
      if (prev >= 0) {
        const auto next = static_cast<std::size_t>(prev + 1);
        if (next < ref.size() && !used[next] && ref[next] == hyp[h]) pick = static_cast<long>(next);
      }
      if (pick < 0) {
        std::size_t best_run = 0;
        for (std::size_t r : it->second) {
          if (used[r]) continue;
          std::size_t run = 0;
          while (h + run < hyp.size() && r + run < ref.size() && !used[r + run] && hyp[h + run] == ref[r + run]) ++run;
          if (run > best_run) {
            best_run = run;
            pick = static_cast<long>(r);
          }
        }
      }
    }
    if (pick >= 0) {
      used[static_cast<std::size_t>(pick)] = true;
      al.pairs.emplace_back(h, static_cast<std::size_t>(pick));
    }
    prev = pick;
  }
  return al;
}

/// METEOR from match/chunk counts: F = PR / (aP + (1-a)R),
/// score = F * (1 - gamma * (chunks/m)^beta); 0 when m = 0.
inline double meteor_from_counts(std::size_t matches, std::size_t chunks, std::size_t ref_len, std::size_t hyp_len,
                                 const MeteorParams& mp = {}) {
  if (matches == 0) return 0.0;
  const double m = static_cast<double>(matches);
  const double P = m / static_cast<double>(hyp_len);
  const double R = m / static_cast<double>(ref_len);
  const double f = P * R / (mp.alpha * P + (1.0 - mp.alpha) * R);
  const double penalty = mp.gamma * std::pow(static_cast<double>(chunks) / m, mp.beta);
  return f * (1.0 - penalty);
}

inline double meteor(const TokenSeq& ref, const TokenSeq& hyp, const MeteorParams& mp = {}) {
  const auto al = meteor_align(ref, hyp);
  return meteor_from_counts(al.matches(), count_chunks(al.pairs), ref.size(), hyp.size(), mp);
}

// ---------------------------------------------------------------------------
// ROUGE

inline double f1(double overlap, double hyp_total, double ref_total) {
  if (hyp_total == 0 || ref_total == 0 || overlap == 0) return 0.0;
  const double p = overlap / hyp_total;
  const double r = overlap / ref_total;
  return 2.0 * p * r / (p + r);
}

inline double rouge_n(const TokenSeq& ref, const TokenSeq& hyp, std::size_t n) {
  require(n >= 1, ErrorCode::InvalidConfig, "ROUGE-N needs n >= 1");
  const auto o = ngram_overlap(ref, hyp, n);
  return f1(static_cast<double>(o.overlap), static_cast<double>(o.hyp_total), static_cast<double>(o.ref_total));
}

inline std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline double rouge_l(const TokenSeq& ref, const TokenSeq& hyp) {
  return f1(static_cast<double>(lcs_length(ref, hyp)), static_cast<double>(hyp.size()),
            static_cast<double>(ref.size()));
}

// ---------------------------------------------------------------------------
// Metric vectors, thresholds, vote

inline constexpr std::size_t kNumMetrics = 6;
inline constexpr std::array<std::string_view, kNumMetrics> kMetricNames = {"bleu",   "meteor", "rouge1",
                                                                           "rouge2", "rougeL", "wer_sim"};

struct MetricVector {
  std::array<double, kNumMetrics> values{};  // bleu, meteor, rouge1, rouge2, rougeL, wer_sim

  double mean() const {
    double s = 0;
    for (double v : values) s += v;
    return s / static_cast<double>(kNumMetrics);
  }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  friend bool operator==(const MetricVector&, const MetricVector&) = default;
};

inline MetricVector metric_vector(const TokenSeq& ref, const TokenSeq& hyp) {
  require(!ref.empty(), ErrorCode::EmptyReference, "metric vector needs a non-empty reference");
  MetricVector v;
  v[0] = bleu(ref, hyp);
  v[1] = meteor(ref, hyp);
  v[2] = rouge_n(ref, hyp, 1);
  v[3] = rouge_n(ref, hyp, 2);
  v[4] = rouge_l(ref, hyp);
  v[5] = std::max(0.0, 1.0 - wer(ref, hyp));
  return v;
}

enum class TieRule : std::uint8_t { fake = 0, real = 1 };

/// Per-metric thresholds. Each metric votes "real" iff score >= tau.
struct ThresholdModel {
  std::array<double, kNumMetrics> tau{};
  std::array<double, kNumMetrics> train_accuracy{};
  TieRule tie = TieRule::fake;

  friend bool operator==(const ThresholdModel&, const ThresholdModel&) = default;
};

struct ThresholdFit {
  double tau = 0;
  double accuracy = 0;
};

/// Best threshold for "real iff score >= tau" (label 0 = real, 1 = fake).
/// Candidates: 0, 1 and midpoints between consecutive distinct scores;
/// ties in accuracy resolve to the smallest tau.
inline ThresholdFit fit_threshold(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  std::vector<double> real, fake, all(scores.begin(), scores.end());
  for (std::size_t i = 0; i < scores.size(); ++i) (labels[i] ? fake : real).push_back(scores[i]);
  require(!real.empty() && !fake.empty(), ErrorCode::SingleClass, "threshold fitting needs both classes");
  std::sort(real.begin(), real.end());
  std::sort(fake.begin(), fake.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  std::vector<double> cand{0.0, 1.0};
  for (std::size_t i = 1; i < all.size(); ++i) cand.push_back(0.5 * (all[i - 1] + all[i]));
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  const double n = static_cast<double>(scores.size());
  ThresholdFit best{0.0, -1.0};
  for (double t : cand) {
    const auto real_ge = real.end() - std::lower_bound(real.begin(), real.end(), t);
    const auto fake_lt = std::lower_bound(fake.begin(), fake.end(), t) - fake.begin();
    const double acc = static_cast<double>(real_ge + fake_lt) / n;
    if (acc > best.accuracy) best = {t, acc};
  }
  return best;
}

inline ThresholdModel fit_thresholds(const std::vector<MetricVector>& vectors, const std::vector<std::uint8_t>& labels,
                                     TieRule tie = TieRule::fake) {
  require(vectors.size() == labels.size(), ErrorCode::ShapeMismatch, "vectors/labels length differ");
  ThresholdModel model;
  model.tie = tie;
  std::vector<double> col(vectors.size());
  for (std::size_t m = 0; m < kNumMetrics; ++m) {
    for (std::size_t i = 0; i < vectors.size(); ++i) col[i] = vectors[i][m];
    const auto fit = fit_threshold(col, labels);
    model.tau[m] = fit.tau;
    model.train_accuracy[m] = fit.accuracy;
  }
  return model;
}

inline std::size_t real_votes(const ThresholdModel& model, const MetricVector& v) {
  std::size_t votes = 0;
  for (std::size_t m = 0; m < kNumMetrics; ++m) votes += v[m] >= model.tau[m] ? 1 : 0;
  return votes;
}

/// 1 = fake, 0 = real. A 3-3 split follows the model's tie rule.
inline std::uint8_t majority_vote(const ThresholdModel& model, const MetricVector& v) {
  const std::size_t real = real_votes(model, v);
  if (2 * real == kNumMetrics) return model.tie == TieRule::fake ? 1 : 0;
  return 2 * real > kNumMetrics ? 0 : 1;
}

// Fake-ness score for AUC: one minus the mean normalized similarity.
inline double fake_score(const MetricVector& v) { return 1.0 - v.mean(); }

inline nlohmann::ordered_json to_json(const ThresholdModel& model) {
  nlohmann::ordered_json j;
  for (std::size_t m = 0; m < kNumMetrics; ++m) {
    j[std::string(kMetricNames[m])] = {{"tau", model.tau[m]}, {"polarity", "ge"}};
  }
  return j;
}

inline ThresholdModel threshold_model_from_json(const nlohmann::json& j) {
  ThresholdModel model;
  try {
    for (std::size_t m = 0; m < kNumMetrics; ++m) {
      const auto& e = j.at(std::string(kMetricNames[m]));
      require(e.at("polarity").get<std::string>() == "ge", ErrorCode::ParseError, "unsupported polarity");
      model.tau[m] = e.at("tau").get<double>();
      require(model.tau[m] >= 0.0 && model.tau[m] <= 1.0, ErrorCode::ParseError, "tau outside [0,1]");
    }
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::ParseError, std::string("threshold model: ") + ex.what());
  }
  return model;
}

// ---------------------------------------------------------------------------
// Transcript corpus (JSON lines: video_id, ground_truth, vsr_text)

struct TranscriptPair {
  std::string video_id;
  std::string ground_truth;
  std::string vsr_text;

  friend bool operator==(const TranscriptPair&, const TranscriptPair&) = default;
};

inline std::string encode_corpus_jsonl(const std::vector<TranscriptPair>& corpus) {
  std::string out;
  for (const auto& p : corpus) {
    nlohmann::ordered_json j;
    j["video_id"] = p.video_id;
    j["ground_truth"] = p.ground_truth;
    j["vsr_text"] = p.vsr_text;
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline std::vector<TranscriptPair> decode_corpus_jsonl(std::string_view text) {
  std::vector<TranscriptPair> out;
  std::size_t start = 0, line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("video_id").get<std::string>(), j.at("ground_truth").get<std::string>(),
                     j.at("vsr_text").get<std::string>()});
    } catch (const nlohmann::json::exception& ex) {
      fail(ErrorCode::ParseError, "corpus line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace fauxnet::text
