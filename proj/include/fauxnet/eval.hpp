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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "fauxnet/data_model.hpp"
#include "fauxnet/error.hpp"
#include "fauxnet/fauxnet.hpp"
#include "fauxnet/text_metrics.hpp"
#include "nlohmann/json.hpp"

namespace fauxnet {

inline constexpr std::string_view kToolkitVersion = "1.0.0";

// ---------------------------------------------------------------------------
// ROC AUC

inline void require_binary_labels(std::span<const std::uint8_t> labels) {
  for (auto l : labels) require(l <= 1, ErrorCode::LabelOutOfRange, "binary label must be 0 or 1");
}

/// Mann-Whitney AUC with average ranks; label 1 is the positive (fake) class
/// and higher scores mean "more fake". Ranks are kept doubled so the whole
/// computation is integer until the final division, which makes the result
/// bit-identical to pairwise counting (2*wins + ties) / (2 * n+ * n-).
inline double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  require(scores.size() == labels.size(), ErrorCode::ShapeMismatch, "scores/labels length differ");
  require_binary_labels(labels);
  for (double s : scores) require(!std::isnan(s), ErrorCode::NonFiniteValue, "NaN score");
  std::uint64_t n_pos = 0;
  for (auto l : labels) n_pos += l;
  const std::uint64_t n_neg = labels.size() - n_pos;
  require(n_pos > 0 && n_neg > 0, ErrorCode::SingleClass, "AUC needs both classes");

  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  std::uint64_t rank_sum_x2 = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    // 1-based ranks i+1..j share the average (i+1+j)/2.
    const std::uint64_t avg_x2 = i + 1 + j;
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]]) rank_sum_x2 += avg_x2;
    i = j;
  }
  const std::uint64_t u_x2 = rank_sum_x2 - n_pos * (n_pos + 1);
  return static_cast<double>(u_x2) / static_cast<double>(2 * n_pos * n_neg);
}

// ---------------------------------------------------------------------------
// Confusion matrices

struct Confusion {
  std::vector<std::vector<std::size_t>> counts;  // counts[true][pred]
  std::size_t total = 0;
  std::size_t correct = 0;

  std::size_t classes() const { return counts.size(); }
  double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
  std::size_t row_sum(std::size_t i) const {
    std::size_t s = 0;
    for (auto c : counts[i]) s += c;
    return s;
  }
};

inline Confusion confusion(std::span<const std::size_t> predicted, std::span<const std::size_t> truth,
                           std::size_t classes) {
  require(predicted.size() == truth.size(), ErrorCode::ShapeMismatch, "prediction/truth length differ");
  require(classes >= 1, ErrorCode::InvalidConfig, "confusion needs at least one class");
  Confusion c;
  c.counts.assign(classes, std::vector<std::size_t>(classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    require(truth[i] < classes && predicted[i] < classes, ErrorCode::LabelOutOfRange,
            "label " + std::to_string(std::max(truth[i], predicted[i])) + " outside " + std::to_string(classes) +
                " classes");
    ++c.counts[truth[i]][predicted[i]];
    c.correct += truth[i] == predicted[i] ? 1 : 0;
  }
  c.total = truth.size();
  return c;
}

inline nlohmann::ordered_json to_json(const Confusion& c) { return c.counts; }

// ---------------------------------------------------------------------------
// Kernel density estimation

struct KdeCurve {
  std::string metric;
  std::string class_label;
  double bandwidth = 0;
  std::vector<double> x;
  std::vector<double> density;

  /// Trapezoid integral over the grid.
  double mass() const {
    double m = 0;
    for (std::size_t i = 1; i < x.size(); ++i) m += 0.5 * (density[i] + density[i - 1]) * (x[i] - x[i - 1]);
    return m;
  }
};

inline constexpr std::size_t kKdeGridPoints = 256;
inline constexpr double kKdeSpikeBandwidth = 1e-3;

/// Linear-interpolation quantile of sorted data (Hyndman-Fan type 7).
inline double quantile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Silverman's rule 0.9 * min(sd, IQR/1.34) * n^(-1/5) with the sample
/// standard deviation. A zero IQR falls back to sd alone; zero spread uses
/// a fixed spike bandwidth.
inline double silverman_bandwidth(std::span<const double> samples) {
  require(samples.size() >= 2, ErrorCode::TooFewSamples, "KDE needs at least 2 samples");
  const double n = static_cast<double>(samples.size());
  double mean = 0;
  for (double v : samples) mean += v;
  mean /= n;
  double ss = 0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1));
  if (sd == 0.0) return kKdeSpikeBandwidth;
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double spread = iqr > 0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(n, -0.2);
}

inline KdeCurve kde_curve(std::span<const double> samples, std::string metric = {}, std::string class_label = {}) {
  require(samples.size() >= 2, ErrorCode::TooFewSamples, "KDE needs at least 2 samples");
  for (double v : samples) require(std::isfinite(v), ErrorCode::NonFiniteValue, "non-finite KDE sample");
  KdeCurve k;
  k.metric = std::move(metric);
  k.class_label = std::move(class_label);
  const double h = silverman_bandwidth(samples);
  k.bandwidth = h;
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *mn - 3 * h;
  const double hi = *mx + 3 * h;
  const double norm = 1.0 / (static_cast<double>(samples.size()) * h * std::sqrt(2 * std::numbers::pi));
  k.x.resize(kKdeGridPoints);
  k.density.resize(kKdeGridPoints);
  for (std::size_t g = 0; g < kKdeGridPoints; ++g) {
    const double x = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(kKdeGridPoints - 1);
    double acc = 0;
    for (double s : samples) {
      const double u = (x - s) / h;
      acc += std::exp(-0.5 * u * u);
    }
    k.x[g] = x;
    k.density[g] = acc * norm;
  }
  return k;
}

inline std::string kde_csv(const std::vector<KdeCurve>& curves) {
  std::ostringstream os;
  os << "metric,class,x,density\n";
  char buf[96];
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", c.x[i], c.density[i]);
      os << c.metric << ',' << c.class_label << buf;
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Reports

struct RunMetadata {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string split_id;
  std::string version{kToolkitVersion};
};

inline nlohmann::ordered_json to_json(const RunMetadata& m) {
  return {{"seed", m.seed}, {"config_hash", m.config_hash}, {"split_id", m.split_id}, {"version", m.version}};
}

struct EvalReport {
  std::size_t n_real = 0;
  std::size_t n_fake = 0;
  double detection_accuracy = 0;
  double detection_auc = 0;
  double attribution_accuracy = 0;  // fakes only
  Confusion detection;              // 2x2, 0 real / 1 fake
  Confusion attribution;            // CxC over fake samples
  // Share of each technique's test fakes flagged fake; empty when absent.
  std::vector<std::optional<double>> per_technique_detection;
  RunMetadata meta;
};

/// Scores a batch of predictions against labels. Detection uses p_fake > 0.5;
/// attribution is restricted to samples whose true label is fake.
inline EvalReport evaluate_predictions(const std::vector<Prediction>& preds, const std::vector<SampleLabel>& truth,
                                       std::size_t num_classes) {
  require(preds.size() == truth.size(), ErrorCode::ShapeMismatch, "prediction/label count differ");
  std::vector<double> scores;
  std::vector<std::uint8_t> y;
  std::vector<std::size_t> det_pred, det_true, tech_pred, tech_true;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    scores.push_back(preds[i].p_fake);
    y.push_back(truth[i].y_dd);
    det_pred.push_back(preds[i].p_fake > 0.5 ? 1 : 0);
    det_true.push_back(truth[i].y_dd);
    if (truth[i].y_dd == 1) {
      require(truth[i].y_dt.has_value(), ErrorCode::MissingTechniqueLabel, "fake test sample without technique");
      tech_true.push_back(*truth[i].y_dt);
      tech_pred.push_back(argmax(preds[i].technique_probs));
    }
  }
  EvalReport r;
  r.detection = confusion(det_pred, det_true, 2);
  r.detection_accuracy = r.detection.accuracy();
  r.detection_auc = auc(scores, y);
  r.n_real = r.detection.row_sum(0);
  r.n_fake = r.detection.row_sum(1);
  r.attribution = confusion(tech_pred, tech_true, num_classes);
  r.attribution_accuracy = r.attribution.accuracy();
  r.per_technique_detection.assign(num_classes, std::nullopt);
  std::vector<std::size_t> hit(num_classes, 0), seen(num_classes, 0);
  std::size_t f = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (truth[i].y_dd != 1) continue;
    const auto t = tech_true[f++];
    ++seen[t];
    hit[t] += det_pred[i];
  }
  for (std::size_t t = 0; t < num_classes; ++t)
    if (seen[t]) r.per_technique_detection[t] = static_cast<double>(hit[t]) / static_cast<double>(seen[t]);
  return r;
}

/// Video-level evaluation: chunk 0 of every test video.
inline EvalReport evaluate_fauxnet(const FauxNetParams& params, const Bank& bank, const SplitAssignment& split,
                                   RunMetadata meta = {}) {
  const auto idx = select(split, bank.manifest, Split::test);
  require(!idx.empty(), ErrorCode::DegenerateSplit, "test split is empty");
  const Dataset ds = make_dataset(bank, idx);
  auto res = predict(params, ds.features);
  auto rep = evaluate_predictions(res.predictions, ds.labels, params.num_classes());
  if (meta.split_id.empty()) meta.split_id = split.id();
  rep.meta = std::move(meta);
  return rep;
}

inline nlohmann::ordered_json to_json(const EvalReport& r, const Manifest* manifest = nullptr) {
  nlohmann::ordered_json j;
  j["metadata"] = to_json(r.meta);
  j["n_real"] = r.n_real;
  j["n_fake"] = r.n_fake;
  j["detection_accuracy"] = r.detection_accuracy;
  j["detection_auc"] = r.detection_auc;
  j["attribution_accuracy"] = r.attribution_accuracy;
  j["detection_confusion"] = to_json(r.detection);
  j["attribution_confusion"] = to_json(r.attribution);
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (std::size_t t = 0; t < r.per_technique_detection.size(); ++t) {
    const std::string name = manifest && t < manifest->techniques.size() ? manifest->techniques[t]
                             : t < kNumTechniques                         ? std::string(kTechniqueNames[t])
                                                                          : std::to_string(t);
    if (r.per_technique_detection[t]) per[name] = *r.per_technique_detection[t];
    else per[name] = nullptr;
  }
  j["per_technique_detection_accuracy"] = per;
  return j;
}

// ---------------------------------------------------------------------------
// One-vs-all protocol: train on real + one technique, test on everything.

struct OneVsAllRow {
  Technique train_technique{};
  double accuracy = 0;
  double auc = 0;
  std::vector<Technique> test_techniques;  // techniques present among test fakes
  EvalReport report;

  std::string label() const { return "Real & " + std::string(to_string(train_technique)); }
};

struct OneVsAllTable {
  std::vector<OneVsAllRow> rows;
  double mean_accuracy = 0;
  double mean_auc = 0;
};

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string one_vs_all_csv(const OneVsAllTable& t) {
  std::string out = "Train Set,Acc.%,AUC\n";
  for (const auto& r : t.rows) out += r.label() + "," + format_fixed(100 * r.accuracy, 2) + "," + format_fixed(r.auc, 4) + "\n";
  out += "Averaged," + format_fixed(100 * t.mean_accuracy, 2) + "," + format_fixed(t.mean_auc, 4) + "\n";
  return out;
}

inline nlohmann::ordered_json to_json(const OneVsAllTable& t) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : t.rows) {
    nlohmann::ordered_json tt = nlohmann::ordered_json::array();
    for (auto x : r.test_techniques) tt.push_back(std::string(to_string(x)));
    rows.push_back({{"train_set", r.label()}, {"accuracy", r.accuracy}, {"auc", r.auc}, {"test_techniques", tt},
                    {"report", to_json(r.report)}});
  }
  return {{"rows", rows}, {"averaged", {{"accuracy", t.mean_accuracy}, {"auc", t.mean_auc}}}};
}

/// One row per technique present in the bank, in enumeration order. Row t
/// trains with seed = base seed + technique index on the one-vs-all subset
/// and is scored on the unmodified test split.
inline OneVsAllTable run_one_vs_all(const Bank& bank, const SplitAssignment& split, const nn::TrainerConfig& tc,
                                    const FauxNetConfig& mc, RunMetadata meta = {}) {
  std::array<bool, kNumTechniques> present{};
  for (const auto& e : bank.manifest.entries)
    if (e.label == 1 && e.technique) present[index_of(*e.technique)] = true;
  std::vector<Technique> techs;
  for (std::size_t t = 0; t < kNumTechniques; ++t)
    if (present[t]) techs.push_back(technique_from_index(t));
  require(techs.size() >= 2, ErrorCode::DegenerateSplit, "one-vs-all needs at least two techniques");

  const auto test_idx = select(split, bank.manifest, Split::test);
  std::array<bool, kNumTechniques> in_test{};
  for (auto i : test_idx)
    if (const auto& e = bank.manifest.entries[i]; e.label == 1 && e.technique) in_test[index_of(*e.technique)] = true;

  OneVsAllTable table;
  for (auto tech : techs) {
    const auto subset = one_vs_all_subset(split, bank.manifest, tech);
    nn::TrainerConfig row_cfg = tc;
    row_cfg.seed = tc.seed + index_of(tech);
    const auto trained = train_fauxnet(bank, subset, row_cfg, mc);
    RunMetadata row_meta = meta;
    row_meta.seed = row_cfg.seed;
    OneVsAllRow row;
    row.train_technique = tech;
    row.report = evaluate_fauxnet(trained.best, bank, subset, row_meta);
    row.accuracy = row.report.detection_accuracy;
    row.auc = row.report.detection_auc;
    for (std::size_t t = 0; t < kNumTechniques; ++t)
      if (in_test[t]) row.test_techniques.push_back(technique_from_index(t));
    table.rows.push_back(std::move(row));
  }
  double acc = 0, a = 0;
  for (const auto& r : table.rows) {
    acc += r.accuracy;
    a += r.auc;
  }
  table.mean_accuracy = acc / static_cast<double>(table.rows.size());
  table.mean_auc = a / static_cast<double>(table.rows.size());
  return table;
}

// ---------------------------------------------------------------------------
// Text-metric baseline

struct LabeledCorpus {
  std::vector<text::MetricVector> vectors;
  std::vector<std::uint8_t> labels;  // 1 = fake
};

/// Joins a transcript corpus with manifest labels by video id; transcripts
/// of unknown videos are a ManifestMismatch.
inline LabeledCorpus label_corpus(const std::vector<text::TranscriptPair>& corpus, const Manifest& manifest) {
  std::unordered_map<std::string, std::uint8_t> label_of_video;
  for (const auto& e : manifest.entries) label_of_video[e.video_id] = e.label;
  LabeledCorpus out;
  for (const auto& p : corpus) {
    auto it = label_of_video.find(p.video_id);
    require(it != label_of_video.end(), ErrorCode::ManifestMismatch, "transcript for unknown video " + p.video_id);
    out.vectors.push_back(text::metric_vector(text::normalize_text(p.ground_truth), text::normalize_text(p.vsr_text)));
    out.labels.push_back(it->second);
  }
  return out;
}

struct TextBaselineResult {
  text::ThresholdModel model;
  double test_accuracy = 0;
  double test_auc = 0;  // on fake_score
  Confusion detection;
};

inline TextBaselineResult run_text_baseline(const LabeledCorpus& train, const LabeledCorpus& test,
                                            text::TieRule tie = text::TieRule::fake) {
  TextBaselineResult r;
  r.model = text::fit_thresholds(train.vectors, train.labels, tie);
  std::vector<std::size_t> pred, truth;
  std::vector<double> scores;
  for (std::size_t i = 0; i < test.vectors.size(); ++i) {
    pred.push_back(text::majority_vote(r.model, test.vectors[i]));
    truth.push_back(test.labels[i]);
    scores.push_back(text::fake_score(test.vectors[i]));
  }
  r.detection = confusion(pred, truth, 2);
  r.test_accuracy = r.detection.accuracy();
  r.test_auc = auc(scores, test.labels);
  return r;
}

inline nlohmann::ordered_json to_json(const TextBaselineResult& r) {
  nlohmann::ordered_json tr = nlohmann::ordered_json::object();
  for (std::size_t m = 0; m < text::kNumMetrics; ++m) tr[std::string(text::kMetricNames[m])] = r.model.train_accuracy[m];
  return {{"thresholds", text::to_json(r.model)},
          {"tie_rule", r.model.tie == text::TieRule::fake ? "fake" : "real"},
          {"train_accuracy_per_metric", tr},
          {"test_accuracy", r.test_accuracy},
          {"test_auc", r.test_auc},
          {"detection_confusion", to_json(r.detection)}};
}

/// Per-metric, per-class KDE curves of a labeled corpus. Classes with fewer
/// than two samples are skipped.
inline std::vector<KdeCurve> metric_kdes(const LabeledCorpus& c) {
  std::vector<KdeCurve> out;
  for (std::size_t m = 0; m < text::kNumMetrics; ++m) {
    for (std::uint8_t cls : {std::uint8_t{0}, std::uint8_t{1}}) {
      std::vector<double> v;
      for (std::size_t i = 0; i < c.vectors.size(); ++i)
        if (c.labels[i] == cls) v.push_back(c.vectors[i][m]);
      if (v.size() < 2) continue;
      out.push_back(kde_curve(v, std::string(text::kMetricNames[m]), cls ? "fake" : "real"));
    }
  }
  return out;
}

}  // namespace fauxnet
