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

// FauxNet: a shared MLP trunk over pooled VSR embeddings feeding a detection
// head (sigmoid, real vs fake) and an attribution head (softmax over
// generation techniques). The attribution loss is gated by the ground-truth
// detection label, so real samples never train the attribution head:
//
//   L_total = L_bce + y_dd * L_ce

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fauxnet/data_model.hpp"
#include "fauxnet/error.hpp"
#include "fauxnet/nn/checkpoint.hpp"
#include "fauxnet/nn/matrix.hpp"
#include "fauxnet/nn/network.hpp"
#include "fauxnet/nn/optim.hpp"
#include "fauxnet/rng.hpp"

namespace fauxnet {

using nn::Matrix;
using nn::Mode;

inline constexpr double kProbClamp = 1e-12;

// ---------------------------------------------------------------------------
// Temporal pooling

/// Grand mean over all timesteps of all windows (each window is w x d).
/// Equivalent to averaging per-window means weighted by window length.
inline std::vector<double> pool_window_features(const std::vector<Matrix>& windows) {
  std::size_t steps = 0;
  std::size_t d = 0;
  for (const auto& w : windows) {
    if (w.rows() == 0) continue;
    if (steps == 0) d = w.cols();
    require(w.cols() == d, ErrorCode::ShapeMismatch, "windows disagree on feature width");
    steps += w.rows();
  }
  require(steps > 0, ErrorCode::EmptySequence, "no timesteps to pool");
  std::vector<double> sum(d, 0.0);
  for (const auto& w : windows) {
    for (std::size_t r = 0; r < w.rows(); ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        require(std::isfinite(w(r, c)), ErrorCode::NonFiniteValue, "window feature not finite");
        sum[c] += w(r, c);
      }
    }
  }
  for (auto& s : sum) s /= static_cast<double>(steps);
  return sum;
}

inline std::vector<double> pool_window_features(const Matrix& window) {
  return pool_window_features(std::vector<Matrix>{window});
}

// ---------------------------------------------------------------------------
// Model

struct FauxNetConfig {
  std::size_t input_dim = 768;
  std::vector<std::size_t> hidden = {512, 256, 128};
  std::size_t num_classes = kNumTechniques;
  double drop_prob = 0.5;
  double bn_momentum = 0.1;
  double bn_epsilon = 1e-5;
  bool class_weighting = false;  // inverse-frequency weights on the detection loss

  void validate() const {
    require(input_dim > 0, ErrorCode::InvalidConfig, "input_dim must be positive");
    require(!hidden.empty(), ErrorCode::InvalidConfig, "need at least one hidden layer");
    require(num_classes >= 2, ErrorCode::InvalidConfig, "need at least 2 technique classes");
    require(drop_prob >= 0.0 && drop_prob < 1.0, ErrorCode::InvalidConfig, "drop_prob in [0,1)");
  }
};

struct FauxNetParams {
  nn::Network trunk;
  nn::Network binary_head;
  nn::Network multi_head;

  static FauxNetParams create(const FauxNetConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    FauxNetParams p;
    p.trunk = nn::Network(nn::mlp_trunk(cfg.input_dim, cfg.hidden, cfg.drop_prob, cfg.bn_momentum, cfg.bn_epsilon));
    const std::size_t width = cfg.hidden.back();
    p.binary_head = nn::Network({nn::LayerSpec::linear(width, 1)});
    p.multi_head = nn::Network({nn::LayerSpec::linear(width, cfg.num_classes)});
    Rng rng(seed);
    p.trunk.initialize(rng);
    p.binary_head.initialize(rng);
    p.multi_head.initialize(rng);
    return p;
  }

  std::size_t input_dim() const { return trunk.in_dim(); }
  std::size_t num_classes() const { return multi_head.out_dim(); }

  void validate() const {
    require(trunk.out_dim() == binary_head.in_dim() && trunk.out_dim() == multi_head.in_dim(),
            ErrorCode::ShapeMismatch, "trunk output width must equal head input width");
    require(binary_head.out_dim() == 1, ErrorCode::ShapeMismatch, "binary head must emit one logit");
    require(num_classes() >= 2, ErrorCode::ShapeMismatch, "multi head needs at least 2 classes");
  }

  friend bool operator==(const FauxNetParams&, const FauxNetParams&) = default;
};

struct Prediction {
  double p_fake = 0.5;
  std::vector<double> technique_probs;
};

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Max-subtracted softmax; shift invariant.
inline std::vector<double> softmax(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

struct FauxNetForward {
  std::vector<Prediction> predictions;
  Matrix binary_logits;  // B x 1
  Matrix multi_logits;   // B x C
  nn::Tape trunk_tape;
  nn::Tape binary_tape;
  nn::Tape multi_tape;
};

inline FauxNetForward fauxnet_forward(const FauxNetParams& params, const Matrix& z, Mode mode, Rng& rng) {
  require_shape(z, params.input_dim(), "fauxnet input");
  FauxNetForward out;
  auto trunk = nn::forward(params.trunk, z, mode, rng);
  auto bin = nn::forward(params.binary_head, trunk.output, mode, rng);
  auto multi = nn::forward(params.multi_head, trunk.output, mode, rng);
  out.predictions.resize(z.rows());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    out.predictions[r].p_fake = sigmoid(bin.output(r, 0));
    out.predictions[r].technique_probs = softmax(multi.output.row(r));
  }
  out.binary_logits = std::move(bin.output);
  out.multi_logits = std::move(multi.output);
  out.trunk_tape = std::move(trunk.tape);
  out.binary_tape = std::move(bin.tape);
  out.multi_tape = std::move(multi.tape);
  return out;
}

// ---------------------------------------------------------------------------
// Loss

struct SampleLabel {
  std::uint8_t y_dd = 0;
  std::optional<std::size_t> y_dt;  // technique class, fakes only
};

struct LossBreakdown {
  double l_bce = 0.0;
  double l_ce = 0.0;  // already gated: 0 for real samples
  double l_total = 0.0;
};

struct LossResult {
  LossBreakdown batch;  // means over the batch
  std::vector<LossBreakdown> per_sample;
  Matrix grad_binary_logits;  // d batch l_total / d logit
  Matrix grad_multi_logits;
};

// Per-class weights for the detection loss; {1, 1} means unweighted.
struct DetectionWeights {
  double real = 1.0;
  double fake = 1.0;
};

inline LossResult multitask_loss(const FauxNetForward& fwd, const std::vector<SampleLabel>& labels,
                                 DetectionWeights weights = {}) {
  const std::size_t B = fwd.predictions.size();
  require(labels.size() == B, ErrorCode::ShapeMismatch, "label count does not match batch");
  require(B > 0, ErrorCode::EmptySequence, "empty batch");
  const std::size_t C = fwd.multi_logits.cols();
  LossResult res;
  res.per_sample.resize(B);
  res.grad_binary_logits = Matrix(B, 1);
  res.grad_multi_logits = Matrix(B, C);
  const double inv_b = 1.0 / static_cast<double>(B);
  double sum_bce = 0.0, sum_ce = 0.0, sum_total = 0.0;

  for (std::size_t i = 0; i < B; ++i) {
    const auto& lab = labels[i];
    require(lab.y_dd <= 1, ErrorCode::InvariantViolation, "detection label must be 0 or 1");
    require(lab.y_dd == 0 || lab.y_dt.has_value(), ErrorCode::MissingTechniqueLabel,
            "fake sample " + std::to_string(i) + " has no technique label");
    const double y = lab.y_dd;
    const double w = lab.y_dd ? weights.fake : weights.real;
    const double p_raw = fwd.predictions[i].p_fake;
    const double p = std::clamp(p_raw, kProbClamp, 1.0 - kProbClamp);
    auto& ls = res.per_sample[i];
    ls.l_bce = -w * (y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    const bool clamped = p != p_raw;
    res.grad_binary_logits(i, 0) = clamped ? 0.0 : w * (p_raw - y) * inv_b;

    if (lab.y_dd == 1) {
      const std::size_t k = *lab.y_dt;
      require(k < C, ErrorCode::LabelOutOfRange, "technique class " + std::to_string(k) + " >= " + std::to_string(C));
      const auto& q = fwd.predictions[i].technique_probs;
      ls.l_ce = -std::log(std::max(q[k], kProbClamp));
      for (std::size_t c = 0; c < C; ++c) {
        res.grad_multi_logits(i, c) = (q[c] - (c == k ? 1.0 : 0.0)) * inv_b;
      }
    }
    // Real rows of grad_multi_logits stay exactly +0.0.
    ls.l_total = ls.l_bce + y * ls.l_ce;
    sum_bce += ls.l_bce;
    sum_ce += y * ls.l_ce;
    sum_total += ls.l_total;
  }
  res.batch.l_bce = sum_bce * inv_b;
  res.batch.l_ce = sum_ce * inv_b;
  res.batch.l_total = sum_total * inv_b;
  return res;
}

struct FauxNetGradients {
  nn::Gradients trunk;
  nn::Gradients binary_head;
  nn::Gradients multi_head;
};

inline FauxNetGradients fauxnet_backward(const FauxNetParams& params, const FauxNetForward& fwd,
                                         const LossResult& loss) {
  auto bin = nn::backward(params.binary_head, fwd.binary_tape, loss.grad_binary_logits);
  auto multi = nn::backward(params.multi_head, fwd.multi_tape, loss.grad_multi_logits);
  Matrix dz = bin.input_grad;
  for (std::size_t i = 0; i < dz.data().size(); ++i) dz.data()[i] += multi.input_grad.data()[i];
  auto trunk = nn::backward(params.trunk, fwd.trunk_tape, dz);
  return {std::move(trunk.grads), std::move(bin.grads), std::move(multi.grads)};
}

inline void adamw_step(FauxNetParams& params, const FauxNetGradients& g, const nn::AdamWSettings& s) {
  nn::adamw_step(params.trunk.params(), g.trunk, s);
  nn::adamw_step(params.binary_head.params(), g.binary_head, s);
  nn::adamw_step(params.multi_head.params(), g.multi_head, s);
}

// ---------------------------------------------------------------------------
// Datasets and training

struct Dataset {
  Matrix features;
  std::vector<SampleLabel> labels;

  std::size_t size() const { return labels.size(); }
};

inline SampleLabel label_of(const EmbeddingRecord& r) {
  SampleLabel l;
  l.y_dd = r.label;
  if (r.technique) l.y_dt = index_of(*r.technique);
  return l;
}

inline Dataset make_dataset(const Bank& bank, std::span<const std::size_t> idx) {
  Dataset ds;
  ds.features = Matrix(idx.size(), bank.dim);
  ds.labels.reserve(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& r = bank.records.at(idx[i]);
    std::copy(r.embedding.begin(), r.embedding.end(), ds.features.row(i).begin());
    ds.labels.push_back(label_of(r));
  }
  return ds;
}

struct EpochRecord {
  std::size_t epoch = 0;  // 0-based
  double train_loss = 0;
  double val_loss = 0;
  double lr = 0;  // rate used during this epoch

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainResult {
  FauxNetParams best;  // snapshot at minimum validation loss
  std::size_t best_epoch = 0;
  double best_val_loss = 0;
  std::vector<EpochRecord> history;
};

/// Mean l_total over a dataset in inference mode.
inline LossBreakdown evaluate_loss(const FauxNetParams& params, const Dataset& ds, DetectionWeights w = {}) {
  Rng unused(0);
  auto fwd = fauxnet_forward(params, ds.features, Mode::infer, unused);
  return multitask_loss(fwd, ds.labels, w).batch;
}

inline DetectionWeights inverse_frequency_weights(const Dataset& ds) {
  double fakes = 0;
  for (const auto& l : ds.labels) fakes += l.y_dd;
  const double n = static_cast<double>(ds.size());
  return {n / (2.0 * (n - fakes)), n / (2.0 * fakes)};
}

/// Trains on `train`, selects the checkpoint with the lowest validation loss.
///
/// Epoch e draws its shuffle order and dropout masks from a stream seeded by
/// (seed, e); initialization uses its own stream. The last partial batch is
/// kept, except that a trailing single sample joins the previous batch
/// (train-mode batchnorm needs two rows).
inline TrainResult train_fauxnet(const Dataset& train, const Dataset& val, const nn::TrainerConfig& tc,
                                 const FauxNetConfig& mc) {
  tc.validate();
  mc.validate();
  std::size_t fakes = 0;
  for (const auto& l : train.labels) {
    fakes += l.y_dd;
    require(l.y_dd == 0 || l.y_dt.has_value(), ErrorCode::MissingTechniqueLabel, "fake training sample without technique");
  }
  require(fakes > 0 && fakes < train.size(), ErrorCode::DegenerateSplit,
          "training split needs both real and fake samples (" + std::to_string(train.size() - fakes) + " real, " +
              std::to_string(fakes) + " fake)");
  require(val.size() > 0, ErrorCode::DegenerateSplit, "validation split is empty");
  require(train.features.cols() == mc.input_dim, ErrorCode::ShapeMismatch, "feature width vs model input_dim");

  const DetectionWeights weights = mc.class_weighting ? inverse_frequency_weights(train) : DetectionWeights{};

  TrainResult res;
  FauxNetParams params = FauxNetParams::create(mc, derive_seed(tc.seed, 1));
  nn::PlateauScheduler sched(tc);
  double lr = tc.learning_rate;
  res.best = params;
  res.best_val_loss = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(train.size());
  for (std::size_t epoch = 0; epoch < tc.max_epochs; ++epoch) {
    Rng rng(derive_seed(tc.seed, 2, epoch));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(std::span(order));

    double loss_sum = 0.0;
    std::size_t start = 0;
    while (start < order.size()) {
      std::size_t end = std::min(start + tc.batch_size, order.size());
      if (order.size() - end == 1) end = order.size();
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Matrix xb = train.features.gather(idx);
      std::vector<SampleLabel> yb;
      yb.reserve(idx.size());
      for (auto i : idx) yb.push_back(train.labels[i]);

      auto fwd = fauxnet_forward(params, xb, Mode::train, rng);
      auto loss = multitask_loss(fwd, yb, weights);
      auto grads = fauxnet_backward(params, fwd, loss);
      nn::update_running_stats(params.trunk, fwd.trunk_tape);
      adamw_step(params, grads, nn::adamw_settings(tc, lr));
      loss_sum += loss.batch.l_total * static_cast<double>(idx.size());
      start = end;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train.size());
    rec.val_loss = evaluate_loss(params, val, weights).l_total;
    rec.lr = lr;
    res.history.push_back(rec);

    const auto step = sched.step(rec.val_loss);
    if (step.improved) {
      res.best = params;
      res.best_epoch = epoch;
      res.best_val_loss = rec.val_loss;
    }
    lr = step.lr;
    if (step.stop) break;
  }
  return res;
}

inline TrainResult train_fauxnet(const Bank& bank, const SplitAssignment& split, const nn::TrainerConfig& tc,
                                 const FauxNetConfig& mc) {
  const auto train_idx = select(split, bank.manifest, Split::train);
  const auto val_idx = select(split, bank.manifest, Split::val);
  return train_fauxnet(make_dataset(bank, train_idx), make_dataset(bank, val_idx), tc, mc);
}

inline std::string history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream os;
  os << "epoch,train_loss,val_loss,lr\n";
  char buf[128];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", r.epoch, r.train_loss, r.val_loss, r.lr);
    os << buf;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Inference

struct HardLabels {
  std::vector<std::uint8_t> detection;  // 1 = fake, iff p_fake > 0.5
  std::vector<std::size_t> technique;   // argmax, lowest index on ties
};

inline std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

struct PredictResult {
  std::vector<Prediction> predictions;
  HardLabels labels;
};

inline PredictResult predict(const FauxNetParams& params, const Matrix& z) {
  Rng unused(0);
  auto fwd = fauxnet_forward(params, z, Mode::infer, unused);
  PredictResult out;
  out.predictions = std::move(fwd.predictions);
  for (const auto& p : out.predictions) {
    out.labels.detection.push_back(p.p_fake > 0.5 ? 1 : 0);
    out.labels.technique.push_back(argmax(p.technique_probs));
  }
  return out;
}

inline PredictResult predict(const FauxNetParams& params, const std::vector<EmbeddingRecord>& records) {
  Matrix z(records.size(), params.input_dim());
  for (std::size_t i = 0; i < records.size(); ++i) {
    require(records[i].embedding.size() == params.input_dim(), ErrorCode::ShapeMismatch,
            records[i].video_id + ": embedding width does not match model");
    std::copy(records[i].embedding.begin(), records[i].embedding.end(), z.row(i).begin());
  }
  return predict(params, z);
}

// ---------------------------------------------------------------------------
// Checkpoints: nn checkpoint with three sections (trunk, binary_head, multi_head).

inline nn::Checkpoint to_checkpoint(const FauxNetParams& p, std::map<std::string, std::string> metadata = {}) {
  nn::Checkpoint ck;
  ck.metadata = std::move(metadata);
  ck.metadata["model"] = "fauxnet";
  ck.sections.emplace_back("trunk", p.trunk);
  ck.sections.emplace_back("binary_head", p.binary_head);
  ck.sections.emplace_back("multi_head", p.multi_head);
  return ck;
}

inline FauxNetParams from_checkpoint(const nn::Checkpoint& ck) {
  auto it = ck.metadata.find("model");
  require(it != ck.metadata.end() && it->second == "fauxnet", ErrorCode::ParseError, "checkpoint is not a fauxnet model");
  FauxNetParams p;
  p.trunk = ck.section("trunk");
  p.binary_head = ck.section("binary_head");
  p.multi_head = ck.section("multi_head");
  p.validate();
  return p;
}

inline void save_checkpoint(const FauxNetParams& p, const std::filesystem::path& path,
                            std::map<std::string, std::string> metadata = {}) {
  io::write_file(path, nn::encode_checkpoint(to_checkpoint(p, std::move(metadata))));
}

inline FauxNetParams load_checkpoint(const std::filesystem::path& path) {
  return from_checkpoint(nn::decode_checkpoint(io::read_file(path)));
}

}  // namespace fauxnet
