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

#include <bit>
#include <cmath>

#include "fauxnet/fauxnet.hpp"
#include "fauxnet/nn/gradcheck.hpp"
#include "fauxnet/synth.hpp"
#include "test_util.hpp"

using namespace fauxnet;
using testutil::TempDir;

namespace {

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  Matrix m(r, c);
  for (auto& v : m.data()) v = scale * rng.normal();
  return m;
}

FauxNetConfig small_config(std::size_t d = 6, std::vector<std::size_t> hidden = {8, 5}, std::size_t classes = 4) {
  FauxNetConfig c;
  c.input_dim = d;
  c.hidden = std::move(hidden);
  c.num_classes = classes;
  return c;
}

std::vector<SampleLabel> random_labels(Rng& rng, std::size_t n, std::size_t classes, double p_fake = 0.5) {
  std::vector<SampleLabel> out(n);
  for (auto& l : out) {
    l.y_dd = rng.bernoulli(p_fake) ? 1 : 0;
    if (l.y_dd) l.y_dt = rng.uniform_int(classes);
  }
  return out;
}

// Finite-difference check of l_total over every FauxNet parameter.
nn::GradCheckResult check_fauxnet_gradients(FauxNetParams& p, const Matrix& x, const std::vector<SampleLabel>& y,
                                            std::uint64_t mask_seed, DetectionWeights w = {}) {
  auto run = [&]() {
    Rng masks(mask_seed);
    return fauxnet_forward(p, x, Mode::train, masks);
  };
  const auto fwd = run();
  const auto loss = multitask_loss(fwd, y, w);
  const auto g = fauxnet_backward(p, fwd, loss);
  auto probe = [&]() {
    const auto f = run();
    return nn::LossProbe{multitask_loss(f, y, w).batch.l_total, nn::activation_pattern(p.trunk, f.trunk_tape)};
  };
  std::vector<nn::GradPair> pairs;
  auto add = [&](nn::Network& net, const nn::Gradients& gr) {
    for (std::size_t t = 0; t < gr.size(); ++t) pairs.push_back({&net.params().tensors[t].value, &gr[t]});
  };
  add(p.trunk, g.trunk);
  add(p.binary_head, g.binary_head);
  add(p.multi_head, g.multi_head);
  return nn::check_gradients(pairs, probe);
}

bool all_positive_zero(const nn::Gradients& g) {
  for (const auto& t : g)
    for (double v : t)
      if (std::bit_cast<std::uint64_t>(v) != 0) return false;
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Pooling

TEST(Pooling, ConstantSequenceGivesTheConstant) {
  const auto m = Matrix::from_rows({{1.5, -2}, {1.5, -2}, {1.5, -2}});
  EXPECT_EQ(pool_window_features(m), (std::vector<double>{1.5, -2}));
}

TEST(Pooling, TwoRowWindow) {
  EXPECT_EQ(pool_window_features(Matrix::from_rows({{0, 2}, {2, 0}})), (std::vector<double>{1, 1}));
}

TEST(Pooling, MatchesReverseOrderAccumulation) {
  Rng rng(17);
  const auto m = random_matrix(rng, 17, 8);
  const auto pooled = pool_window_features(m);
  for (std::size_t c = 0; c < 8; ++c) {
    double s = 0;
    for (std::size_t r = 17; r-- > 0;) s += m(r, c);
    EXPECT_NEAR(pooled[c], s / 17, 1e-12);
  }
}

TEST(Pooling, WindowsAreGrandMean) {
  Rng rng(4);
  const auto a = random_matrix(rng, 3, 5), b = random_matrix(rng, 7, 5);
  const auto pooled = pool_window_features(std::vector<Matrix>{a, b});
  for (std::size_t c = 0; c < 5; ++c) {
    double s = 0;
    for (std::size_t r = 0; r < 3; ++r) s += a(r, c);
    for (std::size_t r = 0; r < 7; ++r) s += b(r, c);
    EXPECT_NEAR(pooled[c], s / 10, 1e-12);
  }
  EXPECT_FAUXNET_ERROR(pool_window_features(std::vector<Matrix>{}), ErrorCode::EmptySequence);
  EXPECT_FAUXNET_ERROR(pool_window_features(std::vector<Matrix>{Matrix(2, 3), Matrix(2, 4)}), ErrorCode::ShapeMismatch);
}

// ---------------------------------------------------------------------------
// Forward

TEST(Model, ZeroHeadsGiveHalfAndUniform) {
  auto p = FauxNetParams::create(small_config(), 1);
  for (auto* net : {&p.binary_head, &p.multi_head})
    for (auto& t : net->params().tensors) std::fill(t.value.begin(), t.value.end(), 0.0);
  Rng rng(0);
  const auto fwd = fauxnet_forward(p, random_matrix(rng, 3, 6), Mode::infer, rng);
  for (const auto& pr : fwd.predictions) {
    EXPECT_EQ(pr.p_fake, 0.5);
    for (double q : pr.technique_probs) EXPECT_DOUBLE_EQ(q, 0.25);
  }
}

TEST(Model, SoftmaxShiftInvariant) {
  for (double t : {-1e6, -3.0, 0.0, 7.5, 1e6}) {
    const std::vector<double> z(5, t);
    for (double q : softmax(z)) EXPECT_DOUBLE_EQ(q, 0.2);
  }
  const auto a = softmax(std::vector<double>{1, 2, 3});
  const auto b = softmax(std::vector<double>{101, 102, 103});
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-15);
}

TEST(Model, SigmoidIsStableAtExtremes) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
  EXPECT_NEAR(sigmoid(2.0) + sigmoid(-2.0), 1.0, 4e-16);
}

TEST(Model, InferenceIndependentOfBatchComposition) {
  Rng rng(9);
  auto p = FauxNetParams::create(small_config(), 2);
  // Move running statistics away from their initial values.
  for (int i = 0; i < 4; ++i) {
    const auto f = fauxnet_forward(p, random_matrix(rng, 10, 6), Mode::train, rng);
    nn::update_running_stats(p.trunk, f.trunk_tape);
  }
  const auto x = random_matrix(rng, 7, 6);
  const auto batch = predict(p, x);
  for (std::size_t r = 0; r < 7; ++r) {
    const auto one = predict(p, x.gather(std::vector<std::size_t>{r}));
    EXPECT_NEAR(one.predictions[0].p_fake, batch.predictions[r].p_fake, 1e-10);
    for (std::size_t c = 0; c < 4; ++c)
      EXPECT_NEAR(one.predictions[0].technique_probs[c], batch.predictions[r].technique_probs[c], 1e-10);
    EXPECT_EQ(one.labels.detection[0], batch.labels.detection[r]);
    EXPECT_EQ(one.labels.technique[0], batch.labels.technique[r]);
  }
}

// ---------------------------------------------------------------------------
// Loss

TEST(Loss, RealSampleHasNoAttributionTerm) {
  Rng rng(1);
  auto p = FauxNetParams::create(small_config(), 3);
  const auto x = random_matrix(rng, 2, 6);
  const auto fwd = fauxnet_forward(p, x, Mode::train, rng);
  const std::vector<SampleLabel> y{{0, std::nullopt}, {0, std::nullopt}};
  const auto loss = multitask_loss(fwd, y);
  for (const auto& s : loss.per_sample) {
    EXPECT_EQ(s.l_ce, 0.0);
    EXPECT_EQ(s.l_total, s.l_bce);
  }
  const auto g = fauxnet_backward(p, fwd, loss);
  EXPECT_TRUE(all_positive_zero(g.multi_head));
}

TEST(Loss, ConfidentCorrectFakeHasNearZeroLoss) {
  auto p = FauxNetParams::create(small_config(), 3);
  auto& bw = p.binary_head.params().tensors;
  std::fill(bw[0].value.begin(), bw[0].value.end(), 0.0);
  bw[1].value[0] = 40.0;  // p_fake = 1 - 4e-18
  auto& mw = p.multi_head.params().tensors;
  std::fill(mw[0].value.begin(), mw[0].value.end(), 0.0);
  mw[1].value = {0, 0, 40, 0};
  Rng rng(0);
  Matrix x(2, 6, 0.3);
  x(1, 0) = -0.4;
  const auto fwd = fauxnet_forward(p, x, Mode::infer, rng);
  const auto loss = multitask_loss(fwd, {{1, 2}, {1, 2}});
  EXPECT_LT(loss.batch.l_total, 1e-12);
}

TEST(Loss, ClampingKeepsLossFinite) {
  auto p = FauxNetParams::create(small_config(), 3);
  auto& bw = p.binary_head.params().tensors;
  std::fill(bw[0].value.begin(), bw[0].value.end(), 0.0);
  bw[1].value[0] = -1000.0;  // p_fake underflows to 0
  Rng rng(0);
  const auto fwd = fauxnet_forward(p, Matrix(2, 6, 0.1), Mode::train, rng);
  const auto loss = multitask_loss(fwd, {{1, 0}, {0, std::nullopt}});
  EXPECT_TRUE(std::isfinite(loss.batch.l_total));
  EXPECT_NEAR(loss.per_sample[0].l_bce, -std::log(1e-12), 1e-9);
  EXPECT_EQ(loss.grad_binary_logits(0, 0), 0.0);
}

TEST(Loss, FakeWithoutTechniqueRejected) {
  auto p = FauxNetParams::create(small_config(), 3);
  Rng rng(0);
  const auto fwd = fauxnet_forward(p, Matrix(2, 6, 0.1), Mode::train, rng);
  EXPECT_FAUXNET_ERROR(multitask_loss(fwd, {{1, std::nullopt}, {0, std::nullopt}}), ErrorCode::MissingTechniqueLabel);
  EXPECT_FAUXNET_ERROR(multitask_loss(fwd, {{1, 9}, {0, std::nullopt}}), ErrorCode::LabelOutOfRange);
}

TEST(Loss, MixedBatchOfFourMatchesFiniteDifferences) {
  Rng rng(41);
  auto p = FauxNetParams::create(small_config(), 5);
  const auto x = random_matrix(rng, 4, 6);
  const std::vector<SampleLabel> y{{0, std::nullopt}, {1, 2}, {1, 0}, {0, std::nullopt}};
  const auto res = check_fauxnet_gradients(p, x, y, 77);
  EXPECT_LT(res.max_rel_error, 1e-4);
  EXPECT_GT(res.checked, 100u);
}

TEST(Loss, WeightedLossMatchesFiniteDifferences) {
  Rng rng(42);
  auto p = FauxNetParams::create(small_config(), 6);
  const auto x = random_matrix(rng, 6, 6);
  const auto y = random_labels(rng, 6, 4);
  const auto res = check_fauxnet_gradients(p, x, y, 78, {0.7, 2.5});
  EXPECT_LT(res.max_rel_error, 1e-4);
}

TEST(Loss, RealOnlyBatchesGiveBitwiseZeroMultiHeadGradients) {
  Rng rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t C = 2 + rng.uniform_int(5);
    auto p = FauxNetParams::create(small_config(5, {6, 4}, C), rng.next_u64());
    const std::size_t B = 2 + rng.uniform_int(10);
    const auto x = random_matrix(rng, B, 5, 3.0);
    const auto fwd = fauxnet_forward(p, x, Mode::train, rng);
    const auto loss = multitask_loss(fwd, std::vector<SampleLabel>(B));
    for (double v : loss.grad_multi_logits.data()) ASSERT_EQ(std::bit_cast<std::uint64_t>(v), 0u);
    const auto g = fauxnet_backward(p, fwd, loss);
    ASSERT_TRUE(all_positive_zero(g.multi_head)) << "trial " << trial;
  }
}

// ---------------------------------------------------------------------------
// Training

namespace {

Dataset two_clusters(std::size_t n, std::size_t d, double sep, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  ds.features = Matrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    SampleLabel l;
    l.y_dd = i % 2;
    if (l.y_dd) l.y_dt = 0;
    for (std::size_t c = 0; c < d; ++c) ds.features(i, c) = rng.normal() + (c == 0 && l.y_dd ? sep : 0.0);
    ds.labels.push_back(l);
  }
  return ds;
}

}  // namespace

TEST(Training, SeparableClustersReachPerfectValidationAccuracy) {
  const auto train = two_clusters(200, 4, 10.0, 1);
  const auto val = two_clusters(100, 4, 10.0, 2);
  nn::TrainerConfig tc;
  tc.max_epochs = 20;
  tc.batch_size = 32;
  tc.learning_rate = 1e-3;
  auto mc = small_config(4, {16, 8}, 2);
  const auto res = train_fauxnet(train, val, tc, mc);
  EXPECT_LE(res.history.size(), 20u);
  const auto pred = predict(res.best, val.features);
  for (std::size_t i = 0; i < val.size(); ++i) EXPECT_EQ(pred.labels.detection[i], val.labels[i].y_dd) << i;
}

TEST(Training, RealOnlyTrainSetIsDegenerate) {
  auto train = two_clusters(20, 3, 5.0, 1);
  for (auto& l : train.labels) l = {};
  EXPECT_FAUXNET_ERROR(train_fauxnet(train, two_clusters(10, 3, 5.0, 2), {}, small_config(3, {4}, 2)),
                       ErrorCode::DegenerateSplit);
}

TEST(Training, DeterministicForFixedSeed) {
  const auto train = two_clusters(90, 5, 2.0, 3);
  const auto val = two_clusters(30, 5, 2.0, 4);
  nn::TrainerConfig tc;
  tc.max_epochs = 6;
  tc.batch_size = 16;
  tc.seed = 99;
  const auto mc = small_config(5, {8, 4}, 2);
  const auto a = train_fauxnet(train, val, tc, mc);
  const auto b = train_fauxnet(train, val, tc, mc);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.best, b.best);
  EXPECT_EQ(history_csv(a.history), history_csv(b.history));
  tc.seed = 100;
  EXPECT_NE(train_fauxnet(train, val, tc, mc).history, a.history);
}

TEST(Training, TrailingSingletonBatchIsMerged) {
  // 33 samples with batch 16 would leave a 1-row batch, which batchnorm rejects.
  const auto train = two_clusters(33, 3, 4.0, 5);
  const auto val = two_clusters(10, 3, 4.0, 6);
  nn::TrainerConfig tc;
  tc.max_epochs = 2;
  tc.batch_size = 16;
  EXPECT_NO_THROW(train_fauxnet(train, val, tc, small_config(3, {4}, 2)));
}

TEST(Training, BestCheckpointHasLowestValidationLoss) {
  const auto train = two_clusters(120, 4, 1.5, 7);
  const auto val = two_clusters(60, 4, 1.5, 8);
  nn::TrainerConfig tc;
  tc.max_epochs = 25;
  tc.batch_size = 32;
  const auto res = train_fauxnet(train, val, tc, small_config(4, {8}, 2));
  double best = 1e300;
  for (const auto& r : res.history) best = std::min(best, r.val_loss);
  EXPECT_EQ(res.best_val_loss, res.history[res.best_epoch].val_loss);
  EXPECT_LE(res.best_val_loss, best + 1e-6);
  EXPECT_DOUBLE_EQ(evaluate_loss(res.best, val).l_total, res.best_val_loss);
  EXPECT_EQ(history_csv(res.history).substr(0, 30), "epoch,train_loss,val_loss,lr\n0");
}

TEST(Training, BankOverloadUsesSplits) {
  synth::SynthSpec spec;
  spec.dim = 8;
  spec.identities = 20;
  spec.videos_per_identity = 7;
  spec.seed = 1;
  const auto bank = synth::gen_embeddings(spec);
  const auto split = make_splits(bank.manifest, kVoxRatios, 1);
  nn::TrainerConfig tc;
  tc.max_epochs = 3;
  tc.batch_size = 32;
  const auto mc = small_config(8, {8}, 6);
  const auto res = train_fauxnet(bank, split, tc, mc);
  EXPECT_EQ(res.history.size(), 3u);
  EXPECT_FAUXNET_ERROR(train_fauxnet(bank, split, tc, small_config(7, {8}, 6)), ErrorCode::ShapeMismatch);
}

// ---------------------------------------------------------------------------
// Hard labels and checkpoints

TEST(Predict, TieRules) {
  auto p = FauxNetParams::create(small_config(), 1);
  for (auto* net : {&p.binary_head, &p.multi_head})
    for (auto& t : net->params().tensors) std::fill(t.value.begin(), t.value.end(), 0.0);
  const auto r = predict(p, Matrix(2, 6, 0.5));
  EXPECT_EQ(r.labels.detection, (std::vector<std::uint8_t>{0, 0}));  // p = 0.5 is real
  EXPECT_EQ(r.labels.technique, (std::vector<std::size_t>{0, 0}));   // uniform -> lowest index
  EXPECT_EQ(argmax(std::vector<double>{0.2, 0.4, 0.4}), 1u);
}

TEST(Checkpoint, SaveLoadReproducesPredictions) {
  TempDir dir;
  Rng rng(6);
  auto p = FauxNetParams::create(small_config(), 8);
  const auto f = fauxnet_forward(p, random_matrix(rng, 8, 6), Mode::train, rng);
  nn::update_running_stats(p.trunk, f.trunk_tape);
  save_checkpoint(p, dir / "m.fxck", {{"seed", "8"}});
  const auto q = load_checkpoint(dir / "m.fxck");
  EXPECT_EQ(q, p);
  const auto x = random_matrix(rng, 5, 6);
  const auto a = predict(p, x), b = predict(q, x);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(a.predictions[i].p_fake, b.predictions[i].p_fake);
  const auto ck = nn::decode_checkpoint(io::read_file(dir / "m.fxck"));
  EXPECT_EQ(ck.metadata.at("model"), "fauxnet");
  EXPECT_EQ(ck.metadata.at("seed"), "8");
}

TEST(Checkpoint, ForeignModelRejected) {
  nn::Checkpoint ck;
  ck.metadata["model"] = "other";
  EXPECT_FAUXNET_ERROR(from_checkpoint(ck), ErrorCode::ParseError);
}
