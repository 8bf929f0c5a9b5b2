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
#include <numeric>

#include "fauxnet/alt_classifiers.hpp"
#include "test_util.hpp"

using namespace fauxnet;
using namespace fauxnet::alt;

namespace {

struct Blobs {
  Matrix x;
  std::vector<std::uint8_t> y;
};

// Two isotropic unit-variance blobs whose means are `sep` apart along a random direction.
Blobs blobs(Rng& rng, std::size_t n, std::size_t d, double sep) {
  std::vector<double> dir(d);
  double norm = 0;
  for (auto& v : dir) {
    v = rng.normal();
    norm += v * v;
  }
  for (auto& v : dir) v /= std::sqrt(norm);
  Blobs b{Matrix(n, d), std::vector<std::uint8_t>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    b.y[i] = i % 2;
    for (std::size_t c = 0; c < d; ++c) b.x(i, c) = rng.normal() + (b.y[i] ? sep : 0.0) * dir[c] + 3.0;
  }
  return b;
}

bool em_monotone(const GmmFitResult& r, double slack) {
  for (std::size_t i = 1; i < r.loglik_history.size(); ++i) {
    const bool after_reseed =
        std::find(r.reseed_iterations.begin(), r.reseed_iterations.end(), i) != r.reseed_iterations.end();
    if (!after_reseed && r.loglik_history[i] < r.loglik_history[i - 1] - slack) return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Linear SVC

TEST(LinearSvc, SeparableLine) {
  const auto x = Matrix::from_rows({{-1}, {-1.2}, {-0.8}, {1}, {1.1}, {0.9}});
  const std::vector<std::uint8_t> y{0, 0, 0, 1, 1, 1};
  const auto res = train_linear_svc(x, y, 1e-3, 50, 1);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(res.model.predict(x.row(i)), y[i]);
}

TEST(LinearSvc, HeavyRegularizationCollapsesWeights) {
  Rng rng(2);
  const auto b = blobs(rng, 200, 3, 4.0);
  const auto res = train_linear_svc(b.x, b.y, 1e6, 20, 2);
  double w2 = 0;
  for (double w : res.model.weights) w2 += w * w;
  EXPECT_LT(std::sqrt(w2), 1e-4);
  for (std::size_t i = 0; i < 10; ++i)
    EXPECT_EQ(res.model.predict(b.x.row(i)), res.model.bias > 0 ? 1 : 0);
}

TEST(LinearSvc, EightSigmaBlobs) {
  Rng rng(3);
  const auto all = blobs(rng, 3000, 2, 8.0);
  std::vector<std::size_t> tr(1000), te(2000);
  std::iota(tr.begin(), tr.end(), 0);
  std::iota(te.begin(), te.end(), 1000);
  const std::vector<std::uint8_t> ytr(all.y.begin(), all.y.begin() + 1000);
  const auto res = train_linear_svc(all.x.gather(tr), ytr, 1e-3, 20, 3);
  std::size_t ok = 0;
  for (std::size_t i : te) ok += res.model.predict(all.x.row(i)) == all.y[i];
  EXPECT_GE(static_cast<double>(ok) / 2000.0, 0.99);
}

TEST(LinearSvc, AveragedObjectiveBelowInitial) {
  Rng rng(5);
  for (int rep = 0; rep < 5; ++rep) {
    const auto b = blobs(rng, 300, 4, 1.0 + rep);
    const auto res = train_linear_svc(b.x, b.y, 1e-2, 10, rep);
    ASSERT_EQ(res.epoch_objective.size(), 10u);
    for (double o : res.epoch_objective) EXPECT_LE(o, res.initial_objective);
  }
}

TEST(LinearSvc, Errors) {
  const auto x = Matrix::from_rows({{1}, {2}});
  const std::vector<std::uint8_t> same{1, 1};
  EXPECT_FAUXNET_ERROR(train_linear_svc(x, same, 1e-3, 5, 0), ErrorCode::SingleClass);
  const std::vector<std::uint8_t> y{0, 1};
  EXPECT_FAUXNET_ERROR(train_linear_svc(x, y, 0.0, 5, 0), ErrorCode::InvalidConfig);
}

TEST(LinearSvc, Deterministic) {
  Rng rng(6);
  const auto b = blobs(rng, 100, 3, 2.0);
  EXPECT_EQ(train_linear_svc(b.x, b.y, 1e-2, 5, 9).model, train_linear_svc(b.x, b.y, 1e-2, 5, 9).model);
}

// ---------------------------------------------------------------------------
// GMM

TEST(Gmm, SingleComponentIsClosedForm) {
  Rng rng(7);
  Matrix x(500, 3);
  for (std::size_t r = 0; r < 500; ++r)
    for (std::size_t c = 0; c < 3; ++c) x(r, c) = rng.normal() * (c + 1.0) + c;
  const auto g = fit_gmm(x, 1, 1).model;
  for (std::size_t c = 0; c < 3; ++c) {
    double m = 0, v = 0;
    for (std::size_t r = 0; r < 500; ++r) m += x(r, c);
    m /= 500;
    for (std::size_t r = 0; r < 500; ++r) v += (x(r, c) - m) * (x(r, c) - m);
    v /= 500;
    EXPECT_NEAR(g.components[0].mean[c], m, 1e-10);
    EXPECT_NEAR(g.components[0].var[c], v, 1e-10);
  }
  EXPECT_DOUBLE_EQ(g.components[0].weight, 1.0);
}

TEST(Gmm, VarianceFloor) {
  const auto x = Matrix::from_rows({{2.0}, {2.0}, {2.0}});
  const auto g = fit_gmm(x, 1, 1).model;
  EXPECT_EQ(g.components[0].var[0], 1e-6);
}

TEST(Gmm, RecoversTwoSpikeMixture) {
  Rng rng(8);
  Matrix x(10000, 1);
  for (std::size_t r = 0; r < 10000; ++r) x(r, 0) = (rng.bernoulli(0.5) ? 5.0 : -5.0) + rng.normal();
  const auto g = fit_gmm(x, 2, 3).model;
  std::vector<double> means{g.components[0].mean[0], g.components[1].mean[0]};
  std::sort(means.begin(), means.end());
  EXPECT_NEAR(means[0], -5.0, 0.1);
  EXPECT_NEAR(means[1], 5.0, 0.1);
  for (const auto& c : g.components) {
    EXPECT_NEAR(c.weight, 0.5, 0.03);
    EXPECT_NEAR(c.var[0], 1.0, 0.1);
  }
}

TEST(Gmm, EmLogLikelihoodNonDecreasing) {
  Rng rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t d = 1 + rng.uniform_int(4), k = 1 + rng.uniform_int(5);
    const std::size_t n = 50 + rng.uniform_int(300);
    Matrix x(n, d);
    for (std::size_t r = 0; r < n; ++r) {
      const double shift = 4.0 * static_cast<double>(rng.uniform_int(3));
      for (std::size_t c = 0; c < d; ++c) x(r, c) = shift + rng.normal() * (0.5 + rng.uniform());
    }
    const auto res = fit_gmm(x, k, rep);
    EXPECT_TRUE(em_monotone(res, 1e-9)) << "dataset " << rep;
    EXPECT_GE(res.loglik_history.size(), 2u);
  }
}

TEST(Gmm, ComponentDensitiesIntegrateToOne) {
  Rng rng(10);
  for (int rep = 0; rep < 5; ++rep) {
    // d = 1: trapezoid over +-12 sd.
    const double m = rng.normal(), v = 0.1 + rng.uniform() * 3;
    const double sd = std::sqrt(v), lo = m - 12 * sd, hi = m + 12 * sd;
    const int steps = 20000;
    double s = 0;
    for (int i = 0; i <= steps; ++i) {
      const double x = lo + (hi - lo) * i / steps;
      const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
      s += w * std::exp(log_gaussian_diag(std::vector<double>{x}, std::vector<double>{m}, std::vector<double>{v}));
    }
    EXPECT_NEAR(s * (hi - lo) / steps, 1.0, 1e-6);
    // d = 2: midpoint grid.
    const std::vector<double> mu{rng.normal(), rng.normal()}, var{0.2 + rng.uniform(), 0.2 + rng.uniform()};
    const int g = 600;
    double acc = 0;
    const double h0 = 20 * std::sqrt(var[0]) / g, h1 = 20 * std::sqrt(var[1]) / g;
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j) {
        const std::vector<double> p{mu[0] - 10 * std::sqrt(var[0]) + (i + 0.5) * h0,
                                    mu[1] - 10 * std::sqrt(var[1]) + (j + 0.5) * h1};
        acc += std::exp(log_gaussian_diag(p, mu, var));
      }
    EXPECT_NEAR(acc * h0 * h1, 1.0, 1e-4);
  }
}

TEST(Gmm, Errors) {
  EXPECT_FAUXNET_ERROR(fit_gmm(Matrix(2, 2), 3, 0), ErrorCode::TooFewSamples);
  EXPECT_FAUXNET_ERROR(fit_gmm(Matrix(2, 2), 0, 0), ErrorCode::InvalidConfig);
}

TEST(GmmPair, ScoreOrdering) {
  Rng rng(11);
  Matrix x(400, 2);
  std::vector<std::uint8_t> y(400);
  for (std::size_t r = 0; r < 400; ++r) {
    y[r] = r % 2;
    x(r, 0) = (y[r] ? 10.0 : 0.0) + (y[r] ? 1.0 : 0.05) * rng.normal();
    x(r, 1) = (y[r] ? 1.0 : 0.05) * rng.normal();
  }
  const auto pair = train_gmm_pair(x, y, 2, 4);
  EXPECT_LT(pair.score(std::vector<double>{0.0, 0.0}), -20.0);
  EXPECT_GT(pair.score(std::vector<double>{10.0, 0.0}), 0.0);
  std::size_t ok = 0;
  for (std::size_t r = 0; r < 400; ++r) ok += pair.predict(x.row(r)) == y[r];
  EXPECT_EQ(ok, 400u);
}

TEST(Serialization, ModelsRoundTripExactly) {
  Rng rng(12);
  const auto b = blobs(rng, 120, 3, 3.0);
  const auto svc = train_linear_svc(b.x, b.y, 1e-2, 5, 1).model;
  EXPECT_EQ(linear_svc_from_json(nlohmann::json::parse(to_json(svc).dump())), svc);
  const auto pair = train_gmm_pair(b.x, b.y, 3, 2);
  EXPECT_EQ(gmm_pair_from_json(nlohmann::json::parse(to_json(pair).dump())), pair);
  auto broken = nlohmann::json::parse(to_json(svc).dump());
  broken.erase("bias");
  EXPECT_FAUXNET_ERROR(linear_svc_from_json(broken), ErrorCode::ParseError);
}
