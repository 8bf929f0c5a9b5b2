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

// Ablation classifiers on pooled embeddings: a linear SVC trained by
// stochastic subgradient descent, and a pair of diagonal-covariance GMMs
// (one per class) scored by log-likelihood ratio.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "fauxnet/base64.hpp"
#include "fauxnet/error.hpp"
#include "fauxnet/nn/matrix.hpp"
#include "fauxnet/rng.hpp"
#include "json.hpp"

namespace fauxnet::alt {

using nn::Matrix;

// Per-feature z-scoring, fit on training data only.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const Matrix& x) {
    require(x.rows() > 0, ErrorCode::TooFewSamples, "cannot standardize an empty matrix");
    Standardizer s;
    s.mean.assign(x.cols(), 0.0);
    s.scale.assign(x.cols(), 0.0);
    const double n = static_cast<double>(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = 0; c < x.cols(); ++c) s.mean[c] += x(r, c);
    for (auto& m : s.mean) m /= n;
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = 0; c < x.cols(); ++c) {
        const double d = x(r, c) - s.mean[c];
        s.scale[c] += d * d;
      }
    for (auto& v : s.scale) {
      v = std::sqrt(v / n);
      if (!(v > 1e-12)) v = 1.0;
    }
    return s;
  }

  std::vector<double> apply(std::span<const double> x) const {
    require(x.size() == mean.size(), ErrorCode::ShapeMismatch, "standardizer width");
    std::vector<double> out(x.size());
    for (std::size_t c = 0; c < x.size(); ++c) out[c] = (x[c] - mean[c]) / scale[c];
    return out;
  }

  Matrix apply(const Matrix& x) const {
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      auto z = apply(x.row(r));
      std::copy(z.begin(), z.end(), out.row(r).begin());
    }
    return out;
  }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

inline void require_both_classes(std::span<const std::uint8_t> labels) {
  std::size_t fakes = 0;
  for (auto l : labels) fakes += l ? 1 : 0;
  require(fakes > 0 && fakes < labels.size(), ErrorCode::SingleClass, "training data must contain both classes");
}

// ---------------------------------------------------------------------------
// Linear SVC

struct LinearSvcModel {
  std::vector<double> weights;  // in standardized feature space
  double bias = 0.0;
  double lambda = 1e-3;
  Standardizer scaler;

  // Positive = fake.
  double decision(std::span<const double> raw) const {
    const auto z = scaler.apply(raw);
    double s = bias;
    for (std::size_t i = 0; i < z.size(); ++i) s += weights[i] * z[i];
    return s;
  }

  std::uint8_t predict(std::span<const double> raw) const { return decision(raw) > 0.0 ? 1 : 0; }

  friend bool operator==(const LinearSvcModel&, const LinearSvcModel&) = default;
};

// lambda/2 |w|^2 + mean hinge, on standardized features; y = +1 for fake.
inline double svc_objective(const Matrix& z, std::span<const std::uint8_t> labels, std::span<const double> w, double b,
                            double lambda) {
  double reg = 0.0;
  for (double v : w) reg += v * v;
  double hinge = 0.0;
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const double y = labels[r] ? 1.0 : -1.0;
    double s = b;
    for (std::size_t c = 0; c < z.cols(); ++c) s += w[c] * z(r, c);
    hinge += std::max(0.0, 1.0 - y * s);
  }
  return 0.5 * lambda * reg + hinge / static_cast<double>(z.rows());
}

struct SvcTrainResult {
  LinearSvcModel model;
  double initial_objective = 0.0;
  std::vector<double> epoch_objective;  // averaged iterate at the end of each epoch
};

/// Stochastic subgradient descent with epoch-wise reshuffling.
/// Weights take step 1/(lambda t), are shrunk by (1 - 1/t) and projected onto
/// the ball of radius 1/sqrt(lambda); the bias is unregularized and takes step
/// 1/sqrt(t). Each epoch reports the Polyak average of that epoch's iterates;
/// the last one is returned.
inline SvcTrainResult train_linear_svc(const Matrix& x, std::span<const std::uint8_t> labels, double lambda,
                                       std::size_t epochs, std::uint64_t seed) {
  require(x.rows() == labels.size(), ErrorCode::ShapeMismatch, "features/labels length differ");
  require_both_classes(labels);
  require(lambda > 0 && std::isfinite(lambda), ErrorCode::InvalidConfig, "lambda must be positive");
  require(epochs >= 1, ErrorCode::InvalidConfig, "need at least one epoch");

  SvcTrainResult res;
  auto& model = res.model;
  model.lambda = lambda;
  model.scaler = Standardizer::fit(x);
  const Matrix z = model.scaler.apply(x);
  const std::size_t d = x.cols();

  std::vector<double> w(d, 0.0), w_avg(d, 0.0);
  double b = 0.0, b_avg = 0.0;
  res.initial_objective = svc_objective(z, labels, w_avg, b_avg, lambda);

  std::vector<std::size_t> order(z.rows());
  std::uint64_t t = 0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    Rng rng(derive_seed(seed, 0x5cc, epoch));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(std::span(order));
    std::fill(w_avg.begin(), w_avg.end(), 0.0);
    b_avg = 0.0;
    std::size_t k = 0;
    for (std::size_t i : order) {
      ++t;
      ++k;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double eta_b = 1.0 / std::sqrt(static_cast<double>(t));
      const double y = labels[i] ? 1.0 : -1.0;
      auto zi = z.row(i);
      double s = b;
      for (std::size_t c = 0; c < d; ++c) s += w[c] * zi[c];
      const double shrink = 1.0 - eta * lambda;
      for (auto& v : w) v *= shrink;
      if (y * s < 1.0) {
        for (std::size_t c = 0; c < d; ++c) w[c] += eta * y * zi[c];
        b += eta_b * y;
      }
      double norm2 = 0.0;
      for (double v : w) norm2 += v * v;
      if (norm2 * lambda > 1.0) {
        const double scale = 1.0 / std::sqrt(norm2 * lambda);
        for (auto& v : w) v *= scale;
      }
      const double a = 1.0 / static_cast<double>(k);
      for (std::size_t c = 0; c < d; ++c) w_avg[c] += a * (w[c] - w_avg[c]);
      b_avg += a * (b - b_avg);
    }
    res.epoch_objective.push_back(svc_objective(z, labels, w_avg, b_avg, lambda));
  }
  model.weights = std::move(w_avg);
  model.bias = b_avg;
  return res;
}

// ---------------------------------------------------------------------------
// Diagonal GMM

struct GmmComponent {
  double weight = 0.0;
  std::vector<double> mean;
  std::vector<double> var;

  friend bool operator==(const GmmComponent&, const GmmComponent&) = default;
};

inline double log_sum_exp(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

// log N(x | mean, diag(var)), normalized.
inline double log_gaussian_diag(std::span<const double> x, std::span<const double> mean, std::span<const double> var) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - mean[i];
    acc += std::log(2.0 * std::numbers::pi * var[i]) + d * d / var[i];
  }
  return -0.5 * acc;
}

struct Gmm {
  std::vector<GmmComponent> components;
  double var_floor = 1e-6;

  std::size_t dim() const { return components.empty() ? 0 : components.front().mean.size(); }

  double log_likelihood(std::span<const double> x) const {
    std::vector<double> terms(components.size());
    for (std::size_t k = 0; k < components.size(); ++k) {
      const auto& c = components[k];
      terms[k] = std::log(c.weight) + log_gaussian_diag(x, c.mean, c.var);
    }
    return log_sum_exp(terms);
  }

  friend bool operator==(const Gmm&, const Gmm&) = default;
};

struct GmmOptions {
  double var_floor = 1e-6;
  double tolerance = 1e-6;  // on mean per-sample log-likelihood gain
  std::size_t max_iterations = 200;
  double min_weight = 1e-8;
};

struct GmmFitResult {
  Gmm model;
  std::vector<double> loglik_history;  // mean per-sample log-likelihood before each M-step
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t reseeds = 0;
  std::vector<std::size_t> reseed_iterations;  // first history index after a reseed
};

/// EM for a K-component diagonal GMM, k-means++ initialization.
///
/// Variances are floored after every M-step. A component whose weight falls
/// below `min_weight` is re-seeded once at the worst-explained sample; a
/// second collapse fails with DegenerateComponent.
inline GmmFitResult fit_gmm(const Matrix& x, std::size_t k, std::uint64_t seed, const GmmOptions& opt = {}) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  require(k >= 1, ErrorCode::InvalidConfig, "K must be >= 1");
  require(d >= 1, ErrorCode::ShapeMismatch, "need at least one feature");
  require(n >= k, ErrorCode::TooFewSamples, "need at least K samples (" + std::to_string(n) + " < " + std::to_string(k) + ")");

  std::vector<double> gmean(d, 0.0), gvar(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) gmean[c] += x(r, c);
  for (auto& m : gmean) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) gvar[c] += (x(r, c) - gmean[c]) * (x(r, c) - gmean[c]);
  for (auto& v : gvar) v = std::max(v / static_cast<double>(n), opt.var_floor);

  GmmFitResult res;
  Gmm& g = res.model;
  g.var_floor = opt.var_floor;

  // k-means++ seeding
  Rng rng(derive_seed(seed, 0x6a3));
  std::vector<std::size_t> centers{static_cast<std::size_t>(rng.uniform_int(n))};
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    const auto last = x.row(centers.back());
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += (x(r, c) - last[c]) * (x(r, c) - last[c]);
      d2[r] = std::min(d2[r], s);
      total += d2[r];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (pick = 0; pick + 1 < n; ++pick) {
        u -= d2[pick];
        if (u < 0.0) break;
      }
    } else {
      pick = static_cast<std::size_t>(rng.uniform_int(n));
    }
    centers.push_back(pick);
  }
  for (std::size_t j = 0; j < k; ++j) {
    auto row = x.row(centers[j]);
    g.components.push_back({1.0 / static_cast<double>(k), {row.begin(), row.end()}, gvar});
  }

  Matrix resp(n, k);
  std::vector<double> terms(k), point_ll(n);
  double prev_ll = -std::numeric_limits<double>::infinity();
  bool just_reseeded = false;
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    // E-step
    double ll = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < k; ++j) {
        const auto& c = g.components[j];
        terms[j] = std::log(c.weight) + log_gaussian_diag(x.row(r), c.mean, c.var);
      }
      const double lse = log_sum_exp(terms);
      point_ll[r] = lse;
      ll += lse;
      for (std::size_t j = 0; j < k; ++j) resp(r, j) = std::exp(terms[j] - lse);
    }
    ll /= static_cast<double>(n);
    res.loglik_history.push_back(ll);
    res.iterations = it + 1;
    if (it > 0 && !just_reseeded && ll - prev_ll < opt.tolerance) {
      res.converged = true;
      break;
    }
    just_reseeded = false;
    prev_ll = ll;

    // M-step
    for (std::size_t j = 0; j < k; ++j) {
      auto& c = g.components[j];
      double nk = 0.0;
      for (std::size_t r = 0; r < n; ++r) nk += resp(r, j);
      c.weight = nk / static_cast<double>(n);
      if (c.weight < opt.min_weight) continue;
      std::fill(c.mean.begin(), c.mean.end(), 0.0);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t cc = 0; cc < d; ++cc) c.mean[cc] += resp(r, j) * x(r, cc);
      for (auto& m : c.mean) m /= nk;
      std::fill(c.var.begin(), c.var.end(), 0.0);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t cc = 0; cc < d; ++cc) {
          const double dd = x(r, cc) - c.mean[cc];
          c.var[cc] += resp(r, j) * dd * dd;
        }
      for (auto& v : c.var) v = std::max(v / nk, opt.var_floor);
    }

    for (std::size_t j = 0; j < k; ++j) {
      auto& c = g.components[j];
      if (c.weight >= opt.min_weight) continue;
      require(res.reseeds == 0, ErrorCode::DegenerateComponent,
              "component " + std::to_string(j) + " collapsed again after re-seeding");
      const auto worst = static_cast<std::size_t>(std::min_element(point_ll.begin(), point_ll.end()) - point_ll.begin());
      auto row = x.row(worst);
      c.mean.assign(row.begin(), row.end());
      c.var = gvar;
      c.weight = 1.0 / static_cast<double>(k);
      double total = 0.0;
      for (const auto& cc : g.components) total += cc.weight;
      for (auto& cc : g.components) cc.weight /= total;
      ++res.reseeds;
      res.reseed_iterations.push_back(it + 1);
      just_reseeded = true;
    }
  }
  return res;
}

// Class-conditional GMMs; score > 0 leans fake.
struct GmmPair {
  Gmm real;
  Gmm fake;
  Standardizer scaler;

  double score(std::span<const double> raw) const {
    const auto z = scaler.apply(raw);
    return fake.log_likelihood(z) - real.log_likelihood(z);
  }

  std::uint8_t predict(std::span<const double> raw) const { return score(raw) > 0.0 ? 1 : 0; }

  friend bool operator==(const GmmPair&, const GmmPair&) = default;
};

inline GmmPair train_gmm_pair(const Matrix& x, std::span<const std::uint8_t> labels, std::size_t k, std::uint64_t seed,
                              const GmmOptions& opt = {}) {
  require(x.rows() == labels.size(), ErrorCode::ShapeMismatch, "features/labels length differ");
  require_both_classes(labels);
  GmmPair pair;
  pair.scaler = Standardizer::fit(x);
  const Matrix z = pair.scaler.apply(x);
  std::vector<std::size_t> real_idx, fake_idx;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? fake_idx : real_idx).push_back(i);
  pair.real = fit_gmm(z.gather(real_idx), k, derive_seed(seed, 0), opt).model;
  pair.fake = fit_gmm(z.gather(fake_idx), k, derive_seed(seed, 1), opt).model;
  return pair;
}

// ---------------------------------------------------------------------------
// JSON (f64 arrays as base64 little-endian)

inline nlohmann::ordered_json to_json(const Standardizer& s) {
  return {{"mean", b64::encode_f64(s.mean)}, {"scale", b64::encode_f64(s.scale)}};
}

inline Standardizer standardizer_from_json(const nlohmann::json& j) {
  Standardizer s;
  s.mean = b64::decode_f64(j.at("mean").get<std::string>());
  s.scale = b64::decode_f64(j.at("scale").get<std::string>());
  require(s.mean.size() == s.scale.size(), ErrorCode::ParseError, "standardizer arrays differ in length");
  return s;
}

inline nlohmann::ordered_json to_json(const LinearSvcModel& m) {
  nlohmann::ordered_json j;
  j["kind"] = "linear_svc";
  j["lambda"] = m.lambda;
  j["bias"] = m.bias;
  j["weights"] = b64::encode_f64(m.weights);
  j["scaler"] = to_json(m.scaler);
  return j;
}

inline LinearSvcModel linear_svc_from_json(const nlohmann::json& j) {
  try {
    require(j.at("kind").get<std::string>() == "linear_svc", ErrorCode::ParseError, "not a linear_svc model");
    LinearSvcModel m;
    m.lambda = j.at("lambda").get<double>();
    m.bias = j.at("bias").get<double>();
    m.weights = b64::decode_f64(j.at("weights").get<std::string>());
    m.scaler = standardizer_from_json(j.at("scaler"));
    require(m.weights.size() == m.scaler.mean.size(), ErrorCode::ParseError, "weights/scaler width differ");
    return m;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::ParseError, std::string("linear_svc model: ") + ex.what());
  }
}

inline nlohmann::ordered_json to_json(const Gmm& g) {
  nlohmann::ordered_json j;
  j["var_floor"] = g.var_floor;
  auto& comps = j["components"] = nlohmann::ordered_json::array();
  for (const auto& c : g.components) {
    comps.push_back({{"weight", c.weight}, {"mean", b64::encode_f64(c.mean)}, {"var", b64::encode_f64(c.var)}});
  }
  return j;
}

inline Gmm gmm_from_json(const nlohmann::json& j) {
  Gmm g;
  g.var_floor = j.at("var_floor").get<double>();
  for (const auto& c : j.at("components")) {
    GmmComponent comp;
    comp.weight = c.at("weight").get<double>();
    comp.mean = b64::decode_f64(c.at("mean").get<std::string>());
    comp.var = b64::decode_f64(c.at("var").get<std::string>());
    require(comp.mean.size() == comp.var.size(), ErrorCode::ParseError, "gmm mean/var width differ");
    g.components.push_back(std::move(comp));
  }
  return g;
}

inline nlohmann::ordered_json to_json(const GmmPair& p) {
  nlohmann::ordered_json j;
  j["kind"] = "gmm_pair";
  j["real"] = to_json(p.real);
  j["fake"] = to_json(p.fake);
  j["scaler"] = to_json(p.scaler);
  return j;
}

inline GmmPair gmm_pair_from_json(const nlohmann::json& j) {
  try {
    require(j.at("kind").get<std::string>() == "gmm_pair", ErrorCode::ParseError, "not a gmm_pair model");
    return {gmm_from_json(j.at("real")), gmm_from_json(j.at("fake")), standardizer_from_json(j.at("scaler"))};
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::ParseError, std::string("gmm_pair model: ") + ex.what());
  }
}

}  // namespace fauxnet::alt
