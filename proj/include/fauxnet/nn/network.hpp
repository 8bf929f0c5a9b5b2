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

// Dense feed-forward network over a fixed layer set (linear, batchnorm1d,
// relu, dropout) with analytic backpropagation.
//
// forward() is const: in train mode it records batch statistics on the tape,
// and update_running_stats() folds them into the running estimates. This keeps
// forward/backward pure given (params, batch, rng state).

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fauxnet/error.hpp"
#include "fauxnet/hash.hpp"
#include "fauxnet/nn/matrix.hpp"
#include "fauxnet/rng.hpp"

namespace fauxnet::nn {

enum class LayerKind : std::uint8_t { linear = 0, batchnorm1d = 1, relu = 2, dropout = 3 };

enum class Mode { train, infer };

struct LayerSpec {
  LayerKind kind = LayerKind::linear;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  double keep_prob = 1.0;  // dropout only
  double momentum = 0.1;   // batchnorm only
  double epsilon = 1e-5;   // batchnorm only

  static LayerSpec linear(std::size_t in, std::size_t out) { return {LayerKind::linear, in, out}; }
  static LayerSpec batchnorm(std::size_t dim, double momentum = 0.1, double epsilon = 1e-5) {
    return {LayerKind::batchnorm1d, dim, dim, 1.0, momentum, epsilon};
  }
  static LayerSpec relu(std::size_t dim) { return {LayerKind::relu, dim, dim}; }
  // `drop_prob` is the probability of zeroing a unit.
  static LayerSpec dropout(std::size_t dim, double drop_prob) {
    return {LayerKind::dropout, dim, dim, 1.0 - drop_prob};
  }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

inline void validate(const LayerSpec& s) {
  require(s.in_dim > 0 && s.out_dim > 0, ErrorCode::InvalidConfig, "layer dims must be positive");
  if (s.kind != LayerKind::linear) {
    require(s.in_dim == s.out_dim, ErrorCode::InvalidConfig, "non-linear layers preserve width");
  }
  if (s.kind == LayerKind::dropout) {
    require(s.keep_prob > 0.0 && s.keep_prob <= 1.0, ErrorCode::InvalidConfig, "dropout keep probability in (0,1]");
  }
  if (s.kind == LayerKind::batchnorm1d) {
    require(s.epsilon > 0.0, ErrorCode::InvalidConfig, "batchnorm epsilon must be positive");
    require(s.momentum > 0.0 && s.momentum <= 1.0, ErrorCode::InvalidConfig, "batchnorm momentum in (0,1]");
  }
}

// One learnable tensor plus its AdamW moments.
struct ParamTensor {
  std::vector<double> value;
  std::vector<double> m;
  std::vector<double> v;
  bool decay = true;  // weight decay applies (linear weights only)

  explicit ParamTensor(std::size_t n = 0, bool decay_ = true) : value(n), m(n), v(n), decay(decay_) {}
  friend bool operator==(const ParamTensor&, const ParamTensor&) = default;
};

struct ParamSet {
  std::vector<ParamTensor> tensors;
  std::vector<std::vector<double>> buffers;  // batchnorm running mean / variance
  std::uint64_t step = 0;                    // optimizer steps taken
  std::uint64_t version = 0;                 // bumped on every parameter update

  friend bool operator==(const ParamSet& a, const ParamSet& b) {
    return a.tensors == b.tensors && a.buffers == b.buffers && a.step == b.step;
  }
};

using Gradients = std::vector<std::vector<double>>;

struct LayerCache {
  Matrix input;
  Matrix xhat;                  // batchnorm normalized input
  std::vector<double> inv_std;  // batchnorm 1/sqrt(var + eps) used in this pass
  std::vector<double> batch_mean;
  std::vector<double> batch_var;  // biased
  std::vector<double> mask;       // dropout: 0 or 1/keep
};

struct Tape {
  Mode mode = Mode::infer;
  std::uint64_t version = 0;
  std::size_t batch = 0;
  std::vector<LayerCache> caches;
};

class Network {
 public:
  Network() = default;

  explicit Network(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
    require(!layers_.empty(), ErrorCode::InvalidConfig, "network needs at least one layer");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      validate(layers_[i]);
      if (i > 0) {
        require(layers_[i].in_dim == layers_[i - 1].out_dim, ErrorCode::InvalidConfig,
                "layer " + std::to_string(i) + " input width does not match previous output");
      }
    }
    allocate();
  }

  const std::vector<LayerSpec>& layers() const { return layers_; }
  std::size_t in_dim() const { return layers_.front().in_dim; }
  std::size_t out_dim() const { return layers_.back().out_dim; }

  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  // First tensor / buffer index of layer i (-1 when the layer has none).
  long tensor_base(std::size_t i) const { return tensor_base_[i]; }
  long buffer_base(std::size_t i) const { return buffer_base_[i]; }

  /// Uniform +-sqrt(1/fan_in) weights, zero biases, unit batchnorm scale.
  void initialize(Rng& rng) {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& s = layers_[i];
      if (s.kind == LayerKind::linear) {
        const double bound = std::sqrt(1.0 / static_cast<double>(s.in_dim));
        for (auto& w : params_.tensors[tensor_base_[i]].value) w = rng.uniform(-bound, bound);
        std::fill(params_.tensors[tensor_base_[i] + 1].value.begin(),
                  params_.tensors[tensor_base_[i] + 1].value.end(), 0.0);
      } else if (s.kind == LayerKind::batchnorm1d) {
        std::fill(params_.tensors[tensor_base_[i]].value.begin(), params_.tensors[tensor_base_[i]].value.end(), 1.0);
        std::fill(params_.tensors[tensor_base_[i] + 1].value.begin(),
                  params_.tensors[tensor_base_[i] + 1].value.end(), 0.0);
        std::fill(params_.buffers[buffer_base_[i]].begin(), params_.buffers[buffer_base_[i]].end(), 0.0);
        std::fill(params_.buffers[buffer_base_[i] + 1].begin(), params_.buffers[buffer_base_[i] + 1].end(), 1.0);
      }
    }
    ++params_.version;
  }

  Gradients zero_gradients() const {
    Gradients g;
    g.reserve(params_.tensors.size());
    for (const auto& t : params_.tensors) g.emplace_back(t.value.size(), 0.0);
    return g;
  }

  friend bool operator==(const Network& a, const Network& b) {
    return a.layers_ == b.layers_ && a.params_ == b.params_;
  }

 private:
  void allocate() {
    params_ = {};
    tensor_base_.assign(layers_.size(), -1);
    buffer_base_.assign(layers_.size(), -1);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& s = layers_[i];
      if (s.kind == LayerKind::linear) {
        tensor_base_[i] = static_cast<long>(params_.tensors.size());
        params_.tensors.emplace_back(s.in_dim * s.out_dim, true);
        params_.tensors.emplace_back(s.out_dim, false);
      } else if (s.kind == LayerKind::batchnorm1d) {
        tensor_base_[i] = static_cast<long>(params_.tensors.size());
        params_.tensors.emplace_back(s.out_dim, false);
        params_.tensors.back().value.assign(s.out_dim, 1.0);
        params_.tensors.emplace_back(s.out_dim, false);
        buffer_base_[i] = static_cast<long>(params_.buffers.size());
        params_.buffers.emplace_back(s.out_dim, 0.0);
        params_.buffers.emplace_back(s.out_dim, 1.0);
      }
    }
  }

  std::vector<LayerSpec> layers_;
  ParamSet params_;
  std::vector<long> tensor_base_;
  std::vector<long> buffer_base_;
};

struct ForwardResult {
  Matrix output;
  Tape tape;
};

/// Runs the network. Train mode uses batch statistics and samples dropout
/// masks from `rng` (inverted scaling); infer mode uses running statistics
/// and treats dropout as identity.
inline ForwardResult forward(const Network& net, const Matrix& batch, Mode mode, Rng& rng) {
  require_shape(batch, net.in_dim(), "forward input");
  const std::size_t B = batch.rows();
  for (double v : batch.data()) require(std::isfinite(v), ErrorCode::NonFiniteValue, "forward input not finite");

  ForwardResult res;
  res.tape.mode = mode;
  res.tape.version = net.params().version;
  res.tape.batch = B;
  res.tape.caches.resize(net.layers().size());

  Matrix x = batch;
  const auto& P = net.params();
  for (std::size_t li = 0; li < net.layers().size(); ++li) {
    const auto& s = net.layers()[li];
    auto& cache = res.tape.caches[li];
    cache.input = x;
    switch (s.kind) {
      case LayerKind::linear: {
        const auto& W = P.tensors[net.tensor_base(li)].value;
        const auto& b = P.tensors[net.tensor_base(li) + 1].value;
        Matrix y(B, s.out_dim);
        for (std::size_t r = 0; r < B; ++r) {
          auto xr = x.row(r);
          auto yr = y.row(r);
          for (std::size_t o = 0; o < s.out_dim; ++o) {
            const double* w = W.data() + o * s.in_dim;
            double acc = 0.0;
            for (std::size_t k = 0; k < s.in_dim; ++k) acc += w[k] * xr[k];
            yr[o] = acc + b[o];
          }
        }
        x = std::move(y);
        break;
      }
      case LayerKind::batchnorm1d: {
        const auto& gamma = P.tensors[net.tensor_base(li)].value;
        const auto& beta = P.tensors[net.tensor_base(li) + 1].value;
        const std::size_t D = s.out_dim;
        std::vector<double> mean(D, 0.0), var(D, 0.0);
        if (mode == Mode::train) {
          require(B >= 2, ErrorCode::BatchTooSmall, "batchnorm in train mode needs at least 2 samples");
          for (std::size_t r = 0; r < B; ++r)
            for (std::size_t c = 0; c < D; ++c) mean[c] += x(r, c);
          for (auto& m : mean) m /= static_cast<double>(B);
          for (std::size_t r = 0; r < B; ++r)
            for (std::size_t c = 0; c < D; ++c) {
              const double d = x(r, c) - mean[c];
              var[c] += d * d;
            }
          for (auto& v : var) v /= static_cast<double>(B);
        } else {
          mean = P.buffers[net.buffer_base(li)];
          var = P.buffers[net.buffer_base(li) + 1];
        }
        cache.inv_std.resize(D);
        for (std::size_t c = 0; c < D; ++c) cache.inv_std[c] = 1.0 / std::sqrt(var[c] + s.epsilon);
        cache.xhat = Matrix(B, D);
        Matrix y(B, D);
        for (std::size_t r = 0; r < B; ++r)
          for (std::size_t c = 0; c < D; ++c) {
            const double xh = (x(r, c) - mean[c]) * cache.inv_std[c];
            cache.xhat(r, c) = xh;
            y(r, c) = gamma[c] * xh + beta[c];
          }
        cache.batch_mean = std::move(mean);
        cache.batch_var = std::move(var);
        x = std::move(y);
        break;
      }
      case LayerKind::relu: {
        for (auto& v : x.data()) v = v > 0.0 ? v : 0.0;
        break;
      }
      case LayerKind::dropout: {
        if (mode == Mode::train && s.keep_prob < 1.0) {
          cache.mask.resize(x.data().size());
          const double scale = 1.0 / s.keep_prob;
          for (std::size_t i = 0; i < cache.mask.size(); ++i) {
            cache.mask[i] = rng.bernoulli(s.keep_prob) ? scale : 0.0;
            x.data()[i] *= cache.mask[i];
          }
        }
        break;
      }
    }
  }
  res.output = std::move(x);
  return res;
}

// Inference convenience; dropout is inactive so no randomness is consumed.
inline Matrix infer(const Network& net, const Matrix& batch) {
  Rng unused(0);
  return forward(net, batch, Mode::infer, unused).output;
}

/// Folds a train-mode tape's batch statistics into the running estimates
/// (running variance uses the unbiased batch variance).
inline void update_running_stats(Network& net, const Tape& tape) {
  if (tape.mode != Mode::train) return;
  require(tape.caches.size() == net.layers().size(), ErrorCode::StaleTape, "tape does not match network");
  auto& P = net.params();
  for (std::size_t li = 0; li < net.layers().size(); ++li) {
    const auto& s = net.layers()[li];
    if (s.kind != LayerKind::batchnorm1d) continue;
    const auto& c = tape.caches[li];
    auto& rm = P.buffers[net.buffer_base(li)];
    auto& rv = P.buffers[net.buffer_base(li) + 1];
    const double n = static_cast<double>(tape.batch);
    for (std::size_t k = 0; k < rm.size(); ++k) {
      rm[k] = (1.0 - s.momentum) * rm[k] + s.momentum * c.batch_mean[k];
      rv[k] = (1.0 - s.momentum) * rv[k] + s.momentum * c.batch_var[k] * n / (n - 1.0);
    }
  }
}

struct BackwardResult {
  Gradients grads;
  Matrix input_grad;
};

/// Gradients of a scalar loss w.r.t. every parameter and the network input,
/// given d loss / d output. Reuses the tape's dropout masks.
inline BackwardResult backward(const Network& net, const Tape& tape, const Matrix& output_grad) {
  require(tape.version == net.params().version && tape.caches.size() == net.layers().size(), ErrorCode::StaleTape,
          "tape was recorded against different parameters");
  require(output_grad.rows() == tape.batch, ErrorCode::ShapeMismatch, "output gradient batch size");
  require_shape(output_grad, net.out_dim(), "output gradient");

  BackwardResult res;
  res.grads = net.zero_gradients();
  const auto& P = net.params();
  const std::size_t B = tape.batch;
  Matrix g = output_grad;

  for (std::size_t li = net.layers().size(); li-- > 0;) {
    const auto& s = net.layers()[li];
    const auto& cache = tape.caches[li];
    switch (s.kind) {
      case LayerKind::linear: {
        const auto& W = P.tensors[net.tensor_base(li)].value;
        auto& dW = res.grads[net.tensor_base(li)];
        auto& db = res.grads[net.tensor_base(li) + 1];
        Matrix dx(B, s.in_dim);
        for (std::size_t r = 0; r < B; ++r) {
          auto gr = g.row(r);
          auto xr = cache.input.row(r);
          auto dxr = dx.row(r);
          for (std::size_t o = 0; o < s.out_dim; ++o) {
            const double go = gr[o];
            db[o] += go;
            double* dw = dW.data() + o * s.in_dim;
            const double* w = W.data() + o * s.in_dim;
            for (std::size_t k = 0; k < s.in_dim; ++k) {
              dw[k] += go * xr[k];
              dxr[k] += go * w[k];
            }
          }
        }
        g = std::move(dx);
        break;
      }
      case LayerKind::batchnorm1d: {
        const auto& gamma = P.tensors[net.tensor_base(li)].value;
        auto& dgamma = res.grads[net.tensor_base(li)];
        auto& dbeta = res.grads[net.tensor_base(li) + 1];
        const std::size_t D = s.out_dim;
        std::vector<double> sum_dxhat(D, 0.0), sum_dxhat_xhat(D, 0.0);
        for (std::size_t r = 0; r < B; ++r)
          for (std::size_t c = 0; c < D; ++c) {
            const double dy = g(r, c);
            dgamma[c] += dy * cache.xhat(r, c);
            dbeta[c] += dy;
            const double dxh = dy * gamma[c];
            sum_dxhat[c] += dxh;
            sum_dxhat_xhat[c] += dxh * cache.xhat(r, c);
          }
        Matrix dx(B, D);
        if (tape.mode == Mode::train) {
          const double n = static_cast<double>(B);
          for (std::size_t r = 0; r < B; ++r)
            for (std::size_t c = 0; c < D; ++c) {
              const double dxh = g(r, c) * gamma[c];
              dx(r, c) = cache.inv_std[c] / n * (n * dxh - sum_dxhat[c] - cache.xhat(r, c) * sum_dxhat_xhat[c]);
            }
        } else {
          for (std::size_t r = 0; r < B; ++r)
            for (std::size_t c = 0; c < D; ++c) dx(r, c) = g(r, c) * gamma[c] * cache.inv_std[c];
        }
        g = std::move(dx);
        break;
      }
      case LayerKind::relu: {
        for (std::size_t i = 0; i < g.data().size(); ++i) {
          if (!(cache.input.data()[i] > 0.0)) g.data()[i] = 0.0;
        }
        break;
      }
      case LayerKind::dropout: {
        if (!cache.mask.empty()) {
          for (std::size_t i = 0; i < g.data().size(); ++i) g.data()[i] *= cache.mask[i];
        }
        break;
      }
    }
  }
  res.input_grad = std::move(g);
  return res;
}

// Hash of every ReLU on/off decision in a tape. Finite-difference checks use
// it to discard perturbations that cross a kink.
inline std::uint64_t activation_pattern(const Network& net, const Tape& tape) {
  std::uint64_t h = fnv1a64("relu");
  for (std::size_t li = 0; li < net.layers().size(); ++li) {
    if (net.layers()[li].kind != LayerKind::relu) continue;
    for (double v : tape.caches[li].input.data()) {
      const char bit = v > 0.0 ? '1' : '0';
      h = fnv1a64(std::string_view(&bit, 1), h);
    }
  }
  return h;
}

/// Hidden-block pyramid: per width, Linear -> BatchNorm -> ReLU -> Dropout.
inline std::vector<LayerSpec> mlp_trunk(std::size_t in_dim, const std::vector<std::size_t>& widths,
                                        double drop_prob = 0.5, double bn_momentum = 0.1, double bn_epsilon = 1e-5) {
  std::vector<LayerSpec> layers;
  std::size_t prev = in_dim;
  for (std::size_t w : widths) {
    layers.push_back(LayerSpec::linear(prev, w));
    layers.push_back(LayerSpec::batchnorm(w, bn_momentum, bn_epsilon));
    layers.push_back(LayerSpec::relu(w));
    if (drop_prob > 0.0) layers.push_back(LayerSpec::dropout(w, drop_prob));
    prev = w;
  }
  return layers;
}

}  // namespace fauxnet::nn
