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

#include <cmath>
#include <cstdint>
#include <limits>

#include "fauxnet/error.hpp"
#include "fauxnet/nn/network.hpp"

namespace fauxnet::nn {

struct TrainerConfig {
  double learning_rate = 5e-4;
  double weight_decay = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::size_t batch_size = 256;
  std::size_t max_epochs = 100;
  double plateau_factor = 0.5;
  std::size_t plateau_patience = 3;
  std::size_t early_stop_patience = 10;
  double improvement_tolerance = 1e-6;
  std::uint64_t seed = 0;

  void validate() const {
    require(learning_rate > 0 && std::isfinite(learning_rate), ErrorCode::InvalidConfig, "learning_rate must be > 0");
    require(weight_decay >= 0, ErrorCode::InvalidConfig, "weight_decay must be >= 0");
    require(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1, ErrorCode::InvalidConfig, "betas in [0,1)");
    require(adam_epsilon > 0, ErrorCode::InvalidConfig, "adam_epsilon must be > 0");
    require(plateau_factor > 0 && plateau_factor < 1, ErrorCode::InvalidConfig, "plateau_factor in (0,1)");
    require(plateau_patience > 0 && early_stop_patience > 0, ErrorCode::InvalidConfig, "patiences must be positive");
    require(batch_size >= 1, ErrorCode::InvalidConfig, "batch_size must be >= 1");
    require(max_epochs >= 1, ErrorCode::InvalidConfig, "max_epochs must be >= 1");
  }
};

struct AdamWSettings {
  double lr = 5e-4;
  double weight_decay = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

inline AdamWSettings adamw_settings(const TrainerConfig& c, double lr) {
  return {lr, c.weight_decay, c.beta1, c.beta2, c.adam_epsilon};
}

/// One AdamW step. Decay is decoupled (w <- w - lr*wd*w) and only touches
/// tensors flagged `decay` (linear weights); moments are bias-corrected.
/// Gradients are checked before anything is modified.
inline void adamw_step(ParamSet& params, const Gradients& grads, const AdamWSettings& s) {
  require(grads.size() == params.tensors.size(), ErrorCode::ShapeMismatch, "gradient set does not match parameters");
  for (std::size_t t = 0; t < grads.size(); ++t) {
    require(grads[t].size() == params.tensors[t].value.size(), ErrorCode::ShapeMismatch, "gradient tensor size");
    for (double g : grads[t]) require(std::isfinite(g), ErrorCode::NonFiniteGradient, "non-finite gradient");
  }
  ++params.step;
  const double t = static_cast<double>(params.step);
  const double bc1 = 1.0 - std::pow(s.beta1, t);
  const double bc2 = 1.0 - std::pow(s.beta2, t);
  for (std::size_t ti = 0; ti < grads.size(); ++ti) {
    auto& p = params.tensors[ti];
    const auto& g = grads[ti];
    const double decay = p.decay ? s.lr * s.weight_decay : 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      p.value[i] -= decay * p.value[i];
      p.m[i] = s.beta1 * p.m[i] + (1.0 - s.beta1) * g[i];
      p.v[i] = s.beta2 * p.v[i] + (1.0 - s.beta2) * g[i] * g[i];
      const double mhat = p.m[i] / bc1;
      const double vhat = p.v[i] / bc2;
      p.value[i] -= s.lr * mhat / (std::sqrt(vhat) + s.epsilon);
    }
  }
  ++params.version;
}

struct SchedulerState {
  double lr = 5e-4;
  double best = std::numeric_limits<double>::infinity();
  std::size_t plateau_count = 0;
  std::size_t stale_count = 0;
  bool stopped = false;

  friend bool operator==(const SchedulerState&, const SchedulerState&) = default;
};

struct SchedulerStep {
  double lr = 0;
  bool stop = false;
  bool improved = false;
};

/// Plateau LR decay plus early stopping, driven by validation loss.
///
/// A loss improves when it is below best - tolerance. The plateau counter
/// resets on improvement and after each decay; the LR is multiplied by
/// `factor` when it reaches `plateau_patience`. The stop flag is raised when
/// `early_stop_patience` consecutive epochs fail to improve.
class PlateauScheduler {
 public:
  explicit PlateauScheduler(const TrainerConfig& c)
      : factor_(c.plateau_factor),
        plateau_patience_(c.plateau_patience),
        stop_patience_(c.early_stop_patience),
        tolerance_(c.improvement_tolerance) {
    state_.lr = c.learning_rate;
  }

  SchedulerStep step(double validation_loss) {
    require(std::isfinite(validation_loss), ErrorCode::InvalidConfig, "validation loss must be finite");
    SchedulerStep out;
    if (validation_loss < state_.best - tolerance_) {
      state_.best = validation_loss;
      state_.plateau_count = 0;
      state_.stale_count = 0;
      out.improved = true;
    } else {
      ++state_.plateau_count;
      ++state_.stale_count;
      if (state_.plateau_count >= plateau_patience_) {
        state_.lr *= factor_;
        state_.plateau_count = 0;
      }
      if (state_.stale_count >= stop_patience_) state_.stopped = true;
    }
    out.lr = state_.lr;
    out.stop = state_.stopped;
    return out;
  }

  const SchedulerState& state() const { return state_; }
  void restore(const SchedulerState& s) { state_ = s; }

 private:
  double factor_;
  std::size_t plateau_patience_;
  std::size_t stop_patience_;
  double tolerance_;
  SchedulerState state_;
};

}  // namespace fauxnet::nn
