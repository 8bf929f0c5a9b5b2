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
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace fauxnet::nn {

// A parameter vector and the analytic gradient claimed for it.
struct GradPair {
  std::vector<double>* value;
  const std::vector<double>* analytic;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // perturbation crossed a ReLU kink
};

struct LossProbe {
  double loss;
  std::uint64_t pattern;  // activation pattern; see activation_pattern()
};

/// Central finite differences against analytic gradients.
///
/// relative error = |a - n| / max(|a|, |n|, denom_floor). The floor keeps
/// entries whose true gradient is ~0 from dominating on rounding noise.
/// `probe` must evaluate the loss at the current parameter values; it is
/// called with each entry perturbed by +-h and then restored.
template <typename Probe>
GradCheckResult check_gradients(const std::vector<GradPair>& pairs, Probe&& probe, double h = 1e-5,
                                double denom_floor = 1e-6) {
  GradCheckResult res;
  const std::uint64_t base_pattern = probe().pattern;
  for (const auto& p : pairs) {
    auto& values = *p.value;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const LossProbe up = probe();
      values[i] = saved - h;
      const LossProbe down = probe();
      values[i] = saved;
      if (up.pattern != base_pattern || down.pattern != base_pattern) {
        ++res.skipped;
        continue;
      }
      const double numeric = (up.loss - down.loss) / (2.0 * h);
      const double analytic = (*p.analytic)[i];
      const double abs_err = std::abs(numeric - analytic);
      const double denom = std::max({std::abs(numeric), std::abs(analytic), denom_floor});
      res.max_abs_error = std::max(res.max_abs_error, abs_err);
      res.max_rel_error = std::max(res.max_rel_error, abs_err / denom);
      ++res.checked;
    }
  }
  return res;
}

}  // namespace fauxnet::nn
