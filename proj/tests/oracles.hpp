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

// Slow, independent reference implementations used as test oracles. None of
// them share code with the library; each uses a different algorithm or
// traversal order from the production path.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "fauxnet/rng.hpp"

namespace oracle {

using Tokens = std::vector<std::string>;

// Levenshtein by top-down memoized recursion over suffixes.
inline std::size_t edit_distance(const Tokens& a, const Tokens& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<long>> memo(n + 1, std::vector<long>(m + 1, -1));
  std::function<long(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> long {
    if (i == n) return static_cast<long>(m - j);
    if (j == m) return static_cast<long>(n - i);
    long& slot = memo[i][j];
    if (slot >= 0) return slot;
    long best = go(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
    best = std::min(best, go(i + 1, j) + 1);
    best = std::min(best, go(i, j + 1) + 1);
    return slot = best;
  };
  return static_cast<std::size_t>(go(0, 0));
}

// LCS by memoized recursion over suffixes.
inline std::size_t lcs(const Tokens& a, const Tokens& b) {
  std::vector<std::vector<long>> memo(a.size() + 1, std::vector<long>(b.size() + 1, -1));
  std::function<long(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> long {
    if (i == a.size() || j == b.size()) return 0;
    long& slot = memo[i][j];
    if (slot >= 0) return slot;
    if (a[i] == b[j]) return slot = 1 + go(i + 1, j + 1);
    return slot = std::max(go(i + 1, j), go(i, j + 1));
  };
  return static_cast<std::size_t>(go(0, 0));
}

// Clipped n-gram overlap as a sorted multiset intersection.
inline std::size_t ngram_overlap(const Tokens& ref, const Tokens& hyp, std::size_t n) {
  auto grams = [n](const Tokens& t) {
    std::vector<Tokens> g;
    for (std::size_t i = 0; i + n <= t.size(); ++i) g.emplace_back(t.begin() + i, t.begin() + i + n);
    std::sort(g.begin(), g.end());
    return g;
  };
  const auto a = grams(ref), b = grams(hyp);
  std::size_t i = 0, j = 0, common = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++common;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return common;
}

// AUC by counting every (positive, negative) pair: (2*wins + ties) / (2*n+*n-).
inline double pairwise_auc(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  std::uint64_t twice = 0, pos = 0, neg = 0;
  for (auto l : y) (l ? pos : neg)++;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      twice += s[i] > s[j] ? 2 : s[i] == s[j] ? 1 : 0;
    }
  }
  return static_cast<double>(twice) / static_cast<double>(2 * pos * neg);
}

struct MatchStats {
  std::size_t matches = 0;
  std::size_t min_chunks = 0;
};

// Enumerates every maximum exact-match alignment and reports the fewest
// chunks (runs adjacent in both sequences). Exponential; small inputs only.
inline MatchStats meteor_min_chunks(const Tokens& ref, const Tokens& hyp) {
  std::map<std::string, std::size_t> cr, ch;
  for (const auto& t : ref) ++cr[t];
  for (const auto& t : hyp) ++ch[t];
  std::size_t max_m = 0;
  for (const auto& [t, c] : ch) max_m += std::min(c, cr[t]);
  MatchStats best{max_m, std::numeric_limits<std::size_t>::max()};
  if (max_m == 0) {
    best.min_chunks = 0;
    return best;
  }
  std::vector<bool> used(ref.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::map<std::string, std::size_t> remaining_h;  // unmatched hyp tokens still to place
  std::function<void(std::size_t, std::size_t)> go = [&](std::size_t h, std::size_t matched) {
    if (matched + (hyp.size() - h) < max_m) return;
    if (h == hyp.size()) {
      if (matched != max_m) return;
      std::size_t chunks = 1;
      for (std::size_t i = 1; i < pairs.size(); ++i)
        if (!(pairs[i].first == pairs[i - 1].first + 1 && pairs[i].second == pairs[i - 1].second + 1)) ++chunks;
      best.min_chunks = std::min(best.min_chunks, chunks);
      return;
    }
    for (std::size_t r = 0; r < ref.size(); ++r) {
      if (used[r] || ref[r] != hyp[h]) continue;
      used[r] = true;
      pairs.emplace_back(h, r);
      go(h + 1, matched + 1);
      pairs.pop_back();
      used[r] = false;
    }
    go(h + 1, matched);  // leave this token unmatched
  };
  go(0, 0);
  return best;
}

// Scalar AdamW, written directly from the update rule.
struct ScalarAdamW {
  double lr, beta1, beta2, eps, wd;
  double m = 0, v = 0;
  int t = 0;
  double step(double w, double g) {
    ++t;
    w = w - lr * wd * w;
    m = beta1 * m + (1 - beta1) * g;
    v = beta2 * v + (1 - beta2) * g * g;
    const double mhat = m / (1 - std::pow(beta1, t));
    const double vhat = v / (1 - std::pow(beta2, t));
    return w - lr * mhat / (std::sqrt(vhat) + eps);
  }
};

// Best "real iff score >= tau" accuracy by trying every candidate directly.
inline std::pair<double, double> threshold_scan(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  std::vector<double> u = s;
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  std::vector<double> cand{0.0, 1.0};
  for (std::size_t i = 1; i < u.size(); ++i) cand.push_back((u[i - 1] + u[i]) / 2);
  std::sort(cand.begin(), cand.end());
  double best_acc = -1, best_tau = 0;
  for (double t : cand) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < s.size(); ++i) ok += ((s[i] >= t) == (y[i] == 0)) ? 1 : 0;
    const double acc = static_cast<double>(ok) / static_cast<double>(s.size());
    if (acc > best_acc) {
      best_acc = acc;
      best_tau = t;
    }
  }
  return {best_tau, best_acc};
}

inline Tokens random_tokens(fauxnet::Rng& rng, std::size_t max_len, std::size_t vocab) {
  Tokens t(rng.uniform_int(max_len + 1));
  for (auto& w : t) w = "t" + std::to_string(rng.uniform_int(vocab));
  return t;
}

inline double normal_pdf(double x, double mu = 0, double sd = 1) {
  const double z = (x - mu) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2 * 3.14159265358979323846));
}

}  // namespace oracle
