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

// Run configuration: a flat `key = value` file with [sections]. Every key is
// also addressable as "section.key" so command-line flags can override it.
// Unknown keys, duplicate keys and malformed values are rejected.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fauxnet/data_model.hpp"
#include "fauxnet/error.hpp"
#include "fauxnet/fauxnet.hpp"
#include "fauxnet/hash.hpp"
#include "fauxnet/nn/optim.hpp"
#include "fauxnet/synth.hpp"
#include "fauxnet/text_metrics.hpp"

namespace fauxnet {

struct RunPaths {
  std::filesystem::path bank;
  std::filesystem::path corpus;
  std::filesystem::path split;
  std::filesystem::path checkpoint;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out_root = "runs";
  nn::TrainerConfig trainer;
  FauxNetConfig model{.input_dim = 0};  // 0: take the width from the bank
  SplitRatios ratios = kVoxRatios;
  synth::SynthSpec synth;
  text::TieRule tie = text::TieRule::fake;
  RunPaths paths;

  // Component configs with the run seed applied.
  nn::TrainerConfig trainer_config() const {
    auto t = trainer;
    t.seed = seed;
    return t;
  }
  synth::SynthSpec synth_spec() const {
    auto s = synth;
    s.seed = seed;
    return s;
  }
  FauxNetConfig model_config(std::size_t bank_dim) const {
    auto m = model;
    if (m.input_dim == 0) m.input_dim = bank_dim;
    require(m.input_dim == bank_dim, ErrorCode::DimensionMismatch,
            "model.input_dim " + std::to_string(m.input_dim) + " != bank dim " + std::to_string(bank_dim));
    return m;
  }
};

namespace cfg_detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string_view::npos) end = s.size();
    auto item = trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = end + 1;
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, std::string_view v) {
  T out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  require(ec == std::errc{} && p == v.data() + v.size() && !v.empty(), ErrorCode::InvalidConfig,
          key + ": cannot parse '" + std::string(v) + "'");
  if constexpr (std::is_floating_point_v<T>)
    require(std::isfinite(out), ErrorCode::InvalidConfig, key + ": value must be finite");
  return out;
}

inline bool parse_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorCode::InvalidConfig, key + ": expected true/false, got '" + std::string(v) + "'");
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& v, auto&& f) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + f(v[i]);
  return s;
}

struct Field {
  std::string name;  // section.key
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
  bool hashed = true;
};

#define FAUXNET_NUM_FIELD(NAME, T, MEMBER)                                                                  \
  Field {                                                                                                   \
    NAME, [](const RunConfig& c) { return std::to_string(c.MEMBER); },                                      \
        [](RunConfig& c, const std::string& v) { c.MEMBER = parse_number<T>(NAME, v); }                     \
  }
#define FAUXNET_REAL_FIELD(NAME, MEMBER)                                                                    \
  Field {                                                                                                   \
    NAME, [](const RunConfig& c) { return fmt(c.MEMBER); },                                                 \
        [](RunConfig& c, const std::string& v) { c.MEMBER = parse_number<double>(NAME, v); }                \
  }
#define FAUXNET_PATH_FIELD(NAME, MEMBER, HASHED)                                                            \
  Field {                                                                                                   \
    NAME, [](const RunConfig& c) { return c.MEMBER.string(); },                                             \
        [](RunConfig& c, const std::string& v) { c.MEMBER = v; }, HASHED                                    \
  }

inline const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f{
        FAUXNET_NUM_FIELD("run.seed", std::uint64_t, seed),
        FAUXNET_PATH_FIELD("run.out_root", out_root, false),

        FAUXNET_REAL_FIELD("trainer.learning_rate", trainer.learning_rate),
        FAUXNET_REAL_FIELD("trainer.weight_decay", trainer.weight_decay),
        FAUXNET_REAL_FIELD("trainer.beta1", trainer.beta1),
        FAUXNET_REAL_FIELD("trainer.beta2", trainer.beta2),
        FAUXNET_REAL_FIELD("trainer.adam_epsilon", trainer.adam_epsilon),
        FAUXNET_NUM_FIELD("trainer.batch_size", std::size_t, trainer.batch_size),
        FAUXNET_NUM_FIELD("trainer.max_epochs", std::size_t, trainer.max_epochs),
        FAUXNET_REAL_FIELD("trainer.plateau_factor", trainer.plateau_factor),
        FAUXNET_NUM_FIELD("trainer.plateau_patience", std::size_t, trainer.plateau_patience),
        FAUXNET_NUM_FIELD("trainer.early_stop_patience", std::size_t, trainer.early_stop_patience),
        FAUXNET_REAL_FIELD("trainer.improvement_tolerance", trainer.improvement_tolerance),

        FAUXNET_NUM_FIELD("model.input_dim", std::size_t, model.input_dim),
        Field{"model.hidden",
              [](const RunConfig& c) { return join(c.model.hidden, [](std::size_t x) { return std::to_string(x); }); },
              [](RunConfig& c, const std::string& v) {
                c.model.hidden.clear();
                for (const auto& item : split_list(v)) c.model.hidden.push_back(parse_number<std::size_t>("model.hidden", item));
              }},
        FAUXNET_NUM_FIELD("model.num_classes", std::size_t, model.num_classes),
        FAUXNET_REAL_FIELD("model.drop_prob", model.drop_prob),
        FAUXNET_REAL_FIELD("model.bn_momentum", model.bn_momentum),
        FAUXNET_REAL_FIELD("model.bn_epsilon", model.bn_epsilon),
        Field{"model.class_weighting", [](const RunConfig& c) { return std::string(c.model.class_weighting ? "true" : "false"); },
              [](RunConfig& c, const std::string& v) { c.model.class_weighting = parse_bool("model.class_weighting", v); }},

        FAUXNET_REAL_FIELD("split.train", ratios[0]),
        FAUXNET_REAL_FIELD("split.val", ratios[1]),
        FAUXNET_REAL_FIELD("split.test", ratios[2]),

        FAUXNET_NUM_FIELD("synth.dim", std::size_t, synth.dim),
        FAUXNET_NUM_FIELD("synth.identities", std::size_t, synth.identities),
        FAUXNET_NUM_FIELD("synth.videos_per_identity", std::size_t, synth.videos_per_identity),
        FAUXNET_NUM_FIELD("synth.chunks_per_video", std::size_t, synth.chunks_per_video),
        Field{"synth.techniques",
              [](const RunConfig& c) { return join(c.synth.techniques, [](Technique t) { return std::string(to_string(t)); }); },
              [](RunConfig& c, const std::string& v) {
                c.synth.techniques.clear();
                for (const auto& item : split_list(v)) c.synth.techniques.push_back(parse_technique(item));
              }},
        FAUXNET_REAL_FIELD("synth.separation", synth.separation),
        FAUXNET_REAL_FIELD("synth.sigma", synth.sigma),
        FAUXNET_NUM_FIELD("synth.vocab_size", std::size_t, synth.vocab_size),
        FAUXNET_NUM_FIELD("synth.min_words", std::size_t, synth.min_words),
        FAUXNET_NUM_FIELD("synth.max_words", std::size_t, synth.max_words),
        FAUXNET_REAL_FIELD("synth.real_substitute", synth.real_rates.substitute),
        FAUXNET_REAL_FIELD("synth.real_delete", synth.real_rates.remove),
        FAUXNET_REAL_FIELD("synth.real_insert", synth.real_rates.insert),
        FAUXNET_REAL_FIELD("synth.fake_substitute", synth.fake_rates[0].substitute),
        FAUXNET_REAL_FIELD("synth.fake_delete", synth.fake_rates[0].remove),
        FAUXNET_REAL_FIELD("synth.fake_insert", synth.fake_rates[0].insert),

        Field{"text.tie_rule", [](const RunConfig& c) { return std::string(c.tie == text::TieRule::fake ? "fake" : "real"); },
              [](RunConfig& c, const std::string& v) {
                if (v == "fake") c.tie = text::TieRule::fake;
                else if (v == "real") c.tie = text::TieRule::real;
                else fail(ErrorCode::InvalidConfig, "text.tie_rule: expected fake or real");
              }},

        FAUXNET_PATH_FIELD("paths.bank", paths.bank, true),
        FAUXNET_PATH_FIELD("paths.corpus", paths.corpus, true),
        FAUXNET_PATH_FIELD("paths.split", paths.split, true),
        FAUXNET_PATH_FIELD("paths.checkpoint", paths.checkpoint, true),
    };
    return f;
  }();
  return table;
}

#undef FAUXNET_NUM_FIELD
#undef FAUXNET_REAL_FIELD
#undef FAUXNET_PATH_FIELD

inline const Field& field(const std::string& name) {
  for (const auto& f : fields())
    if (f.name == name) return f;
  fail(ErrorCode::InvalidConfig, "unknown config key '" + name + "'");
}

}  // namespace cfg_detail

inline std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : cfg_detail::fields()) out.push_back(f.name);
  return out;
}

/// Sets one "section.key" value.
inline void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
  cfg_detail::field(key).set(c, cfg_detail::trim(value));
}

inline std::string get_config_value(const RunConfig& c, const std::string& key) { return cfg_detail::field(key).get(c); }

/// Checks cross-field constraints that individual setters cannot see.
inline void validate(const RunConfig& c) {
  c.trainer.validate();
  auto m = c.model;
  if (m.input_dim == 0) m.input_dim = 1;
  m.validate();
  validate_ratios(c.ratios);
  synth::validate(c.synth_spec());
}

/// Applies `key = value` lines onto `c`. Blank lines and lines starting with
/// '#' or ';' are ignored.
inline void parse_config_into(RunConfig& c, std::string_view text) {
  std::string section;
  std::set<std::string> seen;
  std::size_t line_no = 0, start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string line = cfg_detail::trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      require(line.back() == ']' && line.size() > 2, ErrorCode::InvalidConfig, where + "malformed section header");
      section = cfg_detail::trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::InvalidConfig, where + "expected key = value");
    require(!section.empty(), ErrorCode::InvalidConfig, where + "key outside any [section]");
    const std::string key = section + "." + cfg_detail::trim(std::string_view(line).substr(0, eq));
    require(seen.insert(key).second, ErrorCode::InvalidConfig, where + "duplicate key '" + key + "'");
    try {
      set_config_value(c, key, line.substr(eq + 1));
    } catch (const Error& e) {
      fail(e.code(), where + e.what());
    }
  }
}

inline RunConfig parse_config(std::string_view text) {
  RunConfig c;
  parse_config_into(c, text);
  return c;
}

/// Canonical serialization: every key, in table order, full precision.
inline std::string to_ini(const RunConfig& c, bool hashed_only = false) {
  std::string out, section;
  for (const auto& f : cfg_detail::fields()) {
    if (hashed_only && !f.hashed) continue;
    const auto dot = f.name.find('.');
    const auto sec = f.name.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out += '\n';
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += f.name.substr(dot + 1) + " = " + f.get(c) + "\n";
  }
  return out;
}

/// Hash of every result-affecting key; the output root is excluded.
inline std::string config_hash(const RunConfig& c) { return hex64(fnv1a64(to_ini(c, true))); }

/// Makes every non-empty path absolute against `base`.
inline void resolve_paths(RunConfig& c, const std::filesystem::path& base) {
  auto fix = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = std::filesystem::absolute(base / p).lexically_normal();
  };
  fix(c.out_root);
  fix(c.paths.bank);
  fix(c.paths.corpus);
  fix(c.paths.split);
  fix(c.paths.checkpoint);
}

}  // namespace fauxnet
