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

// fauxnet command-line driver.
//
// Exit status: 0 success, 1 usage error, 2 data or validation error.
// Every command writes into a run directory <out_root>/<UTC time>-<config hash>
// (or --out) holding metadata.json, config.ini and the command's artifacts.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"
#include "fauxnet/config.hpp"
#include "fauxnet/data_model.hpp"
#include "fauxnet/eval.hpp"
#include "fauxnet/fauxnet.hpp"
#include "fauxnet/synth.hpp"
#include "fauxnet/text_metrics.hpp"

namespace fs = std::filesystem;
using namespace fauxnet;
using json = nlohmann::ordered_json;

namespace {

// Raised for bad flags or missing inputs; reported with exit status 1.
struct UsageError {
  std::string message;
};

// A flag that overrides one config key.
struct KeyFlag {
  std::string flag;
  std::string key;
  std::string value;
  CLI::Option* opt = nullptr;
};

struct Context {
  std::string config_file;
  std::vector<std::string> sets;
  std::string out_dir;
  std::vector<KeyFlag> flags;  // stable addresses: reserved up front
  RunConfig cfg;
};

void add_key_flag(Context& ctx, CLI::App* app, const std::string& flag, const std::string& key,
                  const std::string& help) {
  ctx.flags.push_back({flag, key, {}, nullptr});
  auto& f = ctx.flags.back();
  f.opt = app->add_option(flag, f.value, help + " [" + key + "]");
}

void apply_config(Context& ctx) {
  if (!ctx.config_file.empty()) {
    const fs::path path = ctx.config_file;
    if (!fs::exists(path)) throw UsageError{"--config: file not found: " + ctx.config_file};
    parse_config_into(ctx.cfg, io::read_text(path));
    resolve_paths(ctx.cfg, fs::absolute(path).parent_path());
  }
  for (const auto& s : ctx.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError{"--set: expected key=value, got '" + s + "'"};
    try {
      set_config_value(ctx.cfg, cfg_detail::trim(s.substr(0, eq)), s.substr(eq + 1));
    } catch (const Error& e) {
      throw UsageError{"--set: " + std::string(e.what())};
    }
  }
  for (const auto& f : ctx.flags) {
    if (!f.opt || f.opt->count() == 0) continue;
    try {
      set_config_value(ctx.cfg, f.key, f.value);
    } catch (const Error& e) {
      throw UsageError{f.flag + ": " + std::string(e.what())};
    }
  }
  // Flag-supplied paths are relative to the working directory.
  RunPaths& p = ctx.cfg.paths;
  for (fs::path* path : {&p.bank, &p.corpus, &p.split, &p.checkpoint, &ctx.cfg.out_root})
    if (!path->empty()) *path = fs::absolute(*path).lexically_normal();
  try {
    validate(ctx.cfg);
  } catch (const Error& e) {
    throw UsageError{"invalid configuration: " + std::string(e.what())};
  }
}

fs::path require_path(const fs::path& p, const std::string& flag, const std::string& key) {
  if (p.empty()) throw UsageError{flag + ": required (or set " + key + " in --config)"};
  return p;
}

std::string utc_stamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

fs::path make_run_dir(const Context& ctx) {
  fs::path dir;
  if (!ctx.out_dir.empty()) {
    dir = ctx.out_dir;
  } else {
    const auto base = ctx.cfg.out_root / (utc_stamp() + "-" + config_hash(ctx.cfg));
    dir = base;
    for (int i = 1; fs::exists(dir); ++i) dir = base.string() + "-" + std::to_string(i);
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorCode::IoFailure, "cannot create run directory " + dir.string() + ": " + ec.message());
  return dir;
}

RunMetadata metadata(const Context& ctx, const std::string& split_id = {}) {
  RunMetadata m;
  m.seed = ctx.cfg.seed;
  m.config_hash = config_hash(ctx.cfg);
  m.split_id = split_id;
  return m;
}

void write_json(const fs::path& path, const json& j) { io::write_text(path, j.dump(2) + "\n"); }

// metadata.json and config.ini; enough to rerun the command bit-exactly.
void finish_run(const Context& ctx, const fs::path& dir, const std::string& command, const RunMetadata& meta,
                json outputs) {
  json j;
  j["command"] = command;
  j["metadata"] = to_json(meta);
  j["outputs"] = std::move(outputs);
  write_json(dir / "metadata.json", j);
  io::write_text(dir / "config.ini", to_ini(ctx.cfg));
  std::cout << "run directory: " << dir.string() << "\n";
}

Bank load_bank(const Context& ctx) {
  return read_embedding_bank(require_path(ctx.cfg.paths.bank, "--bank", "paths.bank"));
}

// Reads --split when given, otherwise derives the assignment from the config.
SplitAssignment load_or_make_split(const Context& ctx, const Manifest& manifest) {
  if (!ctx.cfg.paths.split.empty())
    return split_from_json(nlohmann::json::parse(io::read_text(ctx.cfg.paths.split), nullptr, true), manifest);
  return make_splits(manifest, ctx.cfg.ratios, ctx.cfg.seed);
}

json counts_json(const SplitAssignment& s) {
  return {{"train", s.count(Split::train)}, {"val", s.count(Split::val)}, {"test", s.count(Split::test)},
          {"excluded", s.count(Split::excluded)}};
}

// ---------------------------------------------------------------------------
// Commands

int cmd_ingest(Context& ctx) {
  const Bank bank = load_bank(ctx);
  std::map<std::string, std::size_t> per_technique;
  std::unordered_set<std::string> identities;
  std::size_t real = 0, fake = 0, videos = 0;
  for (const auto& r : bank.records) {
    identities.insert(r.identity_id);
    if (r.chunk_index == 0) ++videos;
    if (r.label) {
      ++fake;
      ++per_technique[std::string(to_string(*r.technique))];
    } else {
      ++real;
    }
  }
  json summary;
  summary["bank"] = ctx.cfg.paths.bank.string();
  summary["dim"] = bank.dim;
  summary["records"] = bank.records.size();
  summary["videos"] = videos;
  summary["identities"] = identities.size();
  summary["real"] = real;
  summary["fake"] = fake;
  summary["per_technique"] = per_technique;
  summary["techniques"] = bank.manifest.techniques;
  if (!bank.manifest.entries.empty()) summary["source"] = std::string(to_string(bank.manifest.entries.front().source));
  const auto dir = make_run_dir(ctx);
  write_json(dir / "summary.json", summary);
  std::cout << summary.dump(2) << "\n";
  finish_run(ctx, dir, "ingest", metadata(ctx), {"summary.json"});
  return 0;
}

int cmd_split(Context& ctx) {
  const Bank bank = load_bank(ctx);
  const auto split = make_splits(bank.manifest, ctx.cfg.ratios, ctx.cfg.seed);
  const auto dir = make_run_dir(ctx);
  write_json(dir / "split.json", split_to_json(split));
  std::cout << "split " << split.id() << ": " << counts_json(split).dump() << "\n";
  finish_run(ctx, dir, "split", metadata(ctx, split.id()), {"split.json"});
  return 0;
}

int cmd_synth(Context& ctx) {
  const auto spec = ctx.cfg.synth_spec();
  const Bank bank = synth::gen_embeddings(spec);
  const auto corpus = synth::gen_transcripts(spec, bank.manifest);
  const auto dir = make_run_dir(ctx);
  write_embedding_bank(bank, dir / "bank.vsrb");
  io::write_text(dir / "corpus.jsonl", text::encode_corpus_jsonl(corpus));
  std::cout << "synthesized " << bank.records.size() << " records (dim " << bank.dim << ") and " << corpus.size()
            << " transcripts\n";
  finish_run(ctx, dir, "synth", metadata(ctx),
             {"bank.vsrb", manifest_sidecar_path("bank.vsrb").string(), "corpus.jsonl"});
  return 0;
}

int cmd_train(Context& ctx) {
  const Bank bank = load_bank(ctx);
  const auto split = load_or_make_split(ctx, bank.manifest);
  const auto mc = ctx.cfg.model_config(bank.dim);
  const auto tc = ctx.cfg.trainer_config();
  const auto res = train_fauxnet(bank, split, tc, mc);
  const auto meta = metadata(ctx, split.id());
  const auto dir = make_run_dir(ctx);
  save_checkpoint(res.best, dir / "checkpoint.fxck",
                  {{"seed", std::to_string(meta.seed)},
                   {"config_hash", meta.config_hash},
                   {"split_id", meta.split_id},
                   {"version", meta.version},
                   {"best_epoch", std::to_string(res.best_epoch)}});
  io::write_text(dir / "history.csv", history_csv(res.history));
  write_json(dir / "split.json", split_to_json(split));
  json summary{{"epochs_run", res.history.size()},
               {"best_epoch", res.best_epoch},
               {"best_val_loss", res.best_val_loss},
               {"split_counts", counts_json(split)},
               {"metadata", to_json(meta)}};
  write_json(dir / "train.json", summary);
  std::cout << "trained " << res.history.size() << " epochs; best epoch " << res.best_epoch << " (val loss "
            << res.best_val_loss << ")\n";
  finish_run(ctx, dir, "train", meta, {"checkpoint.fxck", "history.csv", "split.json", "train.json"});
  return 0;
}

int cmd_eval(Context& ctx) {
  const Bank bank = load_bank(ctx);
  const auto split = load_or_make_split(ctx, bank.manifest);
  const auto params = load_checkpoint(require_path(ctx.cfg.paths.checkpoint, "--checkpoint", "paths.checkpoint"));
  require(params.input_dim() == bank.dim, ErrorCode::DimensionMismatch,
          "checkpoint expects width " + std::to_string(params.input_dim()) + ", bank has " + std::to_string(bank.dim));
  const auto report = evaluate_fauxnet(params, bank, split, metadata(ctx, split.id()));
  const auto dir = make_run_dir(ctx);
  write_json(dir / "eval.json", to_json(report, &bank.manifest));
  std::cout << "detection accuracy " << format_fixed(100 * report.detection_accuracy, 2) << "%, AUC "
            << format_fixed(report.detection_auc, 4) << ", attribution accuracy "
            << format_fixed(100 * report.attribution_accuracy, 2) << "%\n";
  finish_run(ctx, dir, "eval", report.meta, {"eval.json"});
  return 0;
}

int cmd_text_baseline(Context& ctx) {
  const Bank bank = load_bank(ctx);
  const auto corpus =
      text::decode_corpus_jsonl(io::read_text(require_path(ctx.cfg.paths.corpus, "--corpus", "paths.corpus")));
  const auto split = load_or_make_split(ctx, bank.manifest);
  std::unordered_map<std::string, Split> where;
  for (auto s : {Split::train, Split::test})
    for (auto i : select(split, bank.manifest, s)) where[bank.manifest.entries[i].video_id] = s;
  std::vector<text::TranscriptPair> train, test;
  for (const auto& p : corpus) {
    auto it = where.find(p.video_id);
    if (it == where.end()) continue;
    (it->second == Split::train ? train : test).push_back(p);
  }
  require(!train.empty() && !test.empty(), ErrorCode::DegenerateSplit, "corpus has no train or no test transcripts");
  const auto train_set = label_corpus(train, bank.manifest);
  const auto test_set = label_corpus(test, bank.manifest);
  const auto res = run_text_baseline(train_set, test_set, ctx.cfg.tie);
  const auto meta = metadata(ctx, split.id());
  const auto dir = make_run_dir(ctx);
  auto j = to_json(res);
  j["n_train"] = train.size();
  j["n_test"] = test.size();
  j["metadata"] = to_json(meta);
  write_json(dir / "text_baseline.json", j);
  io::write_text(dir / "kde.csv", kde_csv(metric_kdes(test_set)));
  std::cout << "majority vote accuracy " << format_fixed(100 * res.test_accuracy, 2) << "%, AUC "
            << format_fixed(res.test_auc, 4) << "\n";
  finish_run(ctx, dir, "text-baseline", meta, {"text_baseline.json", "kde.csv"});
  return 0;
}

int cmd_one_vs_all(Context& ctx) {
  const Bank bank = load_bank(ctx);
  const auto split = load_or_make_split(ctx, bank.manifest);
  const auto meta = metadata(ctx, split.id());
  const auto table =
      run_one_vs_all(bank, split, ctx.cfg.trainer_config(), ctx.cfg.model_config(bank.dim), meta);
  const auto dir = make_run_dir(ctx);
  const auto csv = one_vs_all_csv(table);
  io::write_text(dir / "one_vs_all.csv", csv);
  auto j = to_json(table);
  j["metadata"] = to_json(meta);
  write_json(dir / "one_vs_all.json", j);
  std::cout << csv;
  finish_run(ctx, dir, "one-vs-all", meta, {"one_vs_all.csv", "one_vs_all.json"});
  return 0;
}

int cmd_report(Context& ctx, const std::vector<std::string>& runs) {
  json merged;
  merged["metadata"] = to_json(metadata(ctx));
  json list = json::array();
  for (const auto& r : runs) {
    const fs::path dir = r;
    if (!fs::exists(dir / "metadata.json")) throw UsageError{"runs: no metadata.json in " + r};
    json entry;
    entry["run"] = fs::absolute(dir).lexically_normal().string();
    try {
      for (const auto& f : std::vector<fs::path>{dir / "metadata.json"}) entry["metadata"] = json::parse(io::read_text(f));
      std::vector<fs::path> files;
      for (const auto& de : fs::directory_iterator(dir))
        if (de.path().extension() == ".json" && de.path().filename() != "metadata.json" &&
            de.path().filename() != "split.json")
          files.push_back(de.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) entry["results"][f.stem().string()] = json::parse(io::read_text(f));
    } catch (const json::exception& e) {
      fail(ErrorCode::ParseError, r + ": " + e.what());
    }
    list.push_back(std::move(entry));
  }
  merged["runs"] = std::move(list);
  const auto dir = make_run_dir(ctx);
  write_json(dir / "report.json", merged);
  finish_run(ctx, dir, "report", metadata(ctx), {"report.json"});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fauxnet: deepfake detection and attribution toolkit"};
  app.set_version_flag("--version", std::string(kToolkitVersion));
  app.require_subcommand(1);
  app.fallthrough();

  Context ctx;
  ctx.flags.reserve(64);
  app.add_option("--config", ctx.config_file, "INI-style run configuration");
  app.add_option("--set", ctx.sets, "override a config key: section.key=value (repeatable)");
  app.add_option("--out", ctx.out_dir, "run directory (default <out_root>/<UTC time>-<config hash>)");
  add_key_flag(ctx, &app, "--seed", "run.seed", "master seed");
  add_key_flag(ctx, &app, "--out-root", "run.out_root", "parent of generated run directories");

  auto* ingest = app.add_subcommand("ingest", "validate an embedding bank and summarize it");
  auto* split = app.add_subcommand("split", "write an identity-disjoint split assignment");
  auto* synth = app.add_subcommand("synth", "generate a synthetic bank and transcript corpus");
  auto* train = app.add_subcommand("train", "train FauxNet; writes checkpoint and history");
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  auto* textb = app.add_subcommand("text-baseline", "six-metric majority-vote baseline on transcripts");
  auto* ova = app.add_subcommand("one-vs-all", "train on real plus one technique, test on all");
  auto* report = app.add_subcommand("report", "merge run outputs into one JSON document");

  for (auto* sub : {ingest, split, train, eval, textb, ova}) add_key_flag(ctx, sub, "--bank", "paths.bank", "embedding bank");
  for (auto* sub : {train, eval, textb, ova}) add_key_flag(ctx, sub, "--split", "paths.split", "split assignment JSON");
  add_key_flag(ctx, eval, "--checkpoint", "paths.checkpoint", "model checkpoint");
  add_key_flag(ctx, textb, "--corpus", "paths.corpus", "transcript corpus (JSON lines)");
  add_key_flag(ctx, textb, "--tie-rule", "text.tie_rule", "3-3 vote outcome: fake or real");

  std::string ratios;
  split->add_option("--ratios", ratios, "vox, hdtf or train,val,test [split.*]");

  for (auto* sub : {train, ova}) {
    add_key_flag(ctx, sub, "--epochs", "trainer.max_epochs", "maximum epochs");
    add_key_flag(ctx, sub, "--batch-size", "trainer.batch_size", "mini-batch size");
    add_key_flag(ctx, sub, "--lr", "trainer.learning_rate", "initial learning rate");
    add_key_flag(ctx, sub, "--hidden", "model.hidden", "trunk widths, comma separated");
  }
  add_key_flag(ctx, synth, "--dim", "synth.dim", "embedding width");
  add_key_flag(ctx, synth, "--identities", "synth.identities", "number of identities");
  add_key_flag(ctx, synth, "--videos-per-identity", "synth.videos_per_identity", "videos per identity");
  add_key_flag(ctx, synth, "--chunks", "synth.chunks_per_video", "chunks per video");
  add_key_flag(ctx, synth, "--separation", "synth.separation", "class separation in units of sigma");
  add_key_flag(ctx, synth, "--techniques", "synth.techniques", "technique names, comma separated");

  std::vector<std::string> runs;
  report->add_option("runs", runs, "run directories to merge")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << kToolkitVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    try {
      apply_config(ctx);
      if (!ratios.empty()) {
        SplitRatios r;
        if (ratios == "vox") r = kVoxRatios;
        else if (ratios == "hdtf") r = kHdtfRatios;
        else {
          const auto parts = cfg_detail::split_list(ratios);
          if (parts.size() != 3) throw UsageError{"--ratios: expected vox, hdtf or three comma-separated values"};
          for (int i = 0; i < 3; ++i) r[i] = cfg_detail::parse_number<double>("--ratios", parts[i]);
        }
        validate_ratios(r);
        ctx.cfg.ratios = r;
      }
    } catch (const Error& e) {
      // Malformed config file contents are data errors; flag mistakes are usage errors.
      if (!ratios.empty() && (e.code() == ErrorCode::InvalidRatios || e.code() == ErrorCode::InvalidConfig))
        throw UsageError{"--ratios: " + std::string(e.what())};
      throw;
    }
    if (*ingest) return cmd_ingest(ctx);
    if (*split) return cmd_split(ctx);
    if (*synth) return cmd_synth(ctx);
    if (*train) return cmd_train(ctx);
    if (*eval) return cmd_eval(ctx);
    if (*textb) return cmd_text_baseline(ctx);
    if (*ova) return cmd_one_vs_all(ctx);
    if (*report) return cmd_report(ctx, runs);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.message << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: ParseError: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
