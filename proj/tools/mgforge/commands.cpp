// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.h"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "config_layers.h"
#include "mgforge/chem/sanitize.h"
#include "mgforge/chem/smiles.h"
#include "mgforge/common/error.h"
#include "mgforge/eval/metrics.h"
#include "mgforge/eval/report.h"
#include "mgforge/model/config.h"
#include "mgforge/sample/sample.h"
#include "mgforge/store/checkpoint.h"
#include "mgforge/store/corpus.h"
#include "mgforge/tokenizer/vocab.h"
#include "mgforge/train/train.h"

namespace mgforge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::pair<const CLI::App*, std::function<void()>>>& handlers() {
  static std::vector<std::pair<const CLI::App*, std::function<void()>>> h;
  return h;
}

Error usage_error(const std::string& kind, const std::string& message) {
  return Error(ErrorCategory::kUsage, kind, message);
}

// Shortest text that reads back to the same double.
std::string number(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return c != ' ' && c != '\t' && c != '\r' && c != '\n'; };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, sep)) {
    out.push_back(trim(part));
  }
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw data_error("FileNotFound", "cannot open " + path.string());
  }
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw data_error("CannotWrite", "cannot write " + path.string());
  }
  return out;
}

bool has_extension(const std::string& path, const std::string& ext) {
  std::string e = fs::path(path).extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return e == ext;
}

struct Generated {
  std::vector<std::string> smiles;
  std::vector<bool> truncated;
};

// .csv: a smiles column and an optional truncated column. Anything else:
// one SMILES per line, where an empty line is a sample that never finished.
Generated read_generated(const std::string& path) {
  std::ifstream in = open_in(path);
  Generated g;
  std::string line;
  if (has_extension(path, ".csv")) {
    if (!std::getline(in, line)) {
      throw data_error("MissingColumn", path + ": empty CSV");
    }
    const auto header = split(line, ',');
    std::optional<std::size_t> smiles_col;
    std::optional<std::size_t> trunc_col;
    for (std::size_t i = 0; i < header.size(); ++i) {
      std::string h = header[i];
      std::transform(h.begin(), h.end(), h.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      if (h == "smiles") {
        smiles_col = i;
      } else if (h == "truncated") {
        trunc_col = i;
      }
    }
    if (!smiles_col) {
      throw data_error("MissingColumn", path + ": CSV header has no smiles column");
    }
    int line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) {
        continue;
      }
      auto fields = split(line, ',');
      fields.resize(std::max(fields.size(), header.size()));
      const std::string t = trunc_col ? fields[*trunc_col] : "";
      g.smiles.push_back(fields[*smiles_col]);
      g.truncated.push_back(t == "1" || t == "true" || t == "True");
    }
    return g;
  }
  while (std::getline(in, line)) {
    line = trim(line);
    g.truncated.push_back(line.empty());
    g.smiles.push_back(std::move(line));
  }
  return g;
}

train::LogSink make_sink(bool quiet, const std::string& log_path, std::shared_ptr<std::ofstream>& log_file) {
  if (!log_path.empty()) {
    log_file = std::make_shared<std::ofstream>(open_out(log_path));
  }
  return [quiet, log_file](const train::LogRecord& r) {
    const std::string text = train::to_json(r).dump();
    if (log_file) {
      *log_file << text << '\n';
      log_file->flush();
    }
    if (!quiet) {
      std::cerr << text << '\n';
    }
  };
}

struct TrainFlags {
  std::string config;
  std::vector<std::string> sets;
  std::string log;
  bool quiet = false;
  bool lenient = false;
  std::optional<int> epochs;
  std::optional<std::int64_t> max_steps;
  std::optional<double> max_minutes;
  std::optional<int> batch_size;
  std::optional<double> lr;
  std::optional<std::uint64_t> seed;
};

void add_train_flags(CLI::App* sub, TrainFlags& f) {
  sub->add_option("--config", f.config, "JSON config file with \"model\"/\"train\" sections")->check(CLI::ExistingFile);
  sub->add_option("--set", f.sets, "Override one config value: section.key=value (repeatable)");
  sub->add_option("--epochs", f.epochs, "train.epochs")->check(CLI::PositiveNumber);
  sub->add_option("--max-steps", f.max_steps, "train.max_steps (0 = no cap)")->check(CLI::NonNegativeNumber);
  sub->add_option("--max-minutes", f.max_minutes, "train.max_minutes (0 = no cap)")->check(CLI::NonNegativeNumber);
  sub->add_option("--batch-size", f.batch_size, "train.batch_size")->check(CLI::PositiveNumber);
  sub->add_option("--lr", f.lr, "train.lr")->check(CLI::PositiveNumber);
  sub->add_option("--seed", f.seed, "train.seed");
  sub->add_option("--log", f.log, "Also write training log records to this JSONL file");
  sub->add_flag("--quiet", f.quiet, "Do not echo log records on stderr");
  sub->add_flag("--lenient", f.lenient, "Skip unparsable corpus rows instead of failing");
}

void apply_train_flags(ConfigLayers& layers, const TrainFlags& f) {
  if (!f.config.empty()) {
    layers.merge_file(f.config);
  }
  layers.apply_sets(f.sets);
  if (f.epochs) layers.set("train", "epochs", *f.epochs);
  if (f.max_steps) layers.set("train", "max_steps", *f.max_steps);
  if (f.max_minutes) layers.set("train", "max_minutes", *f.max_minutes);
  if (f.batch_size) layers.set("train", "batch_size", *f.batch_size);
  if (f.lr) layers.set("train", "lr", *f.lr);
  if (f.seed) layers.set("train", "seed", *f.seed);
}

json train_summary(const train::TrainResult& r) {
  return {{"steps", r.steps},
          {"final_train_nll_per_token", r.final_train_nll},
          {"dropped_sequences", r.dropped_sequences},
          {"effective_config", r.checkpoint.effective_config}};
}

// ---------------------------------------------------------------- pretrain

struct PretrainArgs {
  std::string data;
  std::string out;
  std::string heldout_split = "test";
  std::vector<std::string> vocab_extra;
  TrainFlags train;
  std::optional<int> n_layers, n_heads, d_model, d_ffn, max_len;
};

void run_pretrain(const PretrainArgs& a) {
  ConfigLayers layers(json{{"model", model::to_json(model::ModelConfig{})}, {"train", train::to_json(train::TrainConfig{})}});
  apply_train_flags(layers, a.train);
  if (a.n_layers) layers.set("model", "n_layers", *a.n_layers);
  if (a.n_heads) layers.set("model", "n_heads", *a.n_heads);
  if (a.d_model) layers.set("model", "d_model", *a.d_model);
  if (a.d_ffn) layers.set("model", "d_ffn", *a.d_ffn);
  if (a.max_len) layers.set("model", "max_len", *a.max_len);
  const train::TrainConfig tc = train::train_config_from_json(layers.section("train"));
  const model::ModelConfig mc = model::model_config_from_json(layers.section("model"));

  store::LoadReport load;
  const store::Corpus corpus = store::load_pretrain(a.data, {.split = "train", .lenient = a.train.lenient}, &load);
  store::Corpus heldout;
  if (a.heldout_split != "none") {
    heldout = store::load_pretrain(a.data, {.split = a.heldout_split, .lenient = a.train.lenient});
  }
  if (corpus.entries.empty()) {
    throw data_error("EmptyCorpus", a.data + ": no training rows");
  }
  std::vector<std::string> vocab_text = corpus.smiles();
  for (const auto& extra : a.vocab_extra) {
    const auto more = store::load_pretrain(extra, {.split = "all", .lenient = a.train.lenient}).smiles();
    vocab_text.insert(vocab_text.end(), more.begin(), more.end());
  }
  const tok::Vocab vocab = tok::build_vocab(vocab_text);

  std::shared_ptr<std::ofstream> log_file;
  train::TrainResult result = train::pretrain(corpus, heldout, vocab, mc, tc, make_sink(a.train.quiet, a.train.log, log_file));
  json& ec = result.checkpoint.effective_config;
  ec["model"] = model::to_json(result.checkpoint.model->config());
  ec["data"] = {{"corpus", a.data}, {"heldout_split", a.heldout_split}, {"vocab_extra", a.vocab_extra},
                {"rows_skipped", load.rows_skipped}};
  store::save_checkpoint(result.checkpoint, a.out);
  std::cout << train_summary(result).dump(2) << '\n';
}

// ---------------------------------------------------------------- finetune

struct FinetuneArgs {
  std::string base;
  std::string data;
  std::string heldout;
  std::string targets;
  std::string out;
  std::optional<std::string> scope;
  TrainFlags train;
};

void run_finetune(const FinetuneArgs& a) {
  ConfigLayers layers(json{{"train", train::to_json(train::TrainConfig{})}});
  apply_train_flags(layers, a.train);
  if (a.scope) layers.set("train", "finetune_scope", *a.scope);
  const train::TrainConfig tc = train::train_config_from_json(layers.section("train"));

  const store::Checkpoint base = store::load_checkpoint(a.base);
  std::vector<std::string> targets;
  if (!a.targets.empty()) {
    targets = split(a.targets, ',');
  } else {
    // Targets the base already knows keep their ids; new ones follow in
    // file order.
    targets.assign(base.conditions.begin() + 1, base.conditions.end());
    for (const auto& t : store::scan_targets(a.data)) {
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) {
        targets.push_back(t);
      }
    }
  }
  const store::ConditionMap conditions(targets);
  const store::Corpus corpus = store::load_finetune(a.data, conditions, {.split = "all", .lenient = a.train.lenient});
  store::Corpus heldout;
  if (!a.heldout.empty()) {
    heldout = store::load_finetune(a.heldout, conditions, {.split = "all", .lenient = a.train.lenient});
  }
  std::shared_ptr<std::ofstream> log_file;
  train::TrainResult result =
      train::finetune(base, corpus, heldout, conditions, tc, make_sink(a.train.quiet, a.train.log, log_file));
  result.checkpoint.effective_config["data"] = {{"corpus", a.data}, {"heldout", a.heldout}, {"base", a.base}};
  store::save_checkpoint(result.checkpoint, a.out);
  std::cout << train_summary(result).dump(2) << '\n';
}

// ------------------------------------------------------------------ sample

struct SampleArgs {
  std::string ckpt;
  std::string out = "-";
  std::string format;
  std::string config;
  std::vector<std::string> sets;
  int threads = 1;
  std::optional<std::string> cond;
  std::optional<int> n;
  std::optional<double> temp;
  std::optional<int> top_k;
  std::optional<int> max_len;
  std::optional<std::uint64_t> seed;
};

json sample_defaults() {
  const sample::SampleConfig d;
  return {{"condition", "none"}, {"n", 1000},         {"temperature", d.temperature},
          {"top_k", d.top_k},    {"max_len", d.max_len}, {"seed", d.seed}};
}

sample::SampleConfig sample_config_from_json(const json& doc, std::string& condition) {
  sample::SampleConfig c;
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "condition") {
        condition = value.get<std::string>();
      } else if (key == "n") {
        c.n = value.get<int>();
      } else if (key == "temperature") {
        c.temperature = value.get<double>();
      } else if (key == "top_k") {
        c.top_k = value.get<int>();
      } else if (key == "max_len") {
        c.max_len = value.get<int>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else {
        throw usage_error("InvalidConfig", "unknown sample key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw usage_error("InvalidConfig", "sample." + key + ": " + e.what());
    }
  }
  return c;
}

void run_sample(const SampleArgs& a) {
  ConfigLayers layers(json{{"sample", sample_defaults()}});
  if (!a.config.empty()) {
    layers.merge_file(a.config);
  }
  layers.apply_sets(a.sets);
  if (a.cond) layers.set("sample", "condition", *a.cond);
  if (a.n) layers.set("sample", "n", *a.n);
  if (a.temp) layers.set("sample", "temperature", *a.temp);
  if (a.top_k) layers.set("sample", "top_k", *a.top_k);
  if (a.max_len) layers.set("sample", "max_len", *a.max_len);
  if (a.seed) layers.set("sample", "seed", *a.seed);
  std::string condition_name;
  sample::SampleConfig sc = sample_config_from_json(layers.section("sample"), condition_name);
  sc.threads = a.threads;

  const store::Checkpoint ckpt = store::load_checkpoint(a.ckpt);
  const store::ConditionMap conditions(std::vector<std::string>(ckpt.conditions.begin() + 1, ckpt.conditions.end()));
  const int condition = conditions.id_of(condition_name);

  const bool csv = a.format.empty() ? has_extension(a.out, ".csv") : a.format == "csv";
  std::ofstream file;
  if (a.out != "-") {
    file = open_out(a.out);
  }
  std::ostream& out = a.out == "-" ? std::cout : file;
  if (csv) {
    out << "smiles,condition,nll,truncated\n";
  }
  int truncated = 0;
  sample::generate_stream(*ckpt.model, ckpt.vocab, condition, sc, [&](const sample::Sample& s) {
    truncated += s.truncated ? 1 : 0;
    if (csv) {
      out << s.smiles << ',' << condition_name << ',' << number(s.nll) << ',' << (s.truncated ? 1 : 0) << '\n';
    } else {
      // A sample that never emitted EOS is not a molecule; keep the line so
      // line numbers still match sample indices.
      out << (s.truncated ? "" : s.smiles) << '\n';
    }
  });
  out.flush();
  if (!out) {
    throw data_error("CannotWrite", "failed writing samples to " + a.out);
  }
  const json provenance = {{"command", "sample"},
                           {"checkpoint", a.ckpt},
                           {"sample", layers.section("sample")},
                           {"checkpoint_config", ckpt.effective_config}};
  if (a.out != "-") {
    open_out(a.out + ".json") << provenance.dump(2) << '\n';
  }
  std::cerr << json{{"samples", sc.n}, {"truncated", truncated}, {"effective_config", provenance}}.dump() << '\n';
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  std::string gen;
  std::string train;
  std::string test;
  std::string out;
  std::string histograms;
  std::string train_split = "train";
  std::string test_split = "test";
  std::string config;
  std::vector<std::string> sets;
  int threads = 1;
  std::optional<int> radius, width, bins;
};

void run_eval(const EvalArgs& a) {
  const eval::ReportOptions d;
  ConfigLayers layers(json{{"eval",
                            {{"fingerprint_radius", d.fingerprint_radius},
                             {"fingerprint_width", d.fingerprint_width},
                             {"histogram_bins", d.histogram_bins}}}});
  if (!a.config.empty()) {
    layers.merge_file(a.config);
  }
  layers.apply_sets(a.sets);
  if (a.radius) layers.set("eval", "fingerprint_radius", *a.radius);
  if (a.width) layers.set("eval", "fingerprint_width", *a.width);
  if (a.bins) layers.set("eval", "histogram_bins", *a.bins);
  eval::ReportOptions opts;
  opts.threads = a.threads;
  for (const auto& [key, value] : layers.section("eval").items()) {
    try {
      if (key == "fingerprint_radius") {
        opts.fingerprint_radius = value.get<int>();
      } else if (key == "fingerprint_width") {
        opts.fingerprint_width = value.get<int>();
      } else if (key == "histogram_bins") {
        opts.histogram_bins = value.get<int>();
      } else {
        throw usage_error("InvalidConfig", "unknown eval key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw usage_error("InvalidConfig", "eval." + key + ": " + e.what());
    }
  }
  if (opts.fingerprint_radius < 0 || opts.fingerprint_width < 1 || opts.histogram_bins < 1) {
    throw usage_error("InvalidConfig", "eval options must be positive");
  }

  const Generated gen = read_generated(a.gen);
  const auto train_ref = store::load_pretrain(a.train, {.split = a.train_split}).smiles();
  const auto test_ref = store::load_pretrain(a.test, {.split = a.test_split}).smiles();
  const std::unique_ptr<bool[]> truncated(new bool[gen.truncated.size()]);
  std::copy(gen.truncated.begin(), gen.truncated.end(), truncated.get());
  const eval::EvalReport report = eval::full_report(gen.smiles, {truncated.get(), gen.truncated.size()}, train_ref,
                                                    test_ref, opts);
  json doc = eval::to_json(report);
  doc["effective_config"] = {{"command", "eval"},
                             {"generated", a.gen},
                             {"train", a.train},
                             {"train_split", a.train_split},
                             {"test", a.test},
                             {"test_split", a.test_split},
                             {"eval", layers.section("eval")}};
  open_out(a.out) << doc.dump(2) << '\n';
  if (!a.histograms.empty()) {
    std::ofstream h = open_out(a.histograms);
    eval::write_histograms_csv(report, h);
  }
  std::cout << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------- validate

void run_validate(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  int total = 0;
  int valid = 0;
  while (std::getline(in, line)) {
    line = trim(line);
    ++total;
    std::string verdict = "valid";
    if (line.empty()) {
      verdict = "invalid\tEmpty: no SMILES on this line";
    } else {
      try {
        (void)chem::sanitize(chem::parse_smiles(line));
      } catch (const chem::ParseError& e) {
        verdict = "invalid\t" + e.kind() + " at offset " + std::to_string(e.offset()) + ": " + e.what();
      } catch (const Error& e) {
        verdict = "invalid\t" + e.kind() + ": " + e.what();
      }
    }
    if (verdict == "valid") {
      ++valid;
    }
    std::cout << total << '\t' << line << '\t' << verdict << '\n';
  }
  const double fraction = total == 0 ? 0.0 : static_cast<double>(valid) / total;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", fraction);
  std::cout << "fraction " << buf << " (" << valid << "/" << total << " valid)\n";
}

// --------------------------------------------------------------- fp-export

struct FpArgs {
  std::string in;
  std::string label;
  std::string out;
  int radius = 2;
  int width = 1024;
  bool skip_invalid = false;
};

void run_fp_export(const FpArgs& a) {
  std::vector<std::string> smiles;
  int skipped = 0;
  for (auto& s : store::read_lines(a.in)) {
    if (a.skip_invalid && !eval::canonical_or_null(s)) {
      ++skipped;
      continue;
    }
    smiles.push_back(std::move(s));
  }
  const std::vector<std::string> labels(smiles.size(), a.label);
  eval::fp_export(smiles, labels, fs::path(a.out), a.radius, a.width);
  std::cerr << json{{"rows", smiles.size()}, {"skipped_invalid", skipped}, {"radius", a.radius}, {"width", a.width}}.dump()
            << '\n';
}

template <typename Args>
Args& keep(std::unique_ptr<Args>& slot) {
  slot = std::make_unique<Args>();
  return *slot;
}

}  // namespace

void register_commands(CLI::App& app) {
  // Option storage lives as long as the process.
  static std::unique_ptr<PretrainArgs> pre;
  static std::unique_ptr<FinetuneArgs> fin;
  static std::unique_ptr<SampleArgs> smp;
  static std::unique_ptr<EvalArgs> ev;
  static std::unique_ptr<FpArgs> fp;
  static std::string validate_in;

  {
    auto& a = keep(pre);
    CLI::App* sub = app.add_subcommand("pretrain", "Train an unconditional model on a SMILES corpus");
    sub->add_option("--data", a.data, "CSV with a SMILES column and optional SPLIT column, or one SMILES per line")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", a.out, "Checkpoint to write")->required();
    sub->add_option("--heldout-split", a.heldout_split, "Rows of --data scored as held-out (\"none\" to skip)");
    sub->add_option("--vocab-extra", a.vocab_extra,
                    "Extra corpora whose tokens join the vocabulary (e.g. the fine-tuning set)")
        ->check(CLI::ExistingFile);
    add_train_flags(sub, a.train);
    sub->add_option("--layers", a.n_layers, "model.n_layers")->check(CLI::PositiveNumber);
    sub->add_option("--heads", a.n_heads, "model.n_heads")->check(CLI::PositiveNumber);
    sub->add_option("--d-model", a.d_model, "model.d_model")->check(CLI::PositiveNumber);
    sub->add_option("--d-ffn", a.d_ffn, "model.d_ffn")->check(CLI::PositiveNumber);
    sub->add_option("--max-len", a.max_len, "model.max_len")->check(CLI::PositiveNumber);
    handlers().emplace_back(sub, [&a] { run_pretrain(a); });
  }
  {
    auto& a = keep(fin);
    CLI::App* sub = app.add_subcommand("finetune", "Add target conditions to a checkpoint and train on labelled data");
    sub->add_option("--base", a.base, "Checkpoint to start from")->required()->check(CLI::ExistingFile);
    sub->add_option("--data", a.data, "CSV with smiles and target columns")->required()->check(CLI::ExistingFile);
    sub->add_option("--targets", a.targets, "Comma-separated target names in id order (default: from --data)");
    sub->add_option("--heldout", a.heldout, "Held-out CSV in the same format")->check(CLI::ExistingFile);
    sub->add_option("--out", a.out, "Checkpoint to write")->required();
    sub->add_option("--scope", a.scope, "train.finetune_scope")->check(CLI::IsMember({"all", "conditions"}));
    add_train_flags(sub, a.train);
    handlers().emplace_back(sub, [&a] { run_finetune(a); });
  }
  {
    auto& a = keep(smp);
    CLI::App* sub = app.add_subcommand("sample", "Draw SMILES from a checkpoint");
    sub->add_option("--ckpt", a.ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
    sub->add_option("--cond", a.cond, "Target name, or none");
    sub->add_option("-n,--n", a.n, "Number of samples")->check(CLI::PositiveNumber);
    sub->add_option("--temp", a.temp, "Softmax temperature; 0 is greedy")->check(CLI::NonNegativeNumber);
    sub->add_option("--top-k", a.top_k, "Keep the k most likely tokens (0 = all)")->check(CLI::NonNegativeNumber);
    sub->add_option("--max-len", a.max_len, "Token budget per sample (0 = model max_len)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", a.seed, "Sampling seed");
    sub->add_option("--out", a.out, "Output file, - for stdout; .csv selects CSV");
    sub->add_option("--format", a.format, "smi or csv (default: from --out)")->check(CLI::IsMember({"smi", "csv"}));
    sub->add_option("--config", a.config, "JSON config file with a \"sample\" section")->check(CLI::ExistingFile);
    sub->add_option("--set", a.sets, "Override one config value: sample.key=value (repeatable)");
    sub->add_option("--threads", a.threads, "Worker threads; output does not depend on it")
        ->check(CLI::PositiveNumber);
    handlers().emplace_back(sub, [&a] { run_sample(a); });
  }
  {
    auto& a = keep(ev);
    CLI::App* sub = app.add_subcommand("eval", "Score generated SMILES against reference sets");
    sub->add_option("--gen", a.gen, "Generated SMILES (.smi, or .csv with smiles[,truncated])")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--train", a.train, "Training corpus (novelty reference)")->required()->check(CLI::ExistingFile);
    sub->add_option("--test", a.test, "Test corpus (SNN, fragment and property reference)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--train-split", a.train_split, "SPLIT value used from --train (train, test or all)");
    sub->add_option("--test-split", a.test_split, "SPLIT value used from --test (train, test or all)");
    sub->add_option("--out", a.out, "Report JSON to write")->required();
    sub->add_option("--histograms", a.histograms, "Also write property histograms as CSV");
    sub->add_option("--fp-radius", a.radius, "eval.fingerprint_radius")->check(CLI::NonNegativeNumber);
    sub->add_option("--fp-width", a.width, "eval.fingerprint_width")->check(CLI::PositiveNumber);
    sub->add_option("--bins", a.bins, "eval.histogram_bins")->check(CLI::PositiveNumber);
    sub->add_option("--config", a.config, "JSON config file with an \"eval\" section")->check(CLI::ExistingFile);
    sub->add_option("--set", a.sets, "Override one config value: eval.key=value (repeatable)");
    sub->add_option("--threads", a.threads, "Worker threads; results do not depend on it")
        ->check(CLI::PositiveNumber);
    handlers().emplace_back(sub, [&a] { run_eval(a); });
  }
  {
    CLI::App* sub = app.add_subcommand("validate", "Report per-line SMILES validity and the valid fraction");
    sub->add_option("--in", validate_in, "One SMILES per line")->required()->check(CLI::ExistingFile);
    handlers().emplace_back(sub, [] { run_validate(validate_in); });
  }
  {
    auto& a = keep(fp);
    CLI::App* sub = app.add_subcommand("fp-export", "Write Morgan fingerprints as CSV for external projection");
    sub->add_option("--in", a.in, "One SMILES per line (blank lines ignored)")->required()->check(CLI::ExistingFile);
    sub->add_option("--label", a.label, "Value of the label column")->required();
    sub->add_option("--out", a.out, "CSV to write")->required();
    sub->add_option("--radius", a.radius, "Fingerprint radius")->check(CLI::NonNegativeNumber);
    sub->add_option("--width", a.width, "Fingerprint width in bits")->check(CLI::PositiveNumber);
    sub->add_flag("--skip-invalid", a.skip_invalid, "Drop invalid SMILES instead of failing");
    handlers().emplace_back(sub, [&a] { run_fp_export(a); });
  }
}

void run_selected([[maybe_unused]] const CLI::App& app) {
  for (const auto& [sub, run] : handlers()) {
    if (sub->parsed()) {
      run();
      return;
    }
  }
  throw Error(ErrorCategory::kUsage, "NoCommand", "no subcommand given");
}

}  // namespace mgforge::cli
