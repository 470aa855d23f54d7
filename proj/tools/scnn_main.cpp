// scnn: train sarcasm-detection CNNs, fuse their features through an SVM,
// and run the evaluation experiments from the command line.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scnn/scnn.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  std::uint64_t seed = 1;
  std::string config_path;
  std::string out;
  bool quiet = false;
};

void say(const CommonOpts& opts, const std::string& line) {
  if (!opts.quiet) std::cout << line << "\n";
}

// Plain-text config: [section] headers over key = value lines, '#' comments.
class IniConfig {
 public:
  static IniConfig parse(const std::string& text) {
    IniConfig cfg;
    std::string section;
    std::size_t line_no = 0;
    for (std::string line : scnn::split_lines(text)) {
      ++line_no;
      trim(line);
      if (line.empty() || line[0] == '#') continue;
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3) {
          throw scnn::ParseError("config line " + std::to_string(line_no) +
                                 ": malformed section header");
        }
        section = line.substr(1, line.size() - 2);
        trim(section);
        continue;
      }
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        throw scnn::ParseError("config line " + std::to_string(line_no) +
                               ": expected key = value");
      }
      std::string key = line.substr(0, eq);
      std::string value = line.substr(eq + 1);
      trim(key);
      trim(value);
      if (key.empty()) {
        throw scnn::ParseError("config line " + std::to_string(line_no) + ": empty key");
      }
      cfg.values_[section][key] = value;
    }
    return cfg;
  }

  static IniConfig load(const std::string& path) {
    return parse(scnn::read_file(path));
  }

  bool has(const std::string& section, const std::string& key) const {
    auto s = values_.find(section);
    return s != values_.end() && s->second.count(key) > 0;
  }

  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback = "") const {
    auto s = values_.find(section);
    if (s == values_.end()) return fallback;
    auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
  }

  std::string require(const std::string& section, const std::string& key) const {
    if (!has(section, key)) {
      throw scnn::ConfigError("config: missing [" + section + "] " + key);
    }
    return get(section, key);
  }

  double get_double(const std::string& section, const std::string& key,
                    double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key);
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw scnn::ConfigError("config: [" + section + "] " + key +
                              " is not a number: '" + v + "'");
    }
  }

  std::size_t get_size(const std::string& section, const std::string& key,
                       std::size_t fallback) const {
    const double d = get_double(section, key, static_cast<double>(fallback));
    if (d < 0 || d != static_cast<double>(static_cast<std::size_t>(d))) {
      throw scnn::ConfigError("config: [" + section + "] " + key +
                              " must be a non-negative integer");
    }
    return static_cast<std::size_t>(d);
  }

 private:
  static void trim(std::string& s) {
    const auto notspace = [](unsigned char c) { return !std::isspace(c); };
    while (!s.empty() && !notspace(s.back())) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && !notspace(static_cast<unsigned char>(s[i]))) ++i;
    s.erase(0, i);
  }

  std::map<std::string, std::map<std::string, std::string>> values_;
};

IniConfig load_config_or_empty(const CommonOpts& opts) {
  if (opts.config_path.empty()) return IniConfig::parse("");
  return IniConfig::load(opts.config_path);
}

void apply_model_overrides(scnn::ModelConfig& cfg, const IniConfig& ini) {
  cfg.embed_dim = ini.get_size("model", "embed_dim", cfg.embed_dim);
  cfg.fc_units = ini.get_size("model", "fc_units", cfg.fc_units);
  cfg.sgd.learning_rate = ini.get_double("model", "learning_rate", cfg.sgd.learning_rate);
  cfg.sgd.momentum = ini.get_double("model", "momentum", cfg.sgd.momentum);
  cfg.sgd.batch_size = ini.get_size("model", "batch_size", cfg.sgd.batch_size);
  cfg.sgd.max_epochs = ini.get_size("model", "max_epochs", cfg.sgd.max_epochs);
  cfg.sgd.plateau_tolerance =
      ini.get_double("model", "plateau_tolerance", cfg.sgd.plateau_tolerance);
  cfg.sgd.plateau_epochs = ini.get_size("model", "plateau_epochs", cfg.sgd.plateau_epochs);
  cfg.sgd.target_loss = ini.get_double("model", "target_loss", cfg.sgd.target_loss);
}

scnn::SvmParams svm_params_from(const IniConfig& ini) {
  scnn::SvmParams p;
  p.kernel = scnn::kernel_from_name(ini.get("svm", "kernel", "linear"));
  p.C = ini.get_double("svm", "C", p.C);
  p.gamma = ini.get_double("svm", "gamma", p.gamma);
  p.tolerance = ini.get_double("svm", "tolerance", p.tolerance);
  return p;
}

scnn::Manifest base_manifest(const std::string& command, const CommonOpts& opts) {
  scnn::Manifest m;
  m.add("command", command);
  m.add("toolkit", scnn::kToolkitVersion);
  m.add("seed", std::to_string(opts.seed));
  if (!opts.config_path.empty()) {
    m.add("config", opts.config_path);
    m.add("config.fingerprint", scnn::fingerprint_file(opts.config_path));
  }
  return m;
}

void manifest_dataset(scnn::Manifest& m, const std::string& role, const std::string& path) {
  m.add("dataset." + role, path);
  m.add("dataset." + role + ".fingerprint", scnn::fingerprint_file(path));
}

void manifest_model(scnn::Manifest& m, const std::string& name, const std::string& path) {
  m.add("model." + name, path);
  m.add("model." + name + ".fingerprint", scnn::fingerprint_file(path));
}

void manifest_output(scnn::Manifest& m, const std::string& path) {
  m.add("output", path);
  m.add("output.fingerprint", scnn::fingerprint_file(path));
}

std::string require_out(const CommonOpts& opts) {
  if (opts.out.empty()) throw scnn::ConfigError("missing --out");
  return opts.out;
}

std::string require_value(const std::string& v, const std::string& flag) {
  if (v.empty()) throw scnn::ConfigError("missing " + flag);
  return v;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- corpora without a fixed label alphabet (extract/correlate/pca) ----

struct RawCorpus {
  std::vector<std::string> labels;
  std::vector<std::vector<std::string>> tokens;
};

RawCorpus load_raw_corpus(const std::string& path) {
  RawCorpus rc;
  for (const auto& r : scnn::load_corpus(path)) {
    rc.labels.push_back(r.label);
    rc.tokens.push_back(scnn::tokenize(scnn::clean_tweet(r.text)));
  }
  return rc;
}

// ---- model loading for fuse/correlate/experiment ----

struct LoadedModels {
  std::optional<scnn::TrainedModel> baseline;
  std::optional<scnn::TrainedModel> sentiment;
  std::optional<scnn::TrainedModel> emotion;
  std::vector<scnn::TrainedModel> personality;  // trait order when non-empty

  scnn::PretrainedBundle bundle() const {
    scnn::PretrainedBundle b;
    if (sentiment) b.sentiment = &*sentiment;
    if (emotion) b.emotion = &*emotion;
    for (const auto& m : personality) b.personality.push_back(&m);
    return b;
  }
};

LoadedModels load_models(const IniConfig& ini, scnn::Manifest& manifest) {
  LoadedModels models;
  if (ini.has("models", "baseline")) {
    const std::string path = ini.get("models", "baseline");
    models.baseline = scnn::load_model(path);
    manifest_model(manifest, "baseline", path);
  }
  if (ini.has("models", "sentiment")) {
    const std::string path = ini.get("models", "sentiment");
    models.sentiment = scnn::load_model(path);
    manifest_model(manifest, "sentiment", path);
  }
  if (ini.has("models", "emotion")) {
    const std::string path = ini.get("models", "emotion");
    models.emotion = scnn::load_model(path);
    manifest_model(manifest, "emotion", path);
  }
  if (ini.has("models", "personality")) {
    const std::string stem = ini.get("models", "personality");
    for (const auto& trait : scnn::personality_traits()) {
      const std::string path = stem + "-" + trait + ".scnn";
      models.personality.push_back(scnn::load_model(path));
      manifest_model(manifest, "personality-" + trait, path);
    }
  }
  return models;
}

const scnn::TrainedModel& find_model(const LoadedModels& models, const std::string& name) {
  if (name == "baseline" && models.baseline) return *models.baseline;
  if (name == "sentiment" && models.sentiment) return *models.sentiment;
  if (name == "emotion" && models.emotion) return *models.emotion;
  for (const auto& m : models.personality) {
    if (m.config().name() == name) return m;
  }
  throw scnn::ConfigError("no model named '" + name +
                          "' is listed in the [models] config section");
}

// Fused feature row for one tweet, blocks in canonical B,S,E,P order.
std::vector<double> fused_row(const LoadedModels& models, const scnn::FusionSpec& spec,
                              const std::vector<std::string>& tokens) {
  const scnn::PretrainedBundle bundle = models.bundle();
  std::vector<scnn::FeatureVector> parts;
  for (scnn::FeatureBlock block : spec.include) {
    scnn::FeatureVector fv;
    switch (block) {
      case scnn::FeatureBlock::Baseline:
        if (!models.baseline) throw scnn::ConfigError("fusion needs [models] baseline");
        fv.values = scnn::extract_features(*models.baseline, tokens);
        fv.source = "baseline";
        break;
      case scnn::FeatureBlock::Sentiment:
        fv.values = scnn::block_features(bundle, block, tokens);
        fv.source = "sentiment";
        break;
      case scnn::FeatureBlock::Emotion:
        fv.values = scnn::block_features(bundle, block, tokens);
        fv.source = "emotion";
        break;
      case scnn::FeatureBlock::Personality:
        fv.values = scnn::block_features(bundle, block, tokens);
        fv.source = "personality";
        break;
    }
    parts.push_back(std::move(fv));
  }
  return scnn::concat_features(parts).values.values();
}

void write_feature_tsv(const std::string& path, const std::vector<std::string>& labels,
                       const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += std::to_string(i + 1);
    out.push_back('\t');
    out += labels[i];
    for (double v : rows[i]) {
      out.push_back('\t');
      out += format_double(v);
    }
    out.push_back('\n');
  }
  scnn::atomic_write_file(path, out);
}

struct FeatureTable {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;
};

FeatureTable read_feature_tsv(const std::string& path) {
  FeatureTable table;
  const auto lines = scnn::split_lines(scnn::read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = lines[i].find('\t', start);
      cells.push_back(lines[i].substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    const std::string where = "features line " + std::to_string(i + 1);
    if (cells.size() < 3) throw scnn::DataError(where + ": expected id, label, values");
    table.labels.push_back(cells[1]);
    std::vector<double> row;
    for (std::size_t c = 2; c < cells.size(); ++c) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cells[c], &used));
        if (used != cells[c].size()) throw std::invalid_argument(cells[c]);
      } catch (const std::exception&) {
        throw scnn::DataError(where + ": bad number '" + cells[c] + "'");
      }
    }
    if (!table.rows.empty() && row.size() != table.rows.front().size()) {
      throw scnn::DataError(where + ": row has " + std::to_string(row.size()) +
                            " values, expected " +
                            std::to_string(table.rows.front().size()));
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw scnn::DataError("feature file is empty: " + path);
  return table;
}

// ---- commands ----

void cmd_synth(const CommonOpts& opts, const std::string& task, std::size_t size,
               const std::string& mechanism, double balance, std::uint64_t topic_seed,
               std::size_t topics) {
  const std::string out = require_out(opts);
  std::vector<scnn::CorpusRecord> records;
  if (task == "sarcasm") {
    scnn::SynthSpec spec;
    spec.size = size;
    spec.mechanism = scnn::mechanism_from_name(mechanism);
    spec.seed = opts.seed;
    spec.topic_seed = topic_seed;
    spec.topics = topics;
    spec.balance = balance;
    records = scnn::generate_sarcasm_corpus(spec);
  } else if (task == "sentiment") {
    records = scnn::generate_sentiment_corpus(size, opts.seed, topic_seed, topics);
  } else if (task == "emotion") {
    records = scnn::generate_emotion_corpus(size, opts.seed, topic_seed, topics);
  } else if (task.rfind("personality:", 0) == 0) {
    records = scnn::generate_personality_corpus(task.substr(12), size, opts.seed,
                                                topic_seed, topics);
  } else {
    throw scnn::ConfigError("unknown synth task '" + task +
                            "' (sarcasm, sentiment, emotion, personality:<trait>)");
  }
  scnn::save_corpus(out, records);

  scnn::Manifest m = base_manifest("synth", opts);
  m.add("task", task);
  m.add("size", std::to_string(size));
  if (task == "sarcasm") {
    m.add("mechanism", mechanism);
    m.add("balance", format_double(balance));
  }
  m.add("topic_seed", std::to_string(topic_seed));
  m.add("topics", std::to_string(topics));
  manifest_output(m, out);
  scnn::save_manifest(m, out + ".manifest");
  say(opts, "wrote " + std::to_string(records.size()) + " records to " + out);
}

void cmd_prep(const CommonOpts& opts, const std::string& data) {
  const std::string out = require_out(opts);
  const auto records = scnn::load_corpus(require_value(data, "--data"));
  std::vector<scnn::CorpusRecord> cleaned;
  cleaned.reserve(records.size());
  std::size_t emptied = 0;
  for (const auto& r : records) {
    std::string text;
    for (const auto& tok : scnn::tokenize(scnn::clean_tweet(r.text))) {
      if (!text.empty()) text.push_back(' ');
      text += tok;
    }
    if (text.empty()) ++emptied;
    cleaned.push_back({r.label, text});
  }
  scnn::save_corpus(out, cleaned);

  scnn::Manifest m = base_manifest("prep", opts);
  manifest_dataset(m, "input", data);
  m.add("records", std::to_string(cleaned.size()));
  m.add("emptied", std::to_string(emptied));
  manifest_output(m, out);
  scnn::save_manifest(m, out + ".manifest");
  std::cout << "prepared " << cleaned.size() << " records (" << emptied
            << " empty after cleaning)\n";
}

void cmd_train(const CommonOpts& opts, const std::string& model_spec,
               const std::string& data, const std::string& embeddings_path) {
  const std::string out_dir = require_out(opts);
  const IniConfig ini = load_config_or_empty(opts);

  const std::string spec_text = require_value(model_spec, "--model");
  scnn::ModelConfig cfg;
  if (spec_text.rfind("personality:", 0) == 0) {
    cfg = scnn::preset_for(scnn::TaskKind::Personality, spec_text.substr(12));
  } else {
    cfg = scnn::preset_for(scnn::task_from_name(spec_text));
  }
  apply_model_overrides(cfg, ini);
  cfg.seed = opts.seed;
  const std::size_t min_count = ini.get_size("model", "vocab_min_count", 1);

  const auto records = scnn::load_corpus(require_value(data, "--data"));
  scnn::LabeledDataset dataset =
      scnn::build_dataset(records, scnn::class_names_for(cfg.task));

  std::optional<scnn::TrainedModel> model;
  if (!embeddings_path.empty()) {
    const scnn::PretrainedEmbeddings pre = scnn::PretrainedEmbeddings::load(embeddings_path);
    cfg.embed_dim = pre.dim();
    cfg.window = scnn::corpus_window(dataset);
    scnn::Vocabulary vocab = scnn::Vocabulary::build(scnn::token_lists(dataset), min_count);
    scnn::encode_dataset(dataset, vocab, cfg.window);
    scnn::EmbeddingMatrix emb =
        scnn::embeddings_from_pretrained(vocab, pre, scnn::derive_seed(cfg.seed, 3));
    model = scnn::train_model(cfg, dataset, vocab, std::move(emb));
  } else {
    model = scnn::fit_model(cfg, std::move(dataset), min_count);
  }

  fs::create_directories(out_dir);
  const std::string name = model->config().name();
  const std::string checkpoint = (fs::path(out_dir) / (name + ".scnn")).string();
  scnn::save_model(checkpoint, *model);

  scnn::Manifest m = base_manifest("train", opts);
  m.add("model", name);
  manifest_dataset(m, "train", data);
  if (!embeddings_path.empty()) manifest_dataset(m, "embeddings", embeddings_path);
  m.add("window", std::to_string(model->config().window));
  m.add("embed_dim", std::to_string(model->config().embed_dim));
  m.add("epochs_run", std::to_string(model->log().epochs_run));
  m.add("final_loss", format_double(model->log().final_loss));
  manifest_output(m, checkpoint);
  scnn::save_manifest(m, (fs::path(out_dir) / (name + ".manifest")).string());
  say(opts, "trained " + name + ": " + std::to_string(model->log().epochs_run) +
                " epochs, final loss " + format_double(model->log().final_loss));
}

void cmd_extract(const CommonOpts& opts, const std::string& model_path,
                 const std::string& data) {
  const std::string out = require_out(opts);
  const scnn::TrainedModel model = scnn::load_model(require_value(model_path, "--model"));
  const RawCorpus corpus = load_raw_corpus(require_value(data, "--data"));

  std::vector<std::vector<double>> rows;
  rows.reserve(corpus.tokens.size());
  for (const auto& tokens : corpus.tokens) {
    rows.push_back(scnn::extract_features(model, tokens).values());
  }
  write_feature_tsv(out, corpus.labels, rows);

  scnn::Manifest m = base_manifest("extract", opts);
  manifest_model(m, model.config().name(), model_path);
  manifest_dataset(m, "input", data);
  manifest_output(m, out);
  scnn::save_manifest(m, out + ".manifest");
  say(opts, "extracted " + std::to_string(rows.size()) + " x " +
                std::to_string(rows.empty() ? 0 : rows.front().size()) + " features");
}

void cmd_fuse(const CommonOpts& opts, const std::string& data,
              const std::string& features) {
  const std::string out = require_out(opts);
  const IniConfig ini = load_config_or_empty(opts);
  const std::string spec_text =
      !features.empty() ? features : ini.get("fusion", "features", "B+S+E+P");
  const scnn::FusionSpec spec = scnn::FusionSpec::parse(spec_text);
  if (spec.mode != scnn::FusionMode::ConcatThenSvm) {
    throw scnn::ConfigError(
        "fuse writes concatenated feature vectors; the static channel only exists "
        "inside experiment runs");
  }

  scnn::Manifest m = base_manifest("fuse", opts);
  const LoadedModels models = load_models(ini, m);
  const RawCorpus corpus = load_raw_corpus(require_value(data, "--data"));

  std::vector<std::vector<double>> rows;
  rows.reserve(corpus.tokens.size());
  for (const auto& tokens : corpus.tokens) {
    rows.push_back(fused_row(models, spec, tokens));
  }
  write_feature_tsv(out, corpus.labels, rows);

  m.add("fusion", spec.to_string());
  manifest_dataset(m, "input", data);
  manifest_output(m, out);
  scnn::save_manifest(m, out + ".manifest");
  say(opts, "fused " + spec.to_string() + " into " + std::to_string(rows.size()) + " x " +
                std::to_string(rows.empty() ? 0 : rows.front().size()) + " features");
}

void cmd_svm_train(const CommonOpts& opts, const std::string& data) {
  const std::string out = require_out(opts);
  const IniConfig ini = load_config_or_empty(opts);
  const FeatureTable table = read_feature_tsv(require_value(data, "--data"));

  std::vector<std::string> class_names;
  for (const auto& label : table.labels) {
    if (std::find(class_names.begin(), class_names.end(), label) == class_names.end()) {
      class_names.push_back(label);
    }
  }
  std::sort(class_names.begin(), class_names.end());
  if (class_names.size() != 2) {
    throw scnn::DataError("svm-train expects exactly 2 distinct labels, found " +
                          std::to_string(class_names.size()));
  }
  std::vector<std::size_t> labels;
  labels.reserve(table.labels.size());
  for (const auto& label : table.labels) {
    labels.push_back(label == class_names[1] ? 1 : 0);
  }
  std::vector<scnn::Tensor> rows;
  rows.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    rows.emplace_back(std::vector<std::size_t>{r.size()}, r);
  }

  scnn::SvmTrainStats stats;
  const scnn::SvmModel model =
      scnn::svm_train(rows, labels, class_names, svm_params_from(ini), &stats);
  scnn::save_svm(out, model);

  scnn::Manifest m = base_manifest("svm-train", opts);
  manifest_dataset(m, "features", data);
  m.add("kernel", scnn::kernel_name(model.kernel));
  m.add("iterations", std::to_string(stats.iterations));
  manifest_output(m, out);
  scnn::save_manifest(m, out + ".manifest");
  say(opts, "svm converged after " + std::to_string(stats.iterations) + " iterations (" +
                class_names[0] + " vs " + class_names[1] + ")");
}

std::vector<scnn::FusionSpec> fusion_list(const IniConfig& ini) {
  const std::string raw = ini.get("experiment", "fusions", "B");
  std::vector<scnn::FusionSpec> specs;
  std::size_t start = 0;
  while (start <= raw.size()) {
    std::size_t comma = raw.find(',', start);
    if (comma == std::string::npos) comma = raw.size();
    std::string token = raw.substr(start, comma - start);
    while (!token.empty() && token.front() == ' ') token.erase(token.begin());
    while (!token.empty() && token.back() == ' ') token.pop_back();
    if (!token.empty()) specs.push_back(scnn::FusionSpec::parse(token));
    start = comma + 1;
  }
  if (specs.empty()) throw scnn::ConfigError("config: [experiment] fusions is empty");
  return specs;
}

scnn::ExperimentSetup experiment_setup(const CommonOpts& opts, const IniConfig& ini) {
  scnn::ExperimentSetup setup;
  setup.baseline = scnn::baseline_config();
  apply_model_overrides(setup.baseline, ini);
  setup.baseline.seed = opts.seed;
  setup.svm = svm_params_from(ini);
  setup.k = ini.get_size("experiment", "k", 5);
  setup.seed = opts.seed;
  setup.vocab_min_count = ini.get_size("model", "vocab_min_count", 1);
  return setup;
}

std::string format_cross_table(const std::vector<scnn::CrossDatasetResult>& rows) {
  std::size_t name_width = 8;
  for (const auto& r : rows) name_width = std::max(name_width, r.fusion.size());
  std::string out = "features";
  out.append(name_width - 8 + 2, ' ');
  out += "train=>test-F1\n";
  char buf[32];
  for (const auto& r : rows) {
    out += r.fusion;
    out.append(name_width - r.fusion.size() + 2, ' ');
    std::snprintf(buf, sizeof buf, "%.4f\n", r.macro_f1);
    out += buf;
  }
  return out;
}

std::string format_cross_tsv(const std::vector<scnn::CrossDatasetResult>& rows) {
  std::string out;
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s\tcross\t%.6f\t%.6f\t%.6f\n", r.fusion.c_str(),
                  r.macro_f1, r.precision, r.recall);
    out += buf;
  }
  return out;
}

void cmd_experiment(const CommonOpts& opts, bool cross_only) {
  const std::string out_dir = require_out(opts);
  if (opts.config_path.empty()) throw scnn::ConfigError("missing --config");
  const IniConfig ini = IniConfig::load(opts.config_path);

  scnn::Manifest m = base_manifest(cross_only ? "cross-dataset" : "experiment", opts);
  const LoadedModels models = load_models(ini, m);
  const scnn::PretrainedBundle bundle = models.bundle();
  const scnn::ExperimentSetup setup = experiment_setup(opts, ini);
  const std::vector<scnn::FusionSpec> specs = fusion_list(ini);

  const std::string train_path = ini.require("data", "train");
  const auto train_ds = scnn::build_dataset(scnn::load_corpus(train_path),
                                            scnn::sarcasm_classes());
  manifest_dataset(m, "train", train_path);
  m.add("k", std::to_string(setup.k));

  std::string table_text, tsv_text;
  if (!cross_only) {
    const auto results = scnn::run_experiment_grid(train_ds, specs, bundle, setup);
    table_text += scnn::format_results_table(results);
    tsv_text += scnn::format_results_tsv(results);
    for (const auto& r : results) {
      m.add("fusion", r.fusion);
    }
  }

  const bool has_test = ini.has("data", "test");
  if (cross_only && !has_test) throw scnn::ConfigError("config: missing [data] test");
  if (has_test) {
    const std::string test_path = ini.get("data", "test");
    const auto test_ds = scnn::build_dataset(scnn::load_corpus(test_path),
                                             scnn::sarcasm_classes());
    manifest_dataset(m, "test", test_path);
    std::vector<scnn::CrossDatasetResult> rows;
    for (const auto& spec : specs) {
      rows.push_back(scnn::cross_dataset_eval(train_ds, test_ds, spec, bundle, setup));
      if (cross_only) m.add("fusion", spec.to_string());
    }
    if (!table_text.empty()) table_text += "\n";
    table_text += format_cross_table(rows);
    tsv_text += format_cross_tsv(rows);
  }

  fs::create_directories(out_dir);
  const std::string table_path = (fs::path(out_dir) / "results.txt").string();
  const std::string tsv_path = (fs::path(out_dir) / "results.tsv").string();
  scnn::atomic_write_file(table_path, table_text);
  scnn::atomic_write_file(tsv_path, tsv_text);
  manifest_output(m, table_path);
  manifest_output(m, tsv_path);
  scnn::save_manifest(m, (fs::path(out_dir) / "manifest").string());
  if (!opts.quiet) std::cout << table_text;
}

struct FeatureProbe {
  std::string model_name;
  std::string class_name;
  std::size_t class_index = 0;
  const scnn::TrainedModel* model = nullptr;
};

FeatureProbe parse_probe(const LoadedModels& models, const std::string& text) {
  const std::size_t colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 >= text.size()) {
    throw scnn::ConfigError("bad feature probe '" + text + "' (want model:class)");
  }
  FeatureProbe probe;
  probe.model_name = text.substr(0, colon);
  probe.class_name = text.substr(colon + 1);
  probe.model = &find_model(models, probe.model_name);
  const auto& classes = scnn::class_names_for(probe.model->config().task);
  const auto it = std::find(classes.begin(), classes.end(), probe.class_name);
  if (it == classes.end()) {
    throw scnn::ConfigError("model '" + probe.model_name + "' has no class '" +
                            probe.class_name + "'");
  }
  probe.class_index = static_cast<std::size_t>(it - classes.begin());
  return probe;
}

void cmd_correlate(const CommonOpts& opts, const std::string& data,
                   const std::string& pairs_arg) {
  const std::string out = require_out(opts);
  const IniConfig ini = load_config_or_empty(opts);
  scnn::Manifest m = base_manifest("correlate", opts);
  const LoadedModels models = load_models(ini, m);
  const RawCorpus corpus = load_raw_corpus(require_value(data, "--data"));

  const std::string pairs_text =
      !pairs_arg.empty() ? pairs_arg : ini.get("correlate", "pairs", "");
  if (pairs_text.empty()) {
    throw scnn::ConfigError("missing --pairs (model:class,model:class[;...])");
  }

  std::map<std::string, std::vector<double>> probe_values;
  auto values_for = [&](const FeatureProbe& probe) -> const std::vector<double>& {
    const std::string key = probe.model_name + ":" + probe.class_name;
    auto it = probe_values.find(key);
    if (it != probe_values.end()) return it->second;
    std::vector<double> vals;
    vals.reserve(corpus.tokens.size());
    for (const auto& tokens : corpus.tokens) {
      const auto pred = probe.model->classify(probe.model->encode_tokens(tokens));
      vals.push_back(pred.probs[probe.class_index]);
    }
    return probe_values.emplace(key, std::move(vals)).first->second;
  };

  std::string tsv = "feature_a\tfeature_b\trho\tt\tp_value\tsignificant\n";
  std::size_t pair_count = 0;
  std::size_t start = 0;
  while (start <= pairs_text.size()) {
    std::size_t semi = pairs_text.find(';', start);
    if (semi == std::string::npos) semi = pairs_text.size();
    const std::string pair = pairs_text.substr(start, semi - start);
    start = semi + 1;
    if (pair.empty()) continue;
    const std::size_t comma = pair.find(',');
    if (comma == std::string::npos) {
      throw scnn::ConfigError("bad probe pair '" + pair + "' (want a,b)");
    }
    const FeatureProbe a = parse_probe(models, pair.substr(0, comma));
    const FeatureProbe b = parse_probe(models, pair.substr(comma + 1));
    const scnn::SpearmanResult r = scnn::spearman(values_for(a), values_for(b));
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s:%s\t%s:%s\t%.6f\t%.6f\t%.6g\t%s\n",
                  a.model_name.c_str(), a.class_name.c_str(), b.model_name.c_str(),
                  b.class_name.c_str(), r.rho, r.t, r.p_value,
                  r.significant ? "yes" : "no");
    tsv += buf;
    ++pair_count;
    m.add("pair", pair);
  }
  if (pair_count == 0) throw scnn::ConfigError("no probe pairs given");

  scnn::atomic_write_file(out, tsv);
  manifest_dataset(m, "input", data);
  manifest_output(m, out);
  scnn::save_manifest(m, out + ".manifest");
  if (!opts.quiet) std::cout << tsv;
}

void cmd_pca(const CommonOpts& opts, const std::string& model_path, const std::string& data,
             std::size_t dims) {
  const std::string out = require_out(opts);
  const scnn::TrainedModel model = scnn::load_model(require_value(model_path, "--model"));
  const RawCorpus corpus = load_raw_corpus(require_value(data, "--data"));
  if (corpus.tokens.empty()) throw scnn::DataError("pca needs a non-empty corpus");

  scnn::Tensor features({corpus.tokens.size(), model.config().fc_units});
  for (std::size_t i = 0; i < corpus.tokens.size(); ++i) {
    const scnn::Tensor f = scnn::extract_features(model, corpus.tokens[i]);
    for (std::size_t j = 0; j < f.size(); ++j) features.at(i, j) = f[j];
  }
  const scnn::PcaResult pca = scnn::pca_fit(features, dims);
  const scnn::Tensor coords = scnn::pca_transform(pca, features);

  std::string tsv = "id";
  if (dims == 2) {
    tsv += "\tx\ty";
  } else {
    for (std::size_t c = 0; c < dims; ++c) tsv += "\tc" + std::to_string(c + 1);
  }
  tsv += "\tlabel\n";
  for (std::size_t i = 0; i < coords.rows(); ++i) {
    tsv += std::to_string(i + 1);
    for (std::size_t c = 0; c < dims; ++c) {
      tsv.push_back('\t');
      tsv += format_double(coords.at(i, c));
    }
    tsv.push_back('\t');
    tsv += corpus.labels[i];
    tsv.push_back('\n');
  }
  scnn::atomic_write_file(out, tsv);

  scnn::Manifest m = base_manifest("pca", opts);
  manifest_model(m, model.config().name(), model_path);
  manifest_dataset(m, "input", data);
  m.add("dims", std::to_string(dims));
  manifest_output(m, out);
  scnn::save_manifest(m, out + ".manifest");
  say(opts, "projected " + std::to_string(coords.rows()) + " tweets to " +
                std::to_string(dims) + " dims");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sarcasm-detection CNN toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonOpts opts;
  app.add_option("--seed", opts.seed, "RNG seed (default 1)");
  app.add_option("--config", opts.config_path, "plain-text key-value config file");
  app.add_option("--out", opts.out, "output file or directory");
  app.add_flag("--quiet", opts.quiet, "suppress progress output");

  std::string data, model_spec, embeddings_path, mechanism = "sentiment-shift";
  std::string task = "sarcasm", features_spec, pairs;
  std::size_t size = 1000, topics = 4, dims = 2;
  std::uint64_t topic_seed = 1;
  double balance = 0.5;

  CLI::App* synth = app.add_subcommand("synth", "generate a deterministic toy corpus");
  synth->add_option("--task", task, "sarcasm|sentiment|emotion|personality:<trait>");
  synth->add_option("--size", size, "number of records");
  synth->add_option("--mechanism", mechanism, "sentiment-shift|lexical-marker");
  synth->add_option("--balance", balance, "sarcastic fraction in (0,1)");
  synth->add_option("--topic-seed", topic_seed, "topic vocabulary seed");
  synth->add_option("--topics", topics, "number of topic families");

  CLI::App* prep = app.add_subcommand("prep", "clean and tokenize a corpus");
  prep->add_option("--data", data, "input corpus TSV");

  CLI::App* train = app.add_subcommand("train", "train a CNN preset");
  train->add_option("--model", model_spec,
                    "sentiment|emotion|personality:<trait>|baseline");
  train->add_option("--data", data, "labeled corpus TSV");
  train->add_option("--embeddings", embeddings_path, "binary embedding file");

  CLI::App* extract = app.add_subcommand("extract", "dump FC-layer features as TSV");
  extract->add_option("--model", model_spec, "checkpoint path");
  extract->add_option("--data", data, "corpus TSV");

  CLI::App* fuse = app.add_subcommand("fuse", "concatenate features from several models");
  fuse->add_option("--data", data, "corpus TSV");
  fuse->add_option("--features", features_spec, "fusion spec, e.g. B+S+E+P");

  CLI::App* svm_train = app.add_subcommand("svm-train", "train an SVM on a feature TSV");
  svm_train->add_option("--data", data, "feature TSV from extract/fuse");

  CLI::App* experiment =
      app.add_subcommand("experiment", "k-fold CV over fusion specs");
  CLI::App* cross = app.add_subcommand("cross-dataset", "train on one corpus, test on another");

  CLI::App* correlate = app.add_subcommand("correlate", "rank-correlate feature probes");
  correlate->add_option("--data", data, "corpus TSV");
  correlate->add_option("--pairs", pairs, "model:class,model:class[;...]");

  CLI::App* pca = app.add_subcommand("pca", "project model features for plotting");
  pca->add_option("--model", model_spec, "checkpoint path");
  pca->add_option("--data", data, "corpus TSV");
  pca->add_option("--dims", dims, "projection dimensions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) {
      cmd_synth(opts, task, size, mechanism, balance, topic_seed, topics);
    } else if (prep->parsed()) {
      cmd_prep(opts, data);
    } else if (train->parsed()) {
      cmd_train(opts, model_spec, data, embeddings_path);
    } else if (extract->parsed()) {
      cmd_extract(opts, model_spec, data);
    } else if (fuse->parsed()) {
      cmd_fuse(opts, data, features_spec);
    } else if (svm_train->parsed()) {
      cmd_svm_train(opts, data);
    } else if (experiment->parsed()) {
      cmd_experiment(opts, false);
    } else if (cross->parsed()) {
      cmd_experiment(opts, true);
    } else if (correlate->parsed()) {
      cmd_correlate(opts, data, pairs);
    } else if (pca->parsed()) {
      cmd_pca(opts, model_spec, data, dims);
    }
  } catch (const scnn::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const scnn::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const scnn::Error& e) {
    // DataError, ParseError, ShapeError: something wrong with the inputs.
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
