#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scnn/dataset.hpp"
#include "scnn/error.hpp"
#include "scnn/metrics.hpp"
#include "scnn/model.hpp"
#include "scnn/rng.hpp"
#include "scnn/svm.hpp"
#include "scnn/tensor.hpp"

namespace scnn {

// Feature blocks in their one canonical concatenation order.
enum class FeatureBlock { Baseline, Sentiment, Emotion, Personality };

inline char block_letter(FeatureBlock b) {
  switch (b) {
    case FeatureBlock::Baseline: return 'B';
    case FeatureBlock::Sentiment: return 'S';
    case FeatureBlock::Emotion: return 'E';
    case FeatureBlock::Personality: return 'P';
  }
  return '?';
}

inline FeatureBlock block_from_letter(char c) {
  switch (c) {
    case 'B': return FeatureBlock::Baseline;
    case 'S': return FeatureBlock::Sentiment;
    case 'E': return FeatureBlock::Emotion;
    case 'P': return FeatureBlock::Personality;
    default:
      throw ConfigError(std::string("unknown feature block '") + c +
                        "' (expected B, S, E, or P)");
  }
}

struct FeatureVector {
  Tensor values;
  std::string source;
};

// Concatenation in the fixed B,S,E,P order; rejects duplicates and
// out-of-order input so every downstream consumer sees one layout.
inline FeatureVector concat_features(const std::vector<FeatureVector>& blocks) {
  if (blocks.empty()) throw ConfigError("cannot concatenate zero feature blocks");
  auto rank = [](const std::string& source) -> int {
    if (source.rfind("baseline", 0) == 0) return 0;
    if (source.rfind("sentiment", 0) == 0) return 1;
    if (source.rfind("emotion", 0) == 0) return 2;
    if (source.rfind("personality", 0) == 0) return 3;
    throw ConfigError("unknown feature source '" + source + "'");
  };
  std::size_t total = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    total += blocks[i].values.size();
    const int cur = rank(blocks[i].source);
    if (i == 0) continue;
    const int prev = rank(blocks[i - 1].source);
    if (cur == prev) throw ConfigError("duplicate feature block '" + blocks[i].source + "'");
    if (cur < prev) {
      throw ConfigError("feature blocks must arrive in B,S,E,P order; got '" +
                        blocks[i].source + "' after '" + blocks[i - 1].source + "'");
    }
  }
  FeatureVector out;
  out.values = Tensor({total});
  std::size_t at = 0;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < b.values.size(); ++i) out.values[at++] = b.values[i];
    if (!out.source.empty()) out.source += "+";
    out.source += b.source;
  }
  return out;
}

enum class FusionMode { ConcatThenSvm, StaticChannelIntoBaseline };

// Which blocks to fuse and how. Text forms: "B+S+E+P" feeds the
// concatenation to an SVM; "static:B+S" folds the non-baseline blocks into
// the baseline network's softmax input instead.
struct FusionSpec {
  std::vector<FeatureBlock> include;  // canonical order, unique
  FusionMode mode = FusionMode::ConcatThenSvm;

  static FusionSpec parse(std::string_view text) {
    FusionSpec spec;
    std::string_view rest = text;
    if (rest.rfind("static:", 0) == 0) {
      spec.mode = FusionMode::StaticChannelIntoBaseline;
      rest.remove_prefix(7);
    }
    bool expect_block = true;
    for (char c : rest) {
      if (expect_block) {
        spec.include.push_back(block_from_letter(c));
        expect_block = false;
      } else if (c == '+') {
        expect_block = true;
      } else {
        throw ConfigError("malformed fusion spec '" + std::string(text) + "'");
      }
    }
    if (spec.include.empty() || expect_block) {
      throw ConfigError("malformed fusion spec '" + std::string(text) + "'");
    }
    spec.validate();
    return spec;
  }

  std::string to_string() const {
    std::string out = mode == FusionMode::StaticChannelIntoBaseline ? "static:" : "";
    for (std::size_t i = 0; i < include.size(); ++i) {
      if (i) out += "+";
      out += block_letter(include[i]);
    }
    return out;
  }

  bool includes(FeatureBlock b) const {
    return std::find(include.begin(), include.end(), b) != include.end();
  }

  std::vector<FeatureBlock> pretrained_blocks() const {
    std::vector<FeatureBlock> out;
    for (FeatureBlock b : include) {
      if (b != FeatureBlock::Baseline) out.push_back(b);
    }
    return out;
  }

  void validate() const {
    if (include.empty()) throw ConfigError("fusion spec selects no feature blocks");
    for (std::size_t i = 1; i < include.size(); ++i) {
      if (include[i] == include[i - 1]) {
        throw ConfigError("fusion spec repeats block '" +
                          std::string(1, block_letter(include[i])) + "'");
      }
      if (include[i] < include[i - 1]) {
        throw ConfigError("fusion spec blocks must be in B,S,E,P order");
      }
    }
    if (mode == FusionMode::StaticChannelIntoBaseline &&
        !includes(FeatureBlock::Baseline)) {
      throw ConfigError("static-channel fusion requires the baseline block B");
    }
  }
};

// Stratified k-fold assignment. Each class's shuffled examples are dealt
// round-robin starting at a rolling offset, which keeps overall fold sizes
// within one of each other, not just within each class.
struct FoldPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::size_t>> folds;  // test indices per fold, ascending

  std::vector<std::size_t> train_indices(std::size_t fold) const {
    std::vector<bool> held(total(), false);
    for (std::size_t i : folds.at(fold)) held[i] = true;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < held.size(); ++i) {
      if (!held[i]) out.push_back(i);
    }
    return out;
  }

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& f : folds) n += f.size();
    return n;
  }
};

inline FoldPlan kfold_split(const std::vector<std::size_t>& labels, std::size_t num_classes,
                            std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k-fold split needs k >= 2");
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) {
      throw DataError("label index " + std::to_string(labels[i]) +
                      " outside the class alphabet");
    }
    by_class[labels[i]].push_back(i);
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (by_class[c].size() < k) {
      throw DataError("class " + std::to_string(c) + " has " +
                      std::to_string(by_class[c].size()) + " examples, fewer than k=" +
                      std::to_string(k));
    }
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.folds.assign(k, {});
  std::size_t offset = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    Rng rng = Rng::stream(seed, 100 + c);
    rng.shuffle(by_class[c]);
    for (std::size_t t = 0; t < by_class[c].size(); ++t) {
      plan.folds[(offset + t) % k].push_back(by_class[c][t]);
    }
    offset = (offset + by_class[c].size() % k) % k;
  }
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

inline LabeledDataset subset(const LabeledDataset& ds, const std::vector<std::size_t>& idx) {
  LabeledDataset out;
  out.class_names = ds.class_names;
  out.tweets.reserve(idx.size());
  out.labels.reserve(idx.size());
  for (std::size_t i : idx) {
    TokenizedTweet t;
    t.raw = ds.tweets[i].raw;
    t.tokens = ds.tweets[i].tokens;
    out.tweets.push_back(std::move(t));
    out.labels.push_back(ds.labels[i]);
  }
  return out;
}

// Frozen feature extractors shared by every experiment: optional sentiment
// and emotion models plus the five personality trait models.
struct PretrainedBundle {
  const TrainedModel* sentiment = nullptr;
  const TrainedModel* emotion = nullptr;
  std::vector<const TrainedModel*> personality;  // trait order when present

  const TrainedModel& require_sentiment() const {
    if (!sentiment) throw ConfigError("fusion spec needs a sentiment model (block S)");
    return *sentiment;
  }
  const TrainedModel& require_emotion() const {
    if (!emotion) throw ConfigError("fusion spec needs an emotion model (block E)");
    return *emotion;
  }
  const std::vector<const TrainedModel*>& require_personality() const {
    if (personality.size() != personality_traits().size()) {
      throw ConfigError("fusion spec needs all five personality trait models (block P)");
    }
    return personality;
  }
};

inline Tensor block_features(const PretrainedBundle& bundle, FeatureBlock block,
                             const std::vector<std::string>& tokens) {
  switch (block) {
    case FeatureBlock::Sentiment: return extract_features(bundle.require_sentiment(), tokens);
    case FeatureBlock::Emotion: return extract_features(bundle.require_emotion(), tokens);
    case FeatureBlock::Personality:
      return extract_personality_features(bundle.require_personality(), tokens);
    case FeatureBlock::Baseline:
      throw ConfigError("baseline features are fold-trained, not pretrained");
  }
  throw ConfigError("unknown feature block");
}

inline std::size_t block_dim(const PretrainedBundle& bundle, FeatureBlock block,
                             const ModelConfig& baseline) {
  switch (block) {
    case FeatureBlock::Baseline: return baseline.fc_units;
    case FeatureBlock::Sentiment: return bundle.require_sentiment().config().fc_units;
    case FeatureBlock::Emotion: return bundle.require_emotion().config().fc_units;
    case FeatureBlock::Personality: {
      std::size_t total = 0;
      for (const TrainedModel* m : bundle.require_personality()) total += m->config().fc_units;
      return total;
    }
  }
  throw ConfigError("unknown feature block");
}

struct ExperimentSetup {
  ModelConfig baseline = baseline_config();
  SvmParams svm;
  std::size_t k = 5;
  std::uint64_t seed = 1;
  std::size_t vocab_min_count = 1;
};

struct FoldRecord {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  double macro_f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  ConfusionMatrix confusion;
};

struct ExperimentResult {
  std::string fusion;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<FoldRecord> folds;
  double mean_f1 = 0.0;
  ConfusionMatrix pooled;
  std::vector<ClassMetrics> per_class;
};

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return splitmix64(seed ^ (0x9e3779b97f4a7c15ULL * (salt + 1)));
}

namespace detail {

struct HoldoutEval {
  double macro_f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  ConfusionMatrix confusion;
};

inline TrainedModel train_fold_baseline(const LabeledDataset& train_raw,
                                        const ExperimentSetup& setup, std::uint64_t seed) {
  ModelConfig cfg = setup.baseline;
  cfg.seed = seed;
  LabeledDataset train = train_raw;
  Vocabulary vocab = Vocabulary::build(token_lists(train), setup.vocab_min_count);
  cfg.window = corpus_window(train);
  encode_dataset(train, vocab, cfg.window);
  EmbeddingMatrix emb = random_embeddings(vocab, cfg.embed_dim, seed);
  return train_model(std::move(cfg), train, vocab, std::move(emb));
}

// One train/score round: fit whatever the fusion spec calls for on the
// train split, score the test split. `frozen_*` carry the pretrained
// blocks' concatenated features, aligned with the split orders. A cached
// baseline (concat mode) skips retraining when the caller already has one
// for this split.
inline HoldoutEval run_holdout(const LabeledDataset& train_raw,
                               const LabeledDataset& test_raw, const FusionSpec& spec,
                               const ExperimentSetup& setup, std::uint64_t seed,
                               const std::vector<Tensor>* frozen_train,
                               const std::vector<Tensor>* frozen_test,
                               std::optional<TrainedModel>* baseline_cache) {
  spec.validate();
  const bool wants_baseline = spec.includes(FeatureBlock::Baseline);
  const bool has_frozen = !spec.pretrained_blocks().empty();
  if (has_frozen) {
    if (!frozen_train || frozen_train->size() != train_raw.size() || !frozen_test ||
        frozen_test->size() != test_raw.size()) {
      throw ConfigError("pretrained feature lists do not line up with the data splits");
    }
  }
  if (train_raw.class_names != test_raw.class_names) {
    throw DataError("train and test corpora use different label alphabets");
  }

  std::vector<std::size_t> predictions;
  predictions.reserve(test_raw.size());

  if (spec.mode == FusionMode::ConcatThenSvm) {
    const TrainedModel* baseline = nullptr;
    std::optional<TrainedModel> local;
    if (wants_baseline) {
      if (baseline_cache && baseline_cache->has_value()) {
        baseline = &**baseline_cache;
      } else {
        local = train_fold_baseline(train_raw, setup, seed);
        if (baseline_cache) {
          *baseline_cache = std::move(local);
          baseline = &**baseline_cache;
        } else {
          baseline = &*local;
        }
      }
    }
    const std::size_t base_dim = wants_baseline ? baseline->config().fc_units : 0;
    const std::size_t frozen_dim = has_frozen ? frozen_train->front().size() : 0;
    const std::size_t dim = base_dim + frozen_dim;

    auto fill_row = [&](double* dst, const LabeledDataset& ds,
                        const std::vector<Tensor>* frozen, std::size_t i) {
      std::size_t at = 0;
      if (wants_baseline) {
        const Tensor f = baseline->features(baseline->encode_tokens(ds.tweets[i].tokens));
        for (std::size_t j = 0; j < f.size(); ++j) dst[at++] = f[j];
      }
      if (has_frozen) {
        const Tensor& f = (*frozen)[i];
        if (f.size() != frozen_dim) {
          throw ShapeError("pretrained feature row of length " + std::to_string(f.size()) +
                           ", expected " + std::to_string(frozen_dim));
        }
        for (std::size_t j = 0; j < f.size(); ++j) dst[at++] = f[j];
      }
    };

    Tensor x_train({train_raw.size(), dim});
    for (std::size_t i = 0; i < train_raw.size(); ++i) {
      fill_row(x_train.row(i), train_raw, frozen_train, i);
    }
    const SvmModel svm =
        svm_train(x_train, train_raw.labels, train_raw.class_names, setup.svm);

    std::vector<double> row(dim);
    for (std::size_t i = 0; i < test_raw.size(); ++i) {
      fill_row(row.data(), test_raw, frozen_test, i);
      predictions.push_back(svm.decision_value(row.data(), dim) >= 0.0 ? 1 : 0);
    }
  } else {
    // Static channel: train the augmented baseline with the pretrained
    // features as constant softmax inputs, then classify with it directly.
    ModelConfig cfg = setup.baseline;
    cfg.seed = seed;
    LabeledDataset train = train_raw;
    Vocabulary vocab = Vocabulary::build(token_lists(train), setup.vocab_min_count);
    cfg.window = corpus_window(train);
    encode_dataset(train, vocab, cfg.window);

    std::vector<std::size_t> static_dims;
    if (has_frozen) static_dims.push_back(frozen_train->front().size());
    Network net = append_static_channel(cfg, static_dims);
    Rng init_rng = Rng::stream(seed, 1);
    net.init_parameters(init_rng);
    EmbeddingMatrix emb = random_embeddings(vocab, cfg.embed_dim, seed);
    run_sgd(net, emb, train, cfg.sgd, seed, "static-channel baseline",
            has_frozen ? frozen_train : nullptr);

    for (std::size_t i = 0; i < test_raw.size(); ++i) {
      const Tensor input = emb.embed(encode(test_raw.tweets[i].tokens, vocab, cfg.window));
      const Tensor* static_block = has_frozen ? &(*frozen_test)[i] : nullptr;
      const auto [probs, loss] = net.probabilities(input, 0, static_block);
      (void)loss;
      predictions.push_back(argmax_lowest(probs));
    }
  }

  HoldoutEval ev;
  ev.confusion =
      confusion_matrix(predictions, test_raw.labels, test_raw.class_names.size());
  ev.macro_f1 = macro_f1(ev.confusion);
  ev.precision = macro_precision(ev.confusion);
  ev.recall = macro_recall(ev.confusion);
  return ev;
}

}  // namespace detail

// Shared scaffolding for a grid of fusion specs over one dataset: the fold
// plan, per-block frozen features, and per-fold baseline models are
// computed once and reused.
class CvRunner {
 public:
  CvRunner(const LabeledDataset& dataset, const PretrainedBundle& bundle,
           ExperimentSetup setup)
      : dataset_(dataset), bundle_(bundle), setup_(std::move(setup)),
        plan_(kfold_split(dataset.labels, dataset.num_classes(), setup_.k, setup_.seed)),
        fold_baseline_(setup_.k) {}

  const FoldPlan& plan() const { return plan_; }

  ExperimentResult run(const FusionSpec& spec) {
    spec.validate();
    const std::vector<Tensor>* frozen = frozen_for(spec);

    ExperimentResult result;
    result.fusion = spec.to_string();
    result.k = setup_.k;
    result.seed = setup_.seed;
    result.pooled = ConfusionMatrix(dataset_.num_classes());

    double sum_f1 = 0.0;
    for (std::size_t f = 0; f < setup_.k; ++f) {
      FoldRecord rec;
      rec.train_indices = plan_.train_indices(f);
      rec.test_indices = plan_.folds[f];
      const LabeledDataset train_raw = subset(dataset_, rec.train_indices);
      const LabeledDataset test_raw = subset(dataset_, rec.test_indices);

      std::vector<Tensor> frozen_train, frozen_test;
      if (frozen) {
        for (std::size_t i : rec.train_indices) frozen_train.push_back((*frozen)[i]);
        for (std::size_t i : rec.test_indices) frozen_test.push_back((*frozen)[i]);
      }

      std::optional<TrainedModel>* cache =
          spec.mode == FusionMode::ConcatThenSvm && spec.includes(FeatureBlock::Baseline)
              ? &fold_baseline_[f]
              : nullptr;
      const auto ev = detail::run_holdout(train_raw, test_raw, spec, setup_,
                                          derive_seed(setup_.seed, f),
                                          frozen ? &frozen_train : nullptr,
                                          frozen ? &frozen_test : nullptr, cache);
      rec.macro_f1 = ev.macro_f1;
      rec.precision = ev.precision;
      rec.recall = ev.recall;
      rec.confusion = ev.confusion;
      result.pooled.add(ev.confusion);
      sum_f1 += ev.macro_f1;
      result.folds.push_back(std::move(rec));
    }
    result.mean_f1 = sum_f1 / static_cast<double>(setup_.k);
    result.per_class = per_class_metrics(result.pooled);
    return result;
  }

  // Fold-trained baseline, exposed so tests can inspect fold hygiene.
  const TrainedModel& fold_baseline(std::size_t fold) {
    if (!fold_baseline_[fold].has_value()) {
      fold_baseline_[fold] = detail::train_fold_baseline(
          subset(dataset_, plan_.train_indices(fold)), setup_, derive_seed(setup_.seed, fold));
    }
    return *fold_baseline_[fold];
  }

 private:
  const std::vector<Tensor>* frozen_for(const FusionSpec& spec) {
    const auto blocks = spec.pretrained_blocks();
    if (blocks.empty()) return nullptr;
    std::string key;
    for (FeatureBlock b : blocks) key += block_letter(b);
    auto it = combined_.find(key);
    if (it != combined_.end()) return &it->second;

    std::vector<Tensor> combined(dataset_.size());
    for (std::size_t i = 0; i < dataset_.size(); ++i) {
      std::vector<FeatureVector> parts;
      for (FeatureBlock b : blocks) {
        FeatureVector fv;
        fv.values = per_block(b)[i];
        fv.source = b == FeatureBlock::Sentiment  ? "sentiment"
                    : b == FeatureBlock::Emotion  ? "emotion"
                                                  : "personality";
        parts.push_back(std::move(fv));
      }
      combined[i] = concat_features(parts).values;
    }
    return &combined_.emplace(key, std::move(combined)).first->second;
  }

  const std::vector<Tensor>& per_block(FeatureBlock b) {
    auto it = per_block_.find(b);
    if (it != per_block_.end()) return it->second;
    std::vector<Tensor> feats(dataset_.size());
    for (std::size_t i = 0; i < dataset_.size(); ++i) {
      feats[i] = block_features(bundle_, b, dataset_.tweets[i].tokens);
    }
    return per_block_.emplace(b, std::move(feats)).first->second;
  }

  const LabeledDataset& dataset_;
  const PretrainedBundle& bundle_;
  ExperimentSetup setup_;
  FoldPlan plan_;
  std::vector<std::optional<TrainedModel>> fold_baseline_;
  std::map<FeatureBlock, std::vector<Tensor>> per_block_;
  std::map<std::string, std::vector<Tensor>> combined_;
};

inline ExperimentResult run_cv_experiment(const LabeledDataset& dataset,
                                          const FusionSpec& spec,
                                          const PretrainedBundle& bundle,
                                          const ExperimentSetup& setup) {
  CvRunner runner(dataset, bundle, setup);
  return runner.run(spec);
}

inline std::vector<ExperimentResult> run_experiment_grid(
    const LabeledDataset& dataset, const std::vector<FusionSpec>& specs,
    const PretrainedBundle& bundle, const ExperimentSetup& setup) {
  CvRunner runner(dataset, bundle, setup);
  std::vector<ExperimentResult> results;
  for (const auto& spec : specs) results.push_back(runner.run(spec));
  return results;
}

struct CrossDatasetResult {
  std::string fusion;
  double macro_f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  ConfusionMatrix confusion;
};

// Train once on the full training corpus, score once on the other corpus.
// Vocabulary, window, and standardization all come from the training side.
inline CrossDatasetResult cross_dataset_eval(const LabeledDataset& train,
                                             const LabeledDataset& test,
                                             const FusionSpec& spec,
                                             const PretrainedBundle& bundle,
                                             const ExperimentSetup& setup) {
  spec.validate();
  if (train.class_names != test.class_names) {
    throw DataError("cross-dataset corpora use different label alphabets");
  }
  std::vector<Tensor> frozen_train, frozen_test;
  const auto blocks = spec.pretrained_blocks();
  const bool has_frozen = !blocks.empty();
  if (has_frozen) {
    auto combined = [&](const LabeledDataset& ds) {
      std::vector<Tensor> out(ds.size());
      for (std::size_t i = 0; i < ds.size(); ++i) {
        std::vector<FeatureVector> parts;
        for (FeatureBlock b : blocks) {
          FeatureVector fv;
          fv.values = block_features(bundle, b, ds.tweets[i].tokens);
          fv.source = b == FeatureBlock::Sentiment  ? "sentiment"
                      : b == FeatureBlock::Emotion  ? "emotion"
                                                    : "personality";
          parts.push_back(std::move(fv));
        }
        out[i] = concat_features(parts).values;
      }
      return out;
    };
    frozen_train = combined(train);
    frozen_test = combined(test);
  }
  const auto ev = detail::run_holdout(train, test, spec, setup,
                                      derive_seed(setup.seed, 0xC7055),
                                      has_frozen ? &frozen_train : nullptr,
                                      has_frozen ? &frozen_test : nullptr, nullptr);
  CrossDatasetResult result;
  result.fusion = spec.to_string();
  result.macro_f1 = ev.macro_f1;
  result.precision = ev.precision;
  result.recall = ev.recall;
  result.confusion = ev.confusion;
  return result;
}

// Aligned human-readable grid plus a machine TSV, the two report shapes
// every experiment command emits.
inline std::string format_results_table(const std::vector<ExperimentResult>& results) {
  std::size_t name_width = 8;
  for (const auto& r : results) name_width = std::max(name_width, r.fusion.size());
  std::string out = "features";
  out.append(name_width - 8 + 2, ' ');
  out += "mean-F1";
  if (!results.empty()) {
    for (std::size_t f = 0; f < results.front().folds.size(); ++f) {
      out += "  fold" + std::to_string(f + 1);
    }
  }
  out += "\n";
  char buf[32];
  for (const auto& r : results) {
    out += r.fusion;
    out.append(name_width - r.fusion.size() + 2, ' ');
    std::snprintf(buf, sizeof buf, "%.4f ", r.mean_f1);
    out += buf;
    for (const auto& fold : r.folds) {
      std::snprintf(buf, sizeof buf, " %.4f", fold.macro_f1);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

inline std::string format_results_tsv(const std::vector<ExperimentResult>& results) {
  std::string out = "fusion_spec\tfold\tmacro_f1\tprecision\trecall\n";
  char buf[96];
  for (const auto& r : results) {
    for (std::size_t f = 0; f < r.folds.size(); ++f) {
      std::snprintf(buf, sizeof buf, "%s\t%zu\t%.6f\t%.6f\t%.6f\n", r.fusion.c_str(), f + 1,
                    r.folds[f].macro_f1, r.folds[f].precision, r.folds[f].recall);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "%s\tmean\t%.6f\t\t\n", r.fusion.c_str(), r.mean_f1);
    out += buf;
  }
  return out;
}

}  // namespace scnn
