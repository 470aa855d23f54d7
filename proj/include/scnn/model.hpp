#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scnn/dataset.hpp"
#include "scnn/embeddings.hpp"
#include "scnn/error.hpp"
#include "scnn/network.hpp"
#include "scnn/optimizer.hpp"
#include "scnn/rng.hpp"
#include "scnn/tensor.hpp"
#include "scnn/vocab.hpp"

namespace scnn {

enum class TaskKind { Sentiment, Emotion, Personality, Baseline };

inline const char* task_name(TaskKind t) {
  switch (t) {
    case TaskKind::Sentiment: return "sentiment";
    case TaskKind::Emotion: return "emotion";
    case TaskKind::Personality: return "personality";
    case TaskKind::Baseline: return "baseline";
  }
  return "?";
}

inline TaskKind task_from_name(std::string_view name) {
  if (name == "sentiment") return TaskKind::Sentiment;
  if (name == "emotion") return TaskKind::Emotion;
  if (name == "personality") return TaskKind::Personality;
  if (name == "baseline") return TaskKind::Baseline;
  throw ConfigError("unknown task '" + std::string(name) +
                    "' (expected sentiment, emotion, personality, or baseline)");
}

inline const std::vector<std::string>& class_names_for(TaskKind t) {
  switch (t) {
    case TaskKind::Sentiment: return sentiment_classes();
    case TaskKind::Emotion: return emotion_classes();
    case TaskKind::Personality: return personality_classes();
    case TaskKind::Baseline: return sarcasm_classes();
  }
  return sarcasm_classes();
}

struct ConvStage {
  std::vector<std::size_t> widths;
  std::size_t maps = 0;
  std::size_t pool = 0;
};

// Architecture plus training hyperparameters for one network. The presets
// below are the source of truth for the four model families.
struct ModelConfig {
  TaskKind task = TaskKind::Baseline;
  std::string trait;  // personality models only
  ConvStage conv1;
  ConvStage conv2;
  std::size_t fc_units = 0;
  std::size_t softmax_classes = 0;
  std::size_t embed_dim = 300;
  std::size_t window = 0;  // sized from the training corpus
  SgdHyperparams sgd;
  std::uint64_t seed = 1;

  std::string name() const {
    std::string n(task_name(task));
    if (task == TaskKind::Personality) n += "-" + trait;
    return n;
  }

  void validate() const {
    if (task == TaskKind::Personality) {
      const auto& traits = personality_traits();
      if (std::find(traits.begin(), traits.end(), trait) == traits.end()) {
        throw ConfigError("personality model needs a trait out of "
                          "openness/conscientiousness/extraversion/agreeableness/neuroticism, got '" +
                          trait + "'");
      }
    } else if (!trait.empty()) {
      throw ConfigError("trait is only meaningful for personality models");
    }
    if (softmax_classes != class_names_for(task).size()) {
      throw ConfigError(name() + ": softmax width " + std::to_string(softmax_classes) +
                        " does not match its class alphabet of " +
                        std::to_string(class_names_for(task).size()));
    }
  }

  std::vector<LayerSpec> layer_specs() const {
    std::vector<LayerSpec> specs;
    specs.push_back(LayerSpec::convolution(conv1.widths, conv1.maps));
    specs.push_back(LayerSpec::activation());
    specs.push_back(LayerSpec::max_pool(conv1.pool));
    specs.push_back(LayerSpec::convolution(conv2.widths, conv2.maps));
    specs.push_back(LayerSpec::activation());
    specs.push_back(LayerSpec::max_pool(conv2.pool));
    specs.push_back(LayerSpec::fully_connected(fc_units));
    specs.push_back(LayerSpec::activation());
    specs.push_back(LayerSpec::softmax(softmax_classes));
    return specs;
  }
};

inline ModelConfig sentiment_config() {
  ModelConfig c;
  c.task = TaskKind::Sentiment;
  c.conv1 = {{4, 5}, 50, 2};
  c.conv2 = {{3}, 100, 2};
  c.fc_units = 100;
  c.softmax_classes = 3;
  return c;
}

inline ModelConfig emotion_config() {
  ModelConfig c;
  c.task = TaskKind::Emotion;
  c.conv1 = {{3, 4, 5}, 50, 2};
  c.conv2 = {{2}, 100, 2};
  c.fc_units = 150;
  c.softmax_classes = 6;
  return c;
}

inline ModelConfig personality_config(const std::string& trait) {
  ModelConfig c = emotion_config();
  c.task = TaskKind::Personality;
  c.trait = trait;
  c.softmax_classes = 2;
  c.validate();
  return c;
}

inline ModelConfig baseline_config() {
  ModelConfig c = sentiment_config();
  c.task = TaskKind::Baseline;
  c.softmax_classes = 2;
  return c;
}

inline ModelConfig preset_for(TaskKind task, const std::string& trait = "") {
  switch (task) {
    case TaskKind::Sentiment: return sentiment_config();
    case TaskKind::Emotion: return emotion_config();
    case TaskKind::Personality: return personality_config(trait);
    case TaskKind::Baseline: return baseline_config();
  }
  throw ConfigError("unknown task");
}

inline Network build_model(const ModelConfig& config, std::size_t static_dim = 0) {
  config.validate();
  if (config.window < 1) throw ConfigError(config.name() + ": window not set");
  return Network(config.layer_specs(), config.window, config.embed_dim, static_dim);
}

// Baseline network widened to accept frozen feature blocks right before the
// softmax layer. With no blocks it reduces to the plain preset.
inline Network append_static_channel(const ModelConfig& baseline,
                                     const std::vector<std::size_t>& pretrained_dims) {
  std::size_t total = 0;
  for (std::size_t d : pretrained_dims) {
    if (d < 1) throw ConfigError("static feature block with zero width");
    total += d;
  }
  return build_model(baseline, total);
}

struct TrainingLog {
  std::vector<double> epoch_losses;
  std::size_t epochs_run = 0;
  bool plateaued = false;
  double final_loss = 0.0;
};

struct Prediction {
  std::size_t class_index = 0;
  Tensor probs;
};

inline std::size_t argmax_lowest(const Tensor& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

// A frozen network bundled with everything needed to run it on raw text.
class TrainedModel {
 public:
  TrainedModel(ModelConfig config, Vocabulary vocab, EmbeddingMatrix embeddings)
      : config_(std::move(config)),
        vocab_(std::move(vocab)),
        embeddings_(std::move(embeddings)),
        network_(config_.layer_specs(), config_.window, config_.embed_dim) {
    config_.validate();
    if (embeddings_.vocab_size() != vocab_.size() ||
        embeddings_.dim() != config_.embed_dim) {
      throw ConfigError(config_.name() + ": embedding matrix is " +
                        std::to_string(embeddings_.vocab_size()) + "x" +
                        std::to_string(embeddings_.dim()) + ", expected " +
                        std::to_string(vocab_.size()) + "x" +
                        std::to_string(config_.embed_dim));
    }
  }

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  const EmbeddingMatrix& embeddings() const { return embeddings_; }
  EmbeddingMatrix& embeddings() { return embeddings_; }
  const Network& network() const { return network_; }
  Network& network() { return network_; }
  const TrainingLog& log() const { return log_; }
  TrainingLog& log() { return log_; }

  std::vector<std::size_t> encode_tokens(const std::vector<std::string>& tokens) const {
    return encode(tokens, vocab_, config_.window);
  }

  Tensor input_for(const std::vector<std::size_t>& indices) const {
    return embeddings_.embed(indices);
  }

  Tensor features(const std::vector<std::size_t>& indices) const {
    return network_.features(input_for(indices));
  }

  Prediction classify(const std::vector<std::size_t>& indices) const {
    auto [probs, loss] = network_.probabilities(input_for(indices), 0);
    (void)loss;
    Prediction p;
    p.class_index = argmax_lowest(probs);
    p.probs = std::move(probs);
    return p;
  }

  const std::string& class_name(std::size_t index) const {
    return class_names_for(config_.task).at(index);
  }

 private:
  ModelConfig config_;
  Vocabulary vocab_;
  EmbeddingMatrix embeddings_;
  Network network_;
  TrainingLog log_;
};

namespace detail {

// Adds the input-matrix gradient onto the embedding gradient rows it came
// from. The PAD row is skipped, which keeps it at zero forever.
inline void scatter_embedding_gradient(const Tensor& input_grad,
                                       const std::vector<std::size_t>& indices,
                                       Tensor& embed_grad) {
  const std::size_t d = embed_grad.cols();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] == Vocabulary::kPad) continue;
    const double* src = input_grad.row(i);
    double* dst = embed_grad.row(indices[i]);
    for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
  }
}

}  // namespace detail

// Minibatch SGD over network parameters and the (non-static) embedding
// matrix. Deterministic: example order draws from a stream of the seed and
// examples inside a batch accumulate in that fixed order. Per-example
// static feature blocks, when given, enter the softmax input as constants
// and receive no gradient.
inline TrainingLog run_sgd(Network& net, EmbeddingMatrix& embeddings,
                           const LabeledDataset& dataset, const SgdHyperparams& hp,
                           std::uint64_t seed, const std::string& context,
                           const std::vector<Tensor>* statics = nullptr) {
  if (dataset.size() == 0) throw DataError(context + ": empty training set");
  if (dataset.num_classes() != net.num_classes()) {
    throw DataError(context + ": dataset has " + std::to_string(dataset.num_classes()) +
                    " classes, model expects " + std::to_string(net.num_classes()));
  }
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset.tweets[i].indices.size() != net.input_len()) {
      throw DataError(context + ": record " + std::to_string(i + 1) +
                      " is not encoded to window " + std::to_string(net.input_len()));
    }
  }
  if (net.static_dim() > 0 && (!statics || statics->size() != dataset.size())) {
    throw ConfigError(context + ": network expects a static block per example");
  }

  std::vector<Tensor*> params = net.parameters();
  params.push_back(&embeddings.weights());
  std::vector<Tensor> batch_grads;
  batch_grads.reserve(params.size());
  for (const Tensor* p : params) batch_grads.emplace_back(p->shape());

  SgdOptimizer opt(hp.learning_rate, hp.momentum);
  Rng order_rng = Rng::stream(seed, 2);
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainingLog log;
  Gradients grads;
  double prev_loss = 0.0;
  std::size_t flat_epochs = 0;
  for (std::size_t epoch = 0; epoch < hp.max_epochs; ++epoch) {
    order_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
      const std::size_t stop = std::min(order.size(), start + hp.batch_size);
      for (auto& g : batch_grads) g.fill(0.0);
      for (std::size_t bi = start; bi < stop; ++bi) {
        const std::size_t ex = order[bi];
        const Tensor input = embeddings.embed(dataset.tweets[ex].indices);
        const Tensor* static_block = statics ? &(*statics)[ex] : nullptr;
        const double loss =
            net.loss_and_gradients(input, dataset.labels[ex], grads, static_block);
        if (!std::isfinite(loss)) {
          throw NumericError(context + ": non-finite loss at epoch " +
                             std::to_string(epoch + 1));
        }
        epoch_loss += loss;
        for (std::size_t pi = 0; pi < grads.params.size(); ++pi) {
          Tensor& acc = batch_grads[pi];
          const Tensor& g = grads.params[pi];
          for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += g[k];
        }
        detail::scatter_embedding_gradient(grads.input, dataset.tweets[ex].indices,
                                           batch_grads.back());
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (auto& g : batch_grads) {
        for (std::size_t k = 0; k < g.size(); ++k) g[k] *= scale;
      }
      opt.step(params, batch_grads);
    }
    const double mean_loss = epoch_loss / static_cast<double>(dataset.size());
    log.epoch_losses.push_back(mean_loss);
    log.epochs_run = epoch + 1;
    log.final_loss = mean_loss;
    if (hp.target_loss > 0.0 && mean_loss < hp.target_loss) break;
    if (epoch > 0 && prev_loss - mean_loss < hp.plateau_tolerance) {
      if (++flat_epochs >= hp.plateau_epochs) {
        log.plateaued = true;
        break;
      }
    } else {
      flat_epochs = 0;
    }
    prev_loss = mean_loss;
  }
  return log;
}

inline TrainedModel train_model(ModelConfig config, const LabeledDataset& dataset,
                                const Vocabulary& vocab, EmbeddingMatrix embeddings) {
  config.validate();
  if (dataset.num_classes() != config.softmax_classes) {
    throw DataError(config.name() + ": dataset has " +
                    std::to_string(dataset.num_classes()) + " classes, model expects " +
                    std::to_string(config.softmax_classes));
  }
  TrainedModel model(std::move(config), vocab, std::move(embeddings));
  const ModelConfig& cfg = model.config();
  Rng init_rng = Rng::stream(cfg.seed, 1);
  model.network().init_parameters(init_rng);
  model.log() = run_sgd(model.network(), model.embeddings(), dataset, cfg.sgd, cfg.seed,
                        cfg.name());
  return model;
}

// Vocabulary, window, and embeddings built from the dataset itself, then a
// full training run. The usual entry point when no pretrained vectors are
// in play.
inline TrainedModel fit_model(ModelConfig config, LabeledDataset dataset,
                              std::size_t min_count = 1) {
  Vocabulary vocab = Vocabulary::build(token_lists(dataset), min_count);
  if (config.window == 0) config.window = corpus_window(dataset);
  encode_dataset(dataset, vocab, config.window);
  EmbeddingMatrix embeddings = random_embeddings(vocab, config.embed_dim, config.seed);
  return train_model(std::move(config), dataset, vocab, std::move(embeddings));
}

// Feature vector of a frozen model: the post-activation FC output.
inline Tensor extract_features(const TrainedModel& model,
                               const std::vector<std::size_t>& indices) {
  return model.features(indices);
}

inline Tensor extract_features(const TrainedModel& model,
                               const std::vector<std::string>& tokens) {
  return model.features(model.encode_tokens(tokens));
}

// Trait features concatenated in the fixed trait order. The model list must
// arrive in that same order; this is the single place that enforces it.
inline Tensor extract_personality_features(
    const std::vector<const TrainedModel*>& models,
    const std::vector<std::string>& tokens) {
  const auto& traits = personality_traits();
  if (models.size() != traits.size()) {
    throw ConfigError("personality extraction needs exactly " +
                      std::to_string(traits.size()) + " trait models, got " +
                      std::to_string(models.size()));
  }
  std::size_t total = 0;
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (!models[i]) throw ConfigError("personality trait model missing at position " +
                                      std::to_string(i));
    const ModelConfig& c = models[i]->config();
    if (c.task != TaskKind::Personality || c.trait != traits[i]) {
      throw ConfigError("personality model at position " + std::to_string(i) +
                        " should be trait '" + traits[i] + "', got '" + c.name() + "'");
    }
    total += c.fc_units;
  }
  Tensor out({total});
  std::size_t at = 0;
  for (const TrainedModel* m : models) {
    Tensor f = extract_features(*m, tokens);
    for (std::size_t i = 0; i < f.size(); ++i) out[at++] = f[i];
  }
  return out;
}

}  // namespace scnn
