// End-to-end tour of the library: synthesize corpora, pre-train the three
// auxiliary models, then compare fusion variants on a small sarcasm set.
// Everything is seeded, so two runs print the same numbers.

#include <iostream>

#include "scnn/scnn.hpp"

using namespace scnn;

int main() {
  SynthSpec spec;
  spec.size = 1200;
  spec.seed = 7;
  spec.topic_seed = 7;
  spec.balance = 0.5;
  const auto sarcasm_records = generate_sarcasm_corpus(spec);
  const auto sarcasm = build_dataset(sarcasm_records, sarcasm_classes());

  // Narrow embeddings and a hot learning rate learn the toy corpora fast;
  // presets default to embed_dim 300 and lr 0.01 for real data.
  auto shrink = [](ModelConfig cfg) {
    cfg.embed_dim = 8;
    cfg.sgd.learning_rate = 0.1;
    cfg.sgd.max_epochs = 20;
    return cfg;
  };

  std::cout << "pre-training sentiment model...\n";
  const auto sentiment = fit_model(
      shrink(sentiment_config()),
      build_dataset(generate_sentiment_corpus(600, 7, 7), sentiment_classes()));

  std::cout << "pre-training emotion model...\n";
  const auto emotion = fit_model(
      shrink(emotion_config()),
      build_dataset(generate_emotion_corpus(600, 7, 7), emotion_classes()));

  std::cout << "pre-training personality models...\n";
  std::vector<TrainedModel> personality;
  for (const auto& trait : personality_traits()) {
    personality.push_back(fit_model(
        shrink(personality_config(trait)),
        build_dataset(generate_personality_corpus(trait, 240, 7, 7),
                      personality_classes())));
  }

  PretrainedBundle bundle;
  bundle.sentiment = &sentiment;
  bundle.emotion = &emotion;
  for (const auto& m : personality) bundle.personality.push_back(&m);

  ExperimentSetup setup;
  setup.baseline = shrink(baseline_config());
  setup.k = 3;
  setup.seed = 7;
  setup.svm.kernel = KernelKind::Rbf;
  setup.svm.C = 8.0;
  setup.svm.gamma = 0.01;

  const std::vector<FusionSpec> specs = {
      FusionSpec::parse("B"),
      FusionSpec::parse("B+S"),
      FusionSpec::parse("B+S+E+P"),
  };
  std::cout << "running 3-fold CV...\n\n";
  const auto results = run_experiment_grid(sarcasm, specs, bundle, setup);
  std::cout << format_results_table(results);

  const auto rho = spearman({1, 2, 3, 4}, {1, 3, 2, 4});
  std::cout << "\nsanity spearman([1,2,3,4],[1,3,2,4]) = " << rho.rho << "\n";
  return 0;
}
