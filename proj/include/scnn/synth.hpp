#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scnn/dataset.hpp"
#include "scnn/error.hpp"
#include "scnn/rng.hpp"

namespace scnn {

// Generators for deterministic toy corpora. They stand in for benchmark
// data the toolkit cannot ship; the sarcasm generator's sentiment-shift
// mechanism pairs a polarity opener with a situation of the opposite
// polarity, the pattern the detector is supposed to catch.

enum class SarcasmMechanism { SentimentShift, LexicalMarker };

inline const char* mechanism_name(SarcasmMechanism m) {
  return m == SarcasmMechanism::SentimentShift ? "sentiment-shift" : "lexical-marker";
}

inline SarcasmMechanism mechanism_from_name(std::string_view name) {
  if (name == "sentiment-shift") return SarcasmMechanism::SentimentShift;
  if (name == "lexical-marker") return SarcasmMechanism::LexicalMarker;
  throw ConfigError("unknown sarcasm mechanism '" + std::string(name) +
                    "' (expected sentiment-shift or lexical-marker)");
}

struct SynthSpec {
  std::size_t size = 1000;
  SarcasmMechanism mechanism = SarcasmMechanism::SentimentShift;
  std::uint64_t seed = 1;        // sampling draws
  std::uint64_t topic_seed = 1;  // topic word families
  std::size_t topics = 4;
  double balance = 0.5;          // sarcastic fraction

  void validate() const {
    if (size < 2) throw ConfigError("synthetic corpus size must be >= 2");
    if (!(balance > 0.0 && balance < 1.0)) {
      throw ConfigError("class balance must lie strictly between 0 and 1");
    }
    if (topics < 1) throw ConfigError("need at least one topic family");
  }
};

namespace lexicon {

inline const std::vector<std::string>& positive_openers() {
  static const std::vector<std::string> k{"love",    "adore",   "enjoy",     "great",
                                          "awesome", "wonderful", "fantastic", "amazing",
                                          "brilliant", "perfect"};
  return k;
}
inline const std::vector<std::string>& negative_openers() {
  static const std::vector<std::string> k{"hate",     "loathe", "dread",    "awful",
                                          "terrible", "horrible", "miserable", "worst",
                                          "annoying", "dreadful"};
  return k;
}
inline const std::vector<std::string>& positive_situations() {
  static const std::vector<std::string> k{"holidays", "sunshine",    "weekends", "parties",
                                          "bonuses",  "victories",   "gifts",    "compliments",
                                          "upgrades", "festivals"};
  return k;
}
inline const std::vector<std::string>& negative_situations() {
  static const std::vector<std::string> k{"mondays",  "traffic", "deadlines", "queues",
                                          "breakups", "headaches", "delays",  "taxes",
                                          "meetings", "chores"};
  return k;
}
inline const std::vector<std::string>& fillers() {
  static const std::vector<std::string> k{"the", "my", "so", "really", "this", "all",
                                          "again", "today"};
  return k;
}
// Neutral run-of-tweet words. They pad every tweet to a realistic length
// without carrying label or topic signal.
inline const std::vector<std::string>& chatter() {
  static const std::vector<std::string> k{
      "just", "kind", "of",    "when",  "you",  "get",  "that", "thing", "about", "it",
      "with", "some", "more",  "other", "every", "time", "now",  "then",  "here",  "there"};
  return k;
}
inline const std::vector<std::string>& emoticons() {
  static const std::vector<std::string> k{":)", ":(", ":D", ";)", ":P"};
  return k;
}
inline const std::vector<std::string>& sarcasm_markers() {
  static const std::vector<std::string> k{"suuure", "riiight", "totally", "obviously",
                                          "clearly"};
  return k;
}

// Joy and sadness/fear deliberately reuse polarity words so emotion and
// sentiment features end up correlated, like the phenomena they imitate.
inline const std::vector<std::string>& emotion_markers(std::size_t emotion_class) {
  static const std::vector<std::vector<std::string>> k{
      {"furious", "rage", "fuming", "outraged", "seething"},          // anger
      {"gross", "nasty", "revolting", "disgusting", "yuck"},          // disgust
      {"whoa", "sudden", "unexpected", "astonished", "stunned"},      // surprise
      {"crying", "lonely", "heartbroken", "gloomy", "miserable"},     // sadness
      {"happy", "joyful", "delighted", "cheerful", "wonderful"},      // joy
      {"scared", "terrified", "afraid", "panic", "dreadful"},         // fear
  };
  return k.at(emotion_class);
}

inline const std::vector<std::string>& trait_markers(const std::string& trait) {
  static const std::unordered_map<std::string, std::vector<std::string>> k{
      {"openness", {"curious", "imaginative", "artistic", "novel", "exploring"}},
      {"conscientiousness", {"organized", "punctual", "careful", "diligent", "thorough"}},
      {"extraversion", {"outgoing", "chatty", "sociable", "lively", "energetic"}},
      {"agreeableness", {"kind", "gentle", "helpful", "friendly", "warm"}},
      {"neuroticism", {"anxious", "worried", "nervous", "tense", "moody"}},
  };
  auto it = k.find(trait);
  if (it == k.end()) throw ConfigError("unknown personality trait '" + trait + "'");
  return it->second;
}

}  // namespace lexicon

namespace detail {

inline std::vector<std::string> nonce_words(Rng& rng, std::size_t count,
                                            std::size_t syllables) {
  static const char* consonants = "bdfgklmnprstvz";
  static const char* vowels = "aeiou";
  std::vector<std::string> out;
  std::unordered_map<std::string, bool> seen;
  while (out.size() < count) {
    std::string word;
    for (std::size_t s = 0; s < syllables; ++s) {
      word += consonants[rng.below(14)];
      word += vowels[rng.below(5)];
    }
    if (!seen.emplace(word, true).second) continue;
    out.push_back(std::move(word));
  }
  return out;
}

}  // namespace detail

// Pronounceable nonce words for one topic family. Distinct corpora get
// distinct families by varying the seed, which is how the generalizability
// experiments arrange topic-disjoint corpora.
inline std::vector<std::string> topic_vocabulary(std::uint64_t topic_seed, std::size_t topic,
                                                 std::size_t count = 12) {
  Rng rng = Rng::stream(topic_seed, 1000 + topic);
  return detail::nonce_words(rng, count, 3);
}

// Topic-local situation words with a fixed polarity: the first half positive,
// the second half negative. They put part of the sentiment-shift signal
// inside the topic vocabulary, so a model trained on other topics loses
// exactly that part when it crosses domains.
struct TopicSituations {
  std::vector<std::string> positive;
  std::vector<std::string> negative;
};

inline TopicSituations topic_situations(std::uint64_t topic_seed, std::size_t topic,
                                        std::size_t per_polarity = 4) {
  Rng rng = Rng::stream(topic_seed, 5000 + topic);
  const auto words = detail::nonce_words(rng, per_polarity * 2, 4);
  TopicSituations out;
  out.positive.assign(words.begin(), words.begin() + per_polarity);
  out.negative.assign(words.begin() + per_polarity, words.end());
  return out;
}

// Percent of sarcasm-corpus situations drawn from the topic-local vocabulary
// instead of the shared lexicon. In-domain models learn both kinds;
// cross-domain models only transfer the shared part.
inline constexpr std::uint64_t kTopicSituationPercent = 35;

namespace detail {

inline const std::string& pick(Rng& rng, const std::vector<std::string>& v) {
  return v[rng.below(v.size())];
}

class TopicPool {
 public:
  TopicPool(std::uint64_t topic_seed, std::size_t topics) {
    for (std::size_t t = 0; t < topics; ++t) {
      families_.push_back(topic_vocabulary(topic_seed, t));
      situations_.push_back(topic_situations(topic_seed, t));
    }
  }

  std::size_t pick_topic(Rng& rng) const { return rng.below(families_.size()); }

  // A couple of neutral same-family topic words.
  void append_filler(Rng& rng, std::size_t topic, std::vector<std::string>& tokens) const {
    const auto& family = families_[topic];
    tokens.push_back(pick(rng, family));
    tokens.push_back(pick(rng, family));
  }

  // Convenience for generators where the topic itself carries no signal.
  void append_topic(Rng& rng, std::vector<std::string>& tokens) const {
    append_filler(rng, pick_topic(rng), tokens);
  }

  const std::string& situation(Rng& rng, std::size_t topic, bool positive) const {
    const auto& s = situations_[topic];
    return pick(rng, positive ? s.positive : s.negative);
  }

 private:
  std::vector<std::vector<std::string>> families_;
  std::vector<TopicSituations> situations_;
};

// Tweets need enough tokens for the deepest convolution stack once the
// window is sized from the corpus, and real tweets are not four words long
// anyway.
inline void append_chatter(Rng& rng, std::vector<std::string>& tokens) {
  const std::size_t extra = 4 + rng.below(4);
  for (std::size_t i = 0; i < extra; ++i) {
    tokens.push_back(pick(rng, lexicon::chatter()));
  }
}

inline std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace detail

inline std::vector<CorpusRecord> generate_sarcasm_corpus(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n_sarcastic = std::min(
      spec.size - 1,
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(
                                   static_cast<double>(spec.size) * spec.balance))));
  Rng rng = Rng::stream(spec.seed, 7);
  detail::TopicPool topics(spec.topic_seed, spec.topics);

  std::vector<CorpusRecord> records;
  records.reserve(spec.size);
  for (std::size_t i = 0; i < spec.size; ++i) {
    const bool sarcastic = i < n_sarcastic;
    const std::size_t topic = topics.pick_topic(rng);
    std::vector<std::string> tokens;
    tokens.push_back("i");

    if (spec.mechanism == SarcasmMechanism::SentimentShift) {
      // Sarcastic tweets cross polarities between opener and situation;
      // sincere ones keep them aligned. No single token gives the label
      // away, the pairing does. The pairing shows up twice per tweet with
      // fresh word draws, the way a sarcastic tweet restates its sentiment.
      const bool opener_positive = rng.below(2) == 0;
      const bool situation_positive = sarcastic ? !opener_positive : opener_positive;
      // One locality decision per tweet: either both situation mentions use
      // the topic-local vocabulary or both use the shared one. A model that
      // never saw this topic loses the whole tweet, not half of it.
      const bool local_situations = rng.below(100) < kTopicSituationPercent;
      for (int rep = 0; rep < 2; ++rep) {
        if (rep) tokens.push_back(detail::pick(rng, lexicon::chatter()));
        tokens.push_back(detail::pick(rng, opener_positive ? lexicon::positive_openers()
                                                           : lexicon::negative_openers()));
        tokens.push_back(detail::pick(rng, lexicon::fillers()));
        if (local_situations) {
          tokens.push_back(topics.situation(rng, topic, situation_positive));
        } else {
          tokens.push_back(detail::pick(rng, situation_positive
                                                 ? lexicon::positive_situations()
                                                 : lexicon::negative_situations()));
        }
      }
    } else {
      const bool positive = rng.below(2) == 0;
      tokens.push_back(detail::pick(rng, positive ? lexicon::positive_openers()
                                                  : lexicon::negative_openers()));
      tokens.push_back(detail::pick(rng, lexicon::fillers()));
      tokens.push_back(detail::pick(rng, positive ? lexicon::positive_situations()
                                                  : lexicon::negative_situations()));
      if (sarcastic) tokens.push_back(detail::pick(rng, lexicon::sarcasm_markers()));
    }

    topics.append_filler(rng, topic, tokens);
    detail::append_chatter(rng, tokens);
    if (rng.below(4) == 0) tokens.push_back(detail::pick(rng, lexicon::emoticons()));
    records.push_back(
        {sarcasm_classes()[sarcastic ? 1 : 0], detail::join_tokens(tokens)});
  }
  rng.shuffle(records);
  return records;
}

// Three-way polarity corpus over the same polarity lexicons the sarcasm
// generator draws from, so a model trained here transfers.
inline std::vector<CorpusRecord> generate_sentiment_corpus(std::size_t size,
                                                           std::uint64_t seed,
                                                           std::uint64_t topic_seed,
                                                           std::size_t topics_count = 4) {
  if (size < 3) throw ConfigError("sentiment corpus size must be >= 3");
  Rng rng = Rng::stream(seed, 11);
  detail::TopicPool topics(topic_seed, topics_count);
  std::vector<CorpusRecord> records;
  records.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t cls = i % 3;  // negative, neutral, positive
    std::vector<std::string> tokens;
    tokens.push_back("i");
    if (cls == 0) {
      tokens.push_back(detail::pick(rng, lexicon::negative_openers()));
      tokens.push_back(detail::pick(rng, lexicon::fillers()));
      tokens.push_back(detail::pick(rng, lexicon::negative_situations()));
    } else if (cls == 2) {
      tokens.push_back(detail::pick(rng, lexicon::positive_openers()));
      tokens.push_back(detail::pick(rng, lexicon::fillers()));
      tokens.push_back(detail::pick(rng, lexicon::positive_situations()));
    } else {
      tokens.push_back(detail::pick(rng, lexicon::fillers()));
      tokens.push_back(detail::pick(rng, lexicon::fillers()));
    }
    topics.append_topic(rng, tokens);
    detail::append_chatter(rng, tokens);
    records.push_back({sentiment_classes()[cls], detail::join_tokens(tokens)});
  }
  rng.shuffle(records);
  return records;
}

inline std::vector<CorpusRecord> generate_emotion_corpus(std::size_t size,
                                                         std::uint64_t seed,
                                                         std::uint64_t topic_seed,
                                                         std::size_t topics_count = 4) {
  const std::size_t classes = emotion_classes().size();
  if (size < classes) throw ConfigError("emotion corpus needs at least one tweet per class");
  Rng rng = Rng::stream(seed, 13);
  detail::TopicPool topics(topic_seed, topics_count);
  std::vector<CorpusRecord> records;
  records.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t cls = i % classes;
    std::vector<std::string> tokens;
    tokens.push_back("i");
    tokens.push_back("feel");
    tokens.push_back(detail::pick(rng, lexicon::emotion_markers(cls)));
    tokens.push_back(detail::pick(rng, lexicon::fillers()));
    tokens.push_back(detail::pick(rng, lexicon::emotion_markers(cls)));
    topics.append_topic(rng, tokens);
    detail::append_chatter(rng, tokens);
    records.push_back({emotion_classes()[cls], detail::join_tokens(tokens)});
  }
  rng.shuffle(records);
  return records;
}

inline std::vector<CorpusRecord> generate_personality_corpus(const std::string& trait,
                                                             std::size_t size,
                                                             std::uint64_t seed,
                                                             std::uint64_t topic_seed,
                                                             std::size_t topics_count = 4) {
  if (size < 2) throw ConfigError("personality corpus size must be >= 2");
  const auto& markers = lexicon::trait_markers(trait);
  Rng rng = Rng::stream(seed, 17 + fnv1a64(trait) % 1000);
  detail::TopicPool topics(topic_seed, topics_count);
  std::vector<CorpusRecord> records;
  records.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    const bool present = i % 2 == 1;
    std::vector<std::string> tokens;
    tokens.push_back("i");
    tokens.push_back("am");
    if (present) {
      tokens.push_back(detail::pick(rng, markers));
      tokens.push_back(detail::pick(rng, lexicon::fillers()));
      tokens.push_back(detail::pick(rng, markers));
    } else {
      tokens.push_back(detail::pick(rng, lexicon::fillers()));
      tokens.push_back(detail::pick(rng, lexicon::fillers()));
    }
    topics.append_topic(rng, tokens);
    detail::append_chatter(rng, tokens);
    records.push_back({personality_classes()[present ? 1 : 0], detail::join_tokens(tokens)});
  }
  rng.shuffle(records);
  return records;
}

// Unigram hinge-loss linear classifier, the honesty check for the
// sentiment-shift mechanism: if this scores as well as the CNN, the corpus
// leaked a single-token giveaway.
inline double bow_linear_oracle_accuracy(const LabeledDataset& train,
                                         const LabeledDataset& test,
                                         std::size_t epochs = 60, double lr = 0.1) {
  if (train.num_classes() != 2 || test.num_classes() != 2) {
    throw ConfigError("the bag-of-words oracle is binary");
  }
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& t : train.tweets) {
    for (const auto& tok : t.tokens) index.emplace(tok, index.size());
  }
  auto counts = [&](const TokenizedTweet& t) {
    std::vector<std::pair<std::size_t, double>> out;
    std::unordered_map<std::size_t, double> acc;
    for (const auto& tok : t.tokens) {
      auto it = index.find(tok);
      if (it != index.end()) acc[it->second] += 1.0;
    }
    out.assign(acc.begin(), acc.end());
    std::sort(out.begin(), out.end());
    return out;
  };

  std::vector<double> w(index.size(), 0.0);
  double b = 0.0;
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng = Rng::stream(29, 1);
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      const double y = train.labels[i] == 1 ? 1.0 : -1.0;
      const auto x = counts(train.tweets[i]);
      double score = b;
      for (const auto& [j, v] : x) score += w[j] * v;
      if (y * score < 1.0) {
        for (const auto& [j, v] : x) w[j] += lr * y * v;
        b += lr * y;
      }
    }
  }

  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto x = counts(test.tweets[i]);
    double score = b;
    for (const auto& [j, v] : x) score += w[j] * v;
    const std::size_t pred = score >= 0.0 ? 1 : 0;
    if (pred == test.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace scnn
