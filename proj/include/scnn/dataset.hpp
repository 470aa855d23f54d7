#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "scnn/error.hpp"
#include "scnn/io.hpp"
#include "scnn/text.hpp"
#include "scnn/vocab.hpp"

namespace scnn {

// Class alphabets are fixed so label indices mean the same thing in every
// corpus, checkpoint, and report.
inline const std::vector<std::string>& sentiment_classes() {
  static const std::vector<std::string> k{"negative", "neutral", "positive"};
  return k;
}
inline const std::vector<std::string>& emotion_classes() {
  static const std::vector<std::string> k{"anger", "disgust", "surprise",
                                          "sadness", "joy", "fear"};
  return k;
}
inline const std::vector<std::string>& personality_classes() {
  static const std::vector<std::string> k{"absent", "present"};
  return k;
}
inline const std::vector<std::string>& sarcasm_classes() {
  static const std::vector<std::string> k{"non-sarcastic", "sarcastic"};
  return k;
}
inline const std::vector<std::string>& personality_traits() {
  static const std::vector<std::string> k{"openness", "conscientiousness",
                                          "extraversion", "agreeableness",
                                          "neuroticism"};
  return k;
}

// One corpus line: "<label>\t<text>".
struct CorpusRecord {
  std::string label;
  std::string text;
};

inline std::vector<CorpusRecord> parse_corpus(std::string_view text) {
  std::vector<CorpusRecord> records;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    const std::string where = "corpus line " + std::to_string(i + 1);
    if (tab == std::string::npos) throw DataError(where + ": missing tab separator");
    if (tab == 0) throw DataError(where + ": empty label");
    // Empty text is legal here; preprocessing can strip a tweet down to
    // nothing and such records are kept. Model building rejects them later.
    records.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return records;
}

inline std::string format_corpus(const std::vector<CorpusRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    if (r.label.empty()) throw DataError("corpus record with empty label");
    if (r.label.find('\t') != std::string::npos ||
        r.label.find('\n') != std::string::npos) {
      throw DataError("corpus label may not contain tab or newline");
    }
    if (r.text.find('\n') != std::string::npos)
      throw DataError("corpus text may not contain newline");
    out += r.label;
    out.push_back('\t');
    out += r.text;
    out.push_back('\n');
  }
  return out;
}

inline std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path) {
  return parse_corpus(read_file(path));
}

inline void save_corpus(const std::filesystem::path& path,
                        const std::vector<CorpusRecord>& records) {
  atomic_write_file(path, format_corpus(records));
}

// Cleaned, tokenized corpus with integer labels against a fixed alphabet.
struct LabeledDataset {
  std::vector<TokenizedTweet> tweets;
  std::vector<std::size_t> labels;
  std::vector<std::string> class_names;

  std::size_t size() const { return labels.size(); }
  std::size_t num_classes() const { return class_names.size(); }
};

inline LabeledDataset build_dataset(const std::vector<CorpusRecord>& records,
                                    const std::vector<std::string>& class_names) {
  LabeledDataset ds;
  ds.class_names = class_names;
  ds.tweets.reserve(records.size());
  ds.labels.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto it = std::find(class_names.begin(), class_names.end(), records[i].label);
    if (it == class_names.end()) {
      std::string expected;
      for (const auto& c : class_names) {
        if (!expected.empty()) expected += ", ";
        expected += c;
      }
      throw DataError("record " + std::to_string(i + 1) + ": unknown label '" +
                      records[i].label + "' (expected one of: " + expected + ")");
    }
    TokenizedTweet tweet;
    tweet.raw = records[i].text;
    tweet.tokens = tokenize(clean_tweet(records[i].text));
    ds.tweets.push_back(std::move(tweet));
    ds.labels.push_back(static_cast<std::size_t>(it - class_names.begin()));
  }
  return ds;
}

// Model input length for a corpus: the longest tweet, capped so one outlier
// does not blow up every convolution.
inline constexpr std::size_t kMaxWindow = 100;

inline std::size_t corpus_window(const LabeledDataset& ds,
                                 std::size_t cap = kMaxWindow) {
  if (ds.tweets.empty()) throw DataError("cannot size a window from an empty corpus");
  std::size_t longest = 0;
  for (const auto& t : ds.tweets) longest = std::max(longest, t.tokens.size());
  if (longest == 0) throw DataError("corpus contains no tokens after cleaning");
  return std::min(longest, cap);
}

inline std::vector<std::vector<std::string>> token_lists(const LabeledDataset& ds) {
  std::vector<std::vector<std::string>> out;
  out.reserve(ds.tweets.size());
  for (const auto& t : ds.tweets) out.push_back(t.tokens);
  return out;
}

inline void encode_dataset(LabeledDataset& ds, const Vocabulary& vocab,
                           std::size_t window) {
  for (auto& t : ds.tweets) t.indices = encode(t.tokens, vocab, window);
}

}  // namespace scnn
