#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scnn/error.hpp"

namespace scnn {

// Token <-> index map with two reserved entries: 0 = PAD, 1 = UNK.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;

  Vocabulary() {
    add_token("<pad>");
    add_token("<unk>");
  }

  // Tokens with frequency >= min_count, ordered by (-frequency, token)
  // after the reserved entries.
  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus,
                          std::size_t min_count) {
    if (min_count < 1) throw ConfigError("vocabulary min_count must be >= 1");
    std::map<std::string, std::size_t> counts;
    for (const auto& tokens : corpus) {
      for (const auto& t : tokens) ++counts[t];
    }
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (const auto& [token, count] : counts) {
      if (count >= min_count) kept.emplace_back(token, count);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    Vocabulary v;
    for (const auto& [token, count] : kept) v.add_token(token);
    return v;
  }

  std::size_t size() const { return tokens_.size(); }

  bool contains(std::string_view token) const {
    return index_.find(std::string(token)) != index_.end();
  }

  // UNK for tokens outside the vocabulary.
  std::size_t index_of(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kUnk : it->second;
  }

  const std::string& token_at(std::size_t index) const { return tokens_.at(index); }

  const std::vector<std::string>& tokens() const { return tokens_; }

  void add_token(const std::string& token) {
    if (index_.emplace(token, tokens_.size()).second) tokens_.push_back(token);
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Token indices padded/truncated to exactly n (PAD right-padding).
inline std::vector<std::size_t> encode(const std::vector<std::string>& tokens,
                                       const Vocabulary& vocab, std::size_t n) {
  if (n < 1) throw ConfigError("encode window must be >= 1");
  std::vector<std::size_t> out(n, Vocabulary::kPad);
  const std::size_t limit = std::min(n, tokens.size());
  for (std::size_t i = 0; i < limit; ++i) out[i] = vocab.index_of(tokens[i]);
  return out;
}

// A tweet carried through the pipeline: raw text, cleaned tokens, and
// fixed-width index sequence.
struct TokenizedTweet {
  std::string raw;
  std::vector<std::string> tokens;
  std::vector<std::size_t> indices;
};

}  // namespace scnn
