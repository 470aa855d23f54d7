#pragma once

#include <array>
#include <cctype>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace scnn {

// Strips @mentions, URLs (scheme- or www-prefixed) and #hashtags from a
// tweet, then collapses whitespace. Hashtags are removed whole, content
// included, so no trigger tokens survive. Idempotent.
inline std::string clean_tweet(std::string_view raw) {
  static const std::regex url_re(R"((https?://\S+|www\.\S+))", std::regex::icase);
  static const std::regex mention_re(R"(@\w+)");
  static const std::regex hashtag_re(R"(#\w*)");
  std::string s(raw);
  s = std::regex_replace(s, url_re, " ");
  s = std::regex_replace(s, mention_re, " ");
  s = std::regex_replace(s, hashtag_re, " ");
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

// ASCII emoticon inventory, matched longest-first so ":-(" wins over ":".
// Case matters: ":P" and ":p" are distinct lexical items.
inline const std::vector<std::string>& emoticon_inventory() {
  static const std::vector<std::string> table = {
      ">:-(", ">:-)", ":'-(", ":'-)", "</3",  ">:(",  ">:)",  ":-)",  ":-(",  ":-D",
      ":-P",  ":-p",  ":-O",  ":-o",  ":-/",  ":-\\", ":-|",  ":-*",  ":-]",  ":-[",
      ";-)",  ";-(",  ";-P",  ";-p",  "=-)",  "=-(",  ":')",  ":'(",  "^_^",  "-_-",
      "o_O",  "O_o",  "T_T",  "._.",  "x_x",  "8-)",  "B-)",  "D-:",  "<3",   ":)",
      ":(",   ":D",   ":P",   ":p",   ":O",   ":o",   ":/",   ":\\",  ":|",   ":*",
      ":]",   ":[",   ":3",   ":S",   ":s",   ":>",   ":<",   ";)",   ";(",   ";P",
      ";p",   ";D",   "=)",   "=(",   "=D",   "=P",   "=/",   "=|",   "xD",   "XD",
      "xP",   "D:",   "8)",   "B)"};
  return table;
}

namespace detail {

inline bool is_word_byte(unsigned char c) {
  return std::isalnum(c) != 0 || c >= 0x80;  // non-ASCII bytes group with words
}

inline std::size_t match_emoticon(std::string_view text, std::size_t pos) {
  for (const std::string& e : emoticon_inventory()) {
    if (text.compare(pos, e.size(), e) == 0) return e.size();
  }
  return 0;
}

}  // namespace detail

// Splits cleaned text into word, emoticon and punctuation tokens. Words
// are lowercased; emoticons are kept verbatim; every other character
// becomes its own token.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const unsigned char c = static_cast<unsigned char>(text[pos]);
    if (std::isspace(c)) {
      ++pos;
      continue;
    }
    if (std::size_t len = detail::match_emoticon(text, pos); len > 0) {
      tokens.emplace_back(text.substr(pos, len));
      pos += len;
      continue;
    }
    if (detail::is_word_byte(c)) {
      std::size_t end = pos;
      while (end < text.size() && detail::is_word_byte(static_cast<unsigned char>(text[end]))) {
        ++end;
      }
      std::string word(text.substr(pos, end - pos));
      for (char& ch : word) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      tokens.push_back(std::move(word));
      pos = end;
      continue;
    }
    tokens.emplace_back(1, text[pos]);
    ++pos;
  }
  return tokens;
}

}  // namespace scnn
