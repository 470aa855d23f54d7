#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scnn/error.hpp"
#include "scnn/io.hpp"
#include "scnn/rng.hpp"
#include "scnn/tensor.hpp"
#include "scnn/vocab.hpp"

namespace scnn {

// One embedding row per vocabulary entry. Row 0 (PAD) is all zeros and the
// trainer never updates it.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() : dim_(0) {}
  EmbeddingMatrix(std::size_t vocab_size, std::size_t dim)
      : weights_({vocab_size, dim}), dim_(dim) {
    if (vocab_size < 2) throw ConfigError("embedding matrix needs PAD and UNK rows");
    if (dim < 1) throw ConfigError("embedding dimension must be >= 1");
  }

  std::size_t vocab_size() const { return weights_.rows(); }
  std::size_t dim() const { return dim_; }
  Tensor& weights() { return weights_; }
  const Tensor& weights() const { return weights_; }

  double* row(std::size_t r) { return weights_.row(r); }
  const double* row(std::size_t r) const { return weights_.row(r); }

  // [n x d] matrix for an index sequence. PAD rows come out as zeros.
  Tensor embed(const std::vector<std::size_t>& indices) const {
    Tensor out({indices.size(), dim_});
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (indices[i] >= vocab_size()) {
        throw DataError("token index " + std::to_string(indices[i]) +
                        " outside embedding matrix of " + std::to_string(vocab_size()));
      }
      const double* src = row(indices[i]);
      double* dst = out.row(i);
      for (std::size_t j = 0; j < dim_; ++j) dst[j] = src[j];
    }
    return out;
  }

 private:
  Tensor weights_;
  std::size_t dim_;
};

// Initial vector for a token missing from the pretrained file. Depends only
// on the token bytes and the seed, so every run agrees on it.
inline std::vector<double> oov_row(std::string_view token, std::size_t dim,
                                   std::uint64_t oov_seed) {
  Rng rng(splitmix64(oov_seed ^ fnv1a64(token)));
  std::vector<double> out(dim);
  for (auto& v : out) v = rng.uniform(-0.25, 0.25);
  return out;
}

inline EmbeddingMatrix random_embeddings(const Vocabulary& vocab, std::size_t dim,
                                         std::uint64_t oov_seed) {
  EmbeddingMatrix m(vocab.size(), dim);
  for (std::size_t r = Vocabulary::kUnk; r < vocab.size(); ++r) {
    auto vec = oov_row(vocab.token_at(r), dim, oov_seed);
    double* dst = m.row(r);
    for (std::size_t j = 0; j < dim; ++j) dst[j] = vec[j];
  }
  return m;
}

namespace detail {

inline float read_f32le(const unsigned char* p) {
  std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                       (static_cast<std::uint32_t>(p[1]) << 8) |
                       (static_cast<std::uint32_t>(p[2]) << 16) |
                       (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

inline void append_f32le(std::string& out, float value) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(value);
  out.push_back(static_cast<char>(bits & 0xff));
  out.push_back(static_cast<char>((bits >> 8) & 0xff));
  out.push_back(static_cast<char>((bits >> 16) & 0xff));
  out.push_back(static_cast<char>((bits >> 24) & 0xff));
}

[[noreturn]] inline void bad_embedding(const std::string& what, std::size_t offset) {
  throw ParseError("embedding file: " + what + " at byte " + std::to_string(offset));
}

}  // namespace detail

// Binary word-vector file: ASCII header "<count> <dim>\n", then per entry the
// token bytes, one space, dim little-endian float32 values, and an optional
// trailing newline.
class PretrainedEmbeddings {
 public:
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return order_.size(); }
  const std::vector<std::string>& tokens() const { return order_; }

  const std::vector<float>* find(std::string_view token) const {
    auto it = table_.find(std::string(token));
    return it == table_.end() ? nullptr : &it->second;
  }

  static PretrainedEmbeddings parse(std::string_view data) {
    PretrainedEmbeddings out;
    const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
    std::size_t pos = 0;

    auto read_uint = [&](const char* what) {
      if (pos >= data.size() || data[pos] < '0' || data[pos] > '9') {
        detail::bad_embedding(std::string("expected ") + what, pos);
      }
      std::size_t value = 0;
      while (pos < data.size() && data[pos] >= '0' && data[pos] <= '9') {
        value = value * 10 + static_cast<std::size_t>(data[pos] - '0');
        ++pos;
      }
      return value;
    };

    const std::size_t count = read_uint("vocabulary count");
    if (pos >= data.size() || data[pos] != ' ')
      detail::bad_embedding("expected space after count", pos);
    ++pos;
    const std::size_t dim = read_uint("dimension");
    if (pos >= data.size() || data[pos] != '\n')
      detail::bad_embedding("expected newline after header", pos);
    ++pos;
    if (dim == 0) detail::bad_embedding("dimension must be positive", 0);
    out.dim_ = dim;

    for (std::size_t entry = 0; entry < count; ++entry) {
      const std::size_t token_start = pos;
      while (pos < data.size() && data[pos] != ' ') {
        if (data[pos] == '\n') detail::bad_embedding("newline inside token", pos);
        ++pos;
      }
      if (pos >= data.size()) detail::bad_embedding("unterminated token", token_start);
      if (pos == token_start) detail::bad_embedding("empty token", pos);
      std::string token(data.substr(token_start, pos - token_start));
      ++pos;  // the separating space
      if (pos + 4 * dim > data.size())
        detail::bad_embedding("truncated vector for '" + token + "'", pos);
      std::vector<float> vec(dim);
      for (std::size_t j = 0; j < dim; ++j, pos += 4)
        vec[j] = detail::read_f32le(bytes + pos);
      if (pos < data.size() && data[pos] == '\n') ++pos;
      if (!out.table_.emplace(token, std::move(vec)).second)
        detail::bad_embedding("duplicate token '" + token + "'", token_start);
      out.order_.push_back(std::move(token));
    }
    if (pos != data.size()) detail::bad_embedding("trailing bytes after last entry", pos);
    return out;
  }

  static PretrainedEmbeddings load(const std::filesystem::path& path) {
    return parse(read_file(path));
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::vector<float>> table_;
};

inline std::string format_embedding_file(const std::vector<std::string>& tokens,
                                         const std::vector<std::vector<float>>& vectors) {
  if (tokens.size() != vectors.size())
    throw ConfigError("token and vector counts differ");
  const std::size_t dim = vectors.empty() ? 0 : vectors.front().size();
  std::string out = std::to_string(tokens.size()) + " " + std::to_string(dim) + "\n";
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (vectors[i].size() != dim) throw ConfigError("ragged embedding vectors");
    out += tokens[i];
    out.push_back(' ');
    for (float v : vectors[i]) detail::append_f32le(out, v);
    out.push_back('\n');
  }
  return out;
}

inline void write_embedding_file(const std::filesystem::path& path,
                                 const std::vector<std::string>& tokens,
                                 const std::vector<std::vector<float>>& vectors) {
  atomic_write_file(path, format_embedding_file(tokens, vectors));
}

// Embedding matrix for a vocabulary, pulling rows from the pretrained table
// where available and falling back to the deterministic OOV draw.
inline EmbeddingMatrix embeddings_from_pretrained(const Vocabulary& vocab,
                                                  const PretrainedEmbeddings& pre,
                                                  std::uint64_t oov_seed) {
  EmbeddingMatrix m(vocab.size(), pre.dim());
  for (std::size_t r = Vocabulary::kUnk; r < vocab.size(); ++r) {
    const std::string& token = vocab.token_at(r);
    double* dst = m.row(r);
    if (const auto* vec = pre.find(token)) {
      for (std::size_t j = 0; j < pre.dim(); ++j) dst[j] = static_cast<double>((*vec)[j]);
    } else {
      const auto fallback = oov_row(token, pre.dim(), oov_seed);
      for (std::size_t j = 0; j < pre.dim(); ++j) dst[j] = fallback[j];
    }
  }
  return m;
}

}  // namespace scnn
