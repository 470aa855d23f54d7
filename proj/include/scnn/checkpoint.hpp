#pragma once

#include <bit>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "scnn/error.hpp"
#include "scnn/io.hpp"
#include "scnn/model.hpp"
#include "scnn/tensor.hpp"

namespace scnn {

inline constexpr std::string_view kCheckpointMagic = "SCNN";
inline constexpr std::string_view kSvmSectionTag = "SSVM";
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Little-endian binary writer/reader shared by network and SVM checkpoints.
class BinaryWriter {
 public:
  void bytes(std::string_view b) { buf_.append(b); }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }

  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }

  void sized_text(std::string_view text) {
    u32(static_cast<std::uint32_t>(text.size()));
    bytes(text);
  }

  void tensor(const Tensor& t) {
    u32(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t i = 0; i < t.rank(); ++i) u32(static_cast<std::uint32_t>(t.dim(i)));
    for (std::size_t i = 0; i < t.size(); ++i) f64(t[i]);
  }

  const std::string& str() const { return buf_; }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::string_view data) : data_(data) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("checkpoint: " + what + " at byte " + std::to_string(pos_));
  }

  std::string_view bytes(std::size_t n, const char* what) {
    if (remaining() < n) fail(std::string("truncated ") + what);
    std::string_view out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  void expect(std::string_view tag, const char* what) {
    if (remaining() < tag.size() || data_.substr(pos_, tag.size()) != tag) {
      fail(std::string("expected ") + what);
    }
    pos_ += tag.size();
  }

  bool peek_is(std::string_view tag) const {
    return remaining() >= tag.size() && data_.substr(pos_, tag.size()) == tag;
  }

  std::uint32_t u32(const char* what) {
    const auto b = bytes(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }

  double f64(const char* what) {
    const auto b = bytes(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return std::bit_cast<double>(v);
  }

  std::string sized_text(const char* what) {
    const std::uint32_t n = u32(what);
    if (remaining() < n) fail(std::string("truncated ") + what);
    return std::string(bytes(n, what));
  }

  Tensor tensor(const char* what) {
    const std::uint32_t rank = u32(what);
    if (rank == 0 || rank > 8) fail(std::string(what) + " has implausible rank");
    std::vector<std::size_t> shape(rank);
    std::size_t total = 1;
    for (auto& d : shape) {
      d = u32(what);
      if (d == 0) fail(std::string(what) + " has a zero dimension");
      total *= d;
    }
    if (remaining() < 8 * total) fail(std::string("truncated ") + what);
    std::vector<double> values(total);
    for (auto& v : values) v = f64(what);
    return Tensor(std::move(shape), std::move(values));
  }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

namespace detail {

inline std::string format_exact_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

inline std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

// key=value map with strict accessors; duplicate keys other than "vocab"
// are rejected.
class ConfigText {
 public:
  explicit ConfigText(std::string_view text) {
    for (const auto& line : split_lines(text)) {
      if (line.empty()) continue;
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw ParseError("checkpoint config: line without '=': " + line);
      const std::string key = line.substr(0, eq);
      const std::string value = line.substr(eq + 1);
      if (key == "vocab") {
        vocab_.push_back(value);
      } else if (!map_.emplace(key, value).second) {
        throw ParseError("checkpoint config: duplicate key '" + key + "'");
      }
    }
  }

  const std::string& get(const std::string& key) const {
    auto it = map_.find(key);
    if (it == map_.end()) throw ParseError("checkpoint config: missing key '" + key + "'");
    return it->second;
  }

  std::size_t get_size(const std::string& key) const {
    const std::string& v = get(key);
    char* end = nullptr;
    const unsigned long long n = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
      throw ParseError("checkpoint config: bad integer for '" + key + "': " + v);
    return static_cast<std::size_t>(n);
  }

  std::uint64_t get_u64(const std::string& key) const {
    return static_cast<std::uint64_t>(get_size(key));
  }

  double get_double(const std::string& key) const {
    const std::string& v = get(key);
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
      throw ParseError("checkpoint config: bad number for '" + key + "': " + v);
    return d;
  }

  std::vector<std::size_t> get_size_list(const std::string& key) const {
    const std::string& v = get(key);
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start <= v.size()) {
      std::size_t comma = v.find(',', start);
      const std::string part =
          v.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      char* end = nullptr;
      const unsigned long long n = std::strtoull(part.c_str(), &end, 10);
      if (end == part.c_str() || *end != '\0')
        throw ParseError("checkpoint config: bad list entry for '" + key + "': " + part);
      out.push_back(static_cast<std::size_t>(n));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  }

  const std::vector<std::string>& vocab_lines() const { return vocab_; }

 private:
  std::map<std::string, std::string> map_;
  std::vector<std::string> vocab_;
};

}  // namespace detail

// Model config, training record, and vocabulary as a text block. Tokens
// never contain whitespace, so one vocab= line per token is unambiguous.
inline std::string model_config_text(const ModelConfig& c, const Vocabulary& vocab,
                                     const TrainingLog& log) {
  std::string out;
  out += "task=" + std::string(task_name(c.task)) + "\n";
  out += "trait=" + c.trait + "\n";
  out += "conv1_widths=" + detail::join_sizes(c.conv1.widths) + "\n";
  out += "conv1_maps=" + std::to_string(c.conv1.maps) + "\n";
  out += "pool1=" + std::to_string(c.conv1.pool) + "\n";
  out += "conv2_widths=" + detail::join_sizes(c.conv2.widths) + "\n";
  out += "conv2_maps=" + std::to_string(c.conv2.maps) + "\n";
  out += "pool2=" + std::to_string(c.conv2.pool) + "\n";
  out += "fc_units=" + std::to_string(c.fc_units) + "\n";
  out += "softmax_classes=" + std::to_string(c.softmax_classes) + "\n";
  out += "embed_dim=" + std::to_string(c.embed_dim) + "\n";
  out += "window=" + std::to_string(c.window) + "\n";
  out += "seed=" + std::to_string(c.seed) + "\n";
  out += "learning_rate=" + detail::format_exact_double(c.sgd.learning_rate) + "\n";
  out += "momentum=" + detail::format_exact_double(c.sgd.momentum) + "\n";
  out += "batch_size=" + std::to_string(c.sgd.batch_size) + "\n";
  out += "max_epochs=" + std::to_string(c.sgd.max_epochs) + "\n";
  out += "plateau_tolerance=" + detail::format_exact_double(c.sgd.plateau_tolerance) + "\n";
  out += "plateau_epochs=" + std::to_string(c.sgd.plateau_epochs) + "\n";
  out += "target_loss=" + detail::format_exact_double(c.sgd.target_loss) + "\n";
  out += "epochs_run=" + std::to_string(log.epochs_run) + "\n";
  out += "final_loss=" + detail::format_exact_double(log.final_loss) + "\n";
  out += "plateaued=" + std::string(log.plateaued ? "1" : "0") + "\n";
  out += "vocab_size=" + std::to_string(vocab.size()) + "\n";
  for (const auto& t : vocab.tokens()) out += "vocab=" + t + "\n";
  return out;
}

inline std::string serialize_model(const TrainedModel& model) {
  BinaryWriter w;
  w.bytes(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.sized_text(model_config_text(model.config(), model.vocab(), model.log()));
  auto params = model.network().parameters();
  w.u32(static_cast<std::uint32_t>(params.size() + 1));
  for (const Tensor* p : params) w.tensor(*p);
  w.tensor(model.embeddings().weights());
  return w.take();
}

inline TrainedModel deserialize_model(std::string_view data) {
  BinaryReader r(data);
  r.expect(kCheckpointMagic, "magic bytes \"SCNN\"");
  const std::uint32_t version = r.u32("format version");
  if (version != kCheckpointVersion) {
    throw ParseError("checkpoint: unsupported format version " + std::to_string(version));
  }
  const detail::ConfigText cfg(r.sized_text("model config"));

  ModelConfig c;
  c.task = task_from_name(cfg.get("task"));
  c.trait = cfg.get("trait");
  c.conv1.widths = cfg.get_size_list("conv1_widths");
  c.conv1.maps = cfg.get_size("conv1_maps");
  c.conv1.pool = cfg.get_size("pool1");
  c.conv2.widths = cfg.get_size_list("conv2_widths");
  c.conv2.maps = cfg.get_size("conv2_maps");
  c.conv2.pool = cfg.get_size("pool2");
  c.fc_units = cfg.get_size("fc_units");
  c.softmax_classes = cfg.get_size("softmax_classes");
  c.embed_dim = cfg.get_size("embed_dim");
  c.window = cfg.get_size("window");
  c.seed = cfg.get_u64("seed");
  c.sgd.learning_rate = cfg.get_double("learning_rate");
  c.sgd.momentum = cfg.get_double("momentum");
  c.sgd.batch_size = cfg.get_size("batch_size");
  c.sgd.max_epochs = cfg.get_size("max_epochs");
  c.sgd.plateau_tolerance = cfg.get_double("plateau_tolerance");
  c.sgd.plateau_epochs = cfg.get_size("plateau_epochs");
  c.sgd.target_loss = cfg.get_double("target_loss");

  const std::size_t vocab_size = cfg.get_size("vocab_size");
  const auto& vocab_lines = cfg.vocab_lines();
  if (vocab_lines.size() != vocab_size) {
    throw ParseError("checkpoint config: vocab_size says " + std::to_string(vocab_size) +
                     " but " + std::to_string(vocab_lines.size()) + " vocab lines present");
  }
  if (vocab_size < 2 || vocab_lines[0] != "<pad>" || vocab_lines[1] != "<unk>") {
    throw ParseError("checkpoint config: vocabulary missing reserved <pad>/<unk> rows");
  }
  Vocabulary vocab;
  for (std::size_t i = 2; i < vocab_lines.size(); ++i) vocab.add_token(vocab_lines[i]);
  if (vocab.size() != vocab_size) {
    throw ParseError("checkpoint config: duplicate tokens in vocabulary listing");
  }

  TrainedModel model(c, std::move(vocab), EmbeddingMatrix(vocab_size, c.embed_dim));
  model.log().epochs_run = cfg.get_size("epochs_run");
  model.log().final_loss = cfg.get_double("final_loss");
  model.log().plateaued = cfg.get_size("plateaued") != 0;

  auto params = model.network().parameters();
  params.push_back(&model.embeddings().weights());
  const std::uint32_t count = r.u32("tensor count");
  if (count != params.size()) {
    throw ParseError("checkpoint: holds " + std::to_string(count) + " tensors, model needs " +
                     std::to_string(params.size()));
  }
  for (Tensor* p : params) {
    Tensor t = r.tensor("parameter tensor");
    if (!t.same_shape(*p)) {
      throw ParseError("checkpoint: tensor shape " + t.shape_string() +
                       " does not match expected " + p->shape_string());
    }
    *p = std::move(t);
  }
  if (!r.done()) r.fail("trailing bytes after last tensor");
  return model;
}

inline void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  atomic_write_file(path, serialize_model(model));
}

inline TrainedModel load_model(const std::filesystem::path& path) {
  return deserialize_model(read_file(path));
}

}  // namespace scnn
