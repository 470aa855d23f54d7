#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scnn/error.hpp"
#include "scnn/io.hpp"
#include "scnn/rng.hpp"

namespace scnn {

inline constexpr const char* kToolkitVersion = "1.0.0";

// Content hash used to pin datasets and models in run manifests.
inline std::string content_fingerprint(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string(buf);
}

inline std::string fingerprint_file(const std::string& path) {
  return content_fingerprint(read_file(path));
}

// Ordered key = value text block describing how an artifact was produced.
// Keys may repeat (one line per input dataset, one per model).
class Manifest {
 public:
  void add(std::string key, std::string value) {
    entries_.emplace_back(std::move(key), std::move(value));
  }

  void set(const std::string& key, std::string value) {
    for (auto& [k, v] : entries_) {
      if (k == key) {
        v = std::move(value);
        return;
      }
    }
    entries_.emplace_back(key, std::move(value));
  }

  const std::string* find(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
      if (k == key) return &v;
    }
    return nullptr;
  }

  std::string get(const std::string& key) const {
    const std::string* v = find(key);
    if (!v) throw DataError("manifest: missing key '" + key + "'");
    return *v;
  }

  std::vector<std::string> get_all(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_) {
      if (k == key) out.push_back(v);
    }
    return out;
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

  std::string to_text() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
      out += k;
      out += " = ";
      out += v;
      out.push_back('\n');
    }
    return out;
  }

  static Manifest parse(const std::string& text) {
    Manifest m;
    std::size_t line_no = 0;
    for (const std::string& line : split_lines(text)) {
      ++line_no;
      if (line.empty()) continue;
      const std::size_t sep = line.find(" = ");
      if (sep == std::string::npos) {
        throw ParseError("manifest line " + std::to_string(line_no) +
                         ": expected 'key = value'");
      }
      m.add(line.substr(0, sep), line.substr(sep + 3));
    }
    return m;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

inline void save_manifest(const Manifest& m, const std::string& path) {
  atomic_write_file(path, m.to_text());
}

inline Manifest load_manifest(const std::string& path) {
  return Manifest::parse(read_file(path));
}

}  // namespace scnn
