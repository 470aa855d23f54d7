#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scnn/checkpoint.hpp"
#include "scnn/error.hpp"
#include "scnn/io.hpp"
#include "scnn/tensor.hpp"

namespace scnn {

enum class KernelKind { Linear, Rbf };

inline const char* kernel_name(KernelKind k) {
  return k == KernelKind::Linear ? "linear" : "rbf";
}

inline KernelKind kernel_from_name(std::string_view name) {
  if (name == "linear") return KernelKind::Linear;
  if (name == "rbf") return KernelKind::Rbf;
  throw ConfigError("unknown kernel '" + std::string(name) + "' (expected linear or rbf)");
}

inline double kernel_eval(KernelKind kind, double gamma, const double* a,
                          const double* b, std::size_t d) {
  if (kind == KernelKind::Linear) {
    double dot = 0.0;
    for (std::size_t i = 0; i < d; ++i) dot += a[i] * b[i];
    return dot;
  }
  double dist2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    dist2 += diff * diff;
  }
  return std::exp(-gamma * dist2);
}

inline double kernel_eval(KernelKind kind, double gamma, const std::vector<double>& a,
                          const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw ShapeError("kernel arguments of length " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()));
  }
  return kernel_eval(kind, gamma, a.data(), b.data(), a.size());
}

struct SvmParams {
  KernelKind kernel = KernelKind::Linear;
  double C = 1.0;
  double gamma = 0.01;                              // RBF only
  double tolerance = 1e-3;                          // KKT violation stop
  std::uint64_t kernel_eval_budget = 10'000'000;    // runaway-training guard
  std::size_t max_iterations = 1'000'000;
};

// Per-dimension z-scoring; a constant column gets stdev 1 so it passes
// through as zero rather than dividing by zero.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stdev;

  static Standardizer fit(const Tensor& x) {
    const std::size_t n = x.rows(), d = x.cols();
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.stdev.assign(d, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const double* row = x.row(r);
      for (std::size_t c = 0; c < d; ++c) s.mean[c] += row[c];
    }
    for (double& m : s.mean) m /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
      const double* row = x.row(r);
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = row[c] - s.mean[c];
        s.stdev[c] += diff * diff;
      }
    }
    for (double& v : s.stdev) {
      v = std::sqrt(v / static_cast<double>(n));
      if (v == 0.0) v = 1.0;
    }
    return s;
  }

  std::size_t dim() const { return mean.size(); }

  std::vector<double> apply(const double* x, std::size_t d) const {
    if (d != dim()) {
      throw ShapeError("feature vector of length " + std::to_string(d) +
                       " against standardizer of dimension " + std::to_string(dim()));
    }
    std::vector<double> z(d);
    for (std::size_t i = 0; i < d; ++i) z[i] = (x[i] - mean[i]) / stdev[i];
    return z;
  }

  Tensor apply_rows(const Tensor& x) const {
    Tensor out({x.rows(), x.cols()});
    for (std::size_t r = 0; r < x.rows(); ++r) {
      auto z = apply(x.row(r), x.cols());
      double* dst = out.row(r);
      for (std::size_t c = 0; c < x.cols(); ++c) dst[c] = z[c];
    }
    return out;
  }
};

struct SvmTrainStats {
  std::size_t iterations = 0;
  std::uint64_t kernel_evals = 0;
  double final_violation = 0.0;
  double sum_alpha_y = 0.0;
  std::vector<double> alpha;
  std::vector<double> objective_trace;  // dual objective after each pair update
};

// Binary soft-margin SVM. Internally classes map to y = -1 (alphabet index
// 0) and y = +1 (index 1); the decision tie f(x) = 0 goes to the positive
// class.
class SvmModel {
 public:
  KernelKind kernel = KernelKind::Linear;
  double C = 1.0;
  double gamma = 0.01;
  std::vector<std::string> class_names;  // exactly two, index order
  Standardizer standardizer;
  double bias = 0.0;
  Tensor support_vectors;            // RBF: [m x d] in standardized space
  std::vector<double> dual_coef;     // RBF: alpha_i * y_i per support vector
  std::vector<double> weights;       // Linear: primal w in standardized space

  double decision_value(const double* x, std::size_t d) const {
    const std::vector<double> z = standardizer.apply(x, d);
    if (kernel == KernelKind::Linear) {
      double f = bias;
      for (std::size_t i = 0; i < z.size(); ++i) f += weights[i] * z[i];
      return f;
    }
    double f = bias;
    for (std::size_t s = 0; s < dual_coef.size(); ++s) {
      f += dual_coef[s] *
           kernel_eval(KernelKind::Rbf, gamma, support_vectors.row(s), z.data(), z.size());
    }
    return f;
  }

  double decision_value(const Tensor& x) const { return decision_value(x.data(), x.size()); }

  std::size_t predict_index(const Tensor& x) const {
    return decision_value(x) >= 0.0 ? 1 : 0;
  }

  const std::string& predict_name(const Tensor& x) const {
    return class_names.at(predict_index(x));
  }
};

namespace detail {

// Lazily computed kernel matrix rows with an evaluation budget.
class GramCache {
 public:
  GramCache(const Tensor& z, KernelKind kind, double gamma, std::uint64_t budget,
            std::uint64_t& evals)
      : z_(z), kind_(kind), gamma_(gamma), budget_(budget), evals_(evals),
        rows_(z.rows()) {}

  const std::vector<double>& row(std::size_t i) {
    auto& r = rows_[i];
    if (r.empty()) {
      const std::size_t n = z_.rows();
      evals_ += n;
      if (evals_ > budget_) {
        throw NumericError("svm training exceeded the kernel evaluation budget of " +
                           std::to_string(budget_));
      }
      r.resize(n);
      const double* xi = z_.row(i);
      for (std::size_t j = 0; j < n; ++j) {
        r[j] = kernel_eval(kind_, gamma_, xi, z_.row(j), z_.cols());
      }
    }
    return r;
  }

 private:
  const Tensor& z_;
  KernelKind kind_;
  double gamma_;
  std::uint64_t budget_;
  std::uint64_t& evals_;
  std::vector<std::vector<double>> rows_;
};

}  // namespace detail

// Sequential minimal optimization on the dual with maximal-violating-pair
// working sets. Deterministic: selection scans indices in order and keeps
// the first maximizer.
inline SvmModel svm_train(const Tensor& features, const std::vector<std::size_t>& labels,
                          const std::vector<std::string>& class_names,
                          const SvmParams& params, SvmTrainStats* stats_out = nullptr) {
  if (features.rank() != 2) throw ShapeError("svm features must be a [n x d] matrix");
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  if (labels.size() != n) {
    throw ShapeError("svm got " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(n) + " feature rows");
  }
  if (class_names.size() != 2) {
    throw ConfigError("svm is binary; got " + std::to_string(class_names.size()) +
                      " classes");
  }
  if (params.C <= 0.0) throw ConfigError("svm C must be > 0");
  if (params.kernel == KernelKind::Rbf && params.gamma <= 0.0) {
    throw ConfigError("rbf gamma must be > 0");
  }

  std::vector<double> y(n);
  bool seen[2] = {false, false};
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] > 1) {
      throw DataError("svm label index " + std::to_string(labels[i]) +
                      " outside the binary alphabet");
    }
    seen[labels[i]] = true;
    y[i] = labels[i] == 1 ? 1.0 : -1.0;
  }
  if (!seen[0] || !seen[1]) {
    throw DataError("svm training set contains only class '" +
                    class_names[seen[0] ? 0 : 1] + "'");
  }

  SvmModel model;
  model.kernel = params.kernel;
  model.C = params.C;
  model.gamma = params.gamma;
  model.class_names = class_names;
  model.standardizer = Standardizer::fit(features);
  const Tensor z = model.standardizer.apply_rows(features);

  SvmTrainStats local_stats;
  SvmTrainStats& stats = stats_out ? *stats_out : local_stats;
  stats = SvmTrainStats{};

  detail::GramCache gram(z, params.kernel, params.gamma, params.kernel_eval_budget,
                         stats.kernel_evals);
  const double C = params.C;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> g(n, -1.0);  // gradient of the dual objective

  auto objective = [&]() {
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) obj += alpha[i] * (g[i] - 1.0);
    return 0.5 * obj;
  };

  while (true) {
    // Most violating pair: i gives the tightest lower bound on the bias,
    // j the tightest upper bound; optimal once they cross within tolerance.
    double m_up = -1e300, m_low = 1e300;
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * g[t];
      const bool in_up = (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0);
      const bool in_low = (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C);
      if (in_up && v > m_up) {
        m_up = v;
        i = t;
      }
      if (in_low && v < m_low) {
        m_low = v;
        j = t;
      }
    }
    stats.final_violation = m_up - m_low;
    if (i == n || j == n || m_up - m_low <= params.tolerance) break;
    if (stats.iterations >= params.max_iterations) {
      throw NumericError("svm failed to converge within " +
                         std::to_string(params.max_iterations) + " pair updates");
    }

    const auto& ki = gram.row(i);
    const auto& kj = gram.row(j);
    const double old_ai = alpha[i], old_aj = alpha[j];
    double quad = ki[i] + kj[j] - 2.0 * ki[j];
    if (quad <= 0.0) quad = 1e-12;

    if (y[i] != y[j]) {
      const double delta = (-g[i] - g[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else {
        if (alpha[i] < 0.0) {
          alpha[i] = 0.0;
          alpha[j] = -diff;
        }
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = C + diff;
        }
      }
    } else {
      const double delta = (g[i] - g[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = sum;
        }
        if (alpha[i] < 0.0) {
          alpha[i] = 0.0;
          alpha[j] = sum;
        }
      }
    }

    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) {
      g[t] += y[t] * (y[i] * ki[t] * dai + y[j] * kj[t] * daj);
    }
    ++stats.iterations;
    stats.objective_trace.push_back(objective());
  }

  // Bias from the free support vectors; midpoint of the feasible interval
  // when every multiplier sits on a bound.
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0 && alpha[t] < C) {
      free_sum += -y[t] * g[t];
      ++free_count;
    }
  }
  double m_up = -1e300, m_low = 1e300;
  for (std::size_t t = 0; t < n; ++t) {
    const double v = -y[t] * g[t];
    if ((y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0)) m_up = std::max(m_up, v);
    if ((y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C)) m_low = std::min(m_low, v);
  }
  model.bias = free_count > 0 ? free_sum / static_cast<double>(free_count)
                              : 0.5 * (m_up + m_low);

  stats.alpha = alpha;
  stats.sum_alpha_y = 0.0;
  for (std::size_t t = 0; t < n; ++t) stats.sum_alpha_y += alpha[t] * y[t];

  if (params.kernel == KernelKind::Linear) {
    model.weights.assign(d, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      if (alpha[t] == 0.0) continue;
      const double c = alpha[t] * y[t];
      const double* row = z.row(t);
      for (std::size_t c2 = 0; c2 < d; ++c2) model.weights[c2] += c * row[c2];
    }
  } else {
    std::size_t m = 0;
    for (std::size_t t = 0; t < n; ++t) {
      if (alpha[t] > 0.0) ++m;
    }
    model.support_vectors = Tensor({m, d});
    model.dual_coef.resize(m);
    std::size_t s = 0;
    for (std::size_t t = 0; t < n; ++t) {
      if (alpha[t] == 0.0) continue;
      model.dual_coef[s] = alpha[t] * y[t];
      const double* src = z.row(t);
      double* dst = model.support_vectors.row(s);
      for (std::size_t c2 = 0; c2 < d; ++c2) dst[c2] = src[c2];
      ++s;
    }
  }
  return model;
}

inline SvmModel svm_train(const std::vector<Tensor>& features,
                          const std::vector<std::size_t>& labels,
                          const std::vector<std::string>& class_names,
                          const SvmParams& params, SvmTrainStats* stats_out = nullptr) {
  if (features.empty()) throw DataError("svm training needs at least one example");
  const std::size_t d = features.front().size();
  Tensor x({features.size(), d});
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != d) {
      throw ShapeError("feature row " + std::to_string(i) + " has length " +
                       std::to_string(features[i].size()) + ", expected " +
                       std::to_string(d));
    }
    double* dst = x.row(i);
    for (std::size_t c = 0; c < d; ++c) dst[c] = features[i][c];
  }
  return svm_train(x, labels, class_names, params, stats_out);
}

// SVM checkpoints reuse the network container, distinguished by the section
// tag right after the version field.
inline std::string serialize_svm(const SvmModel& m) {
  BinaryWriter w;
  w.bytes(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.bytes(kSvmSectionTag);
  std::string cfg;
  cfg += "kernel=" + std::string(kernel_name(m.kernel)) + "\n";
  cfg += "C=" + detail::format_exact_double(m.C) + "\n";
  cfg += "gamma=" + detail::format_exact_double(m.gamma) + "\n";
  cfg += "bias=" + detail::format_exact_double(m.bias) + "\n";
  cfg += "class0=" + m.class_names.at(0) + "\n";
  cfg += "class1=" + m.class_names.at(1) + "\n";
  w.sized_text(cfg);
  const bool linear = m.kernel == KernelKind::Linear;
  w.u32(linear ? 3 : 4);
  w.tensor(Tensor({m.standardizer.dim()}, std::vector<double>(m.standardizer.mean)));
  w.tensor(Tensor({m.standardizer.dim()}, std::vector<double>(m.standardizer.stdev)));
  if (linear) {
    w.tensor(Tensor({m.weights.size()}, std::vector<double>(m.weights)));
  } else {
    w.tensor(m.support_vectors);
    w.tensor(Tensor({m.dual_coef.size()}, std::vector<double>(m.dual_coef)));
  }
  return w.take();
}

inline SvmModel deserialize_svm(std::string_view data) {
  BinaryReader r(data);
  r.expect(kCheckpointMagic, "magic bytes \"SCNN\"");
  const std::uint32_t version = r.u32("format version");
  if (version != kCheckpointVersion) {
    throw ParseError("checkpoint: unsupported format version " + std::to_string(version));
  }
  r.expect(kSvmSectionTag, "svm section tag \"SSVM\"");
  const detail::ConfigText cfg(r.sized_text("svm config"));
  SvmModel m;
  m.kernel = kernel_from_name(cfg.get("kernel"));
  m.C = cfg.get_double("C");
  m.gamma = cfg.get_double("gamma");
  m.bias = cfg.get_double("bias");
  m.class_names = {cfg.get("class0"), cfg.get("class1")};
  const std::uint32_t count = r.u32("tensor count");
  const std::uint32_t expected = m.kernel == KernelKind::Linear ? 3 : 4;
  if (count != expected) {
    throw ParseError("checkpoint: svm section holds " + std::to_string(count) +
                     " tensors, expected " + std::to_string(expected));
  }
  m.standardizer.mean = r.tensor("standardizer mean").values();
  m.standardizer.stdev = r.tensor("standardizer stdev").values();
  if (m.kernel == KernelKind::Linear) {
    m.weights = r.tensor("weight vector").values();
  } else {
    m.support_vectors = r.tensor("support vectors");
    m.dual_coef = r.tensor("dual coefficients").values();
    if (m.support_vectors.rank() != 2 ||
        m.support_vectors.rows() != m.dual_coef.size()) {
      throw ParseError("checkpoint: support vector and coefficient counts disagree");
    }
  }
  if (!r.done()) r.fail("trailing bytes after svm section");
  return m;
}

inline void save_svm(const std::filesystem::path& path, const SvmModel& m) {
  atomic_write_file(path, serialize_svm(m));
}

inline SvmModel load_svm(const std::filesystem::path& path) {
  return deserialize_svm(read_file(path));
}

}  // namespace scnn
