#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "scnn/error.hpp"

namespace scnn {

// Row = gold class, column = predicted class, so row sums are the gold
// counts.
struct ConfusionMatrix {
  std::size_t k = 0;
  std::vector<std::size_t> counts;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t classes) : k(classes), counts(classes * classes, 0) {}

  std::size_t& at(std::size_t gold, std::size_t pred) { return counts[gold * k + pred]; }
  std::size_t at(std::size_t gold, std::size_t pred) const { return counts[gold * k + pred]; }

  void add(const ConfusionMatrix& other) {
    if (other.k != k) throw ShapeError("cannot merge confusion matrices of different sizes");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  }

  std::size_t total() const {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  }
};

inline ConfusionMatrix confusion_matrix(const std::vector<std::size_t>& predictions,
                                        const std::vector<std::size_t>& golds,
                                        std::size_t num_classes) {
  if (predictions.size() != golds.size()) {
    throw ShapeError("got " + std::to_string(predictions.size()) + " predictions for " +
                     std::to_string(golds.size()) + " gold labels");
  }
  if (predictions.empty()) throw DataError("cannot score an empty prediction list");
  ConfusionMatrix m(num_classes);
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (golds[i] >= num_classes || predictions[i] >= num_classes) {
      throw DataError("label index outside the class alphabet at position " +
                      std::to_string(i));
    }
    ++m.at(golds[i], predictions[i]);
  }
  return m;
}

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Zero denominators resolve to 0, so a class nobody predicted and nobody
// held contributes F1 = 0 rather than poisoning the mean.
inline std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& m) {
  std::vector<ClassMetrics> out(m.k);
  for (std::size_t c = 0; c < m.k; ++c) {
    std::size_t tp = m.at(c, c), gold = 0, pred = 0;
    for (std::size_t j = 0; j < m.k; ++j) {
      gold += m.at(c, j);
      pred += m.at(j, c);
    }
    ClassMetrics& cm = out[c];
    cm.precision = pred == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(pred);
    cm.recall = gold == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(gold);
    const double denom = cm.precision + cm.recall;
    cm.f1 = denom == 0.0 ? 0.0 : 2.0 * cm.precision * cm.recall / denom;
  }
  return out;
}

inline double macro_f1(const ConfusionMatrix& m) {
  const auto per_class = per_class_metrics(m);
  double sum = 0.0;
  for (const auto& c : per_class) sum += c.f1;
  return sum / static_cast<double>(m.k);
}

inline double macro_f1(const std::vector<std::size_t>& predictions,
                       const std::vector<std::size_t>& golds, std::size_t num_classes) {
  return macro_f1(confusion_matrix(predictions, golds, num_classes));
}

inline double macro_precision(const ConfusionMatrix& m) {
  const auto per_class = per_class_metrics(m);
  double sum = 0.0;
  for (const auto& c : per_class) sum += c.precision;
  return sum / static_cast<double>(m.k);
}

inline double macro_recall(const ConfusionMatrix& m) {
  const auto per_class = per_class_metrics(m);
  double sum = 0.0;
  for (const auto& c : per_class) sum += c.recall;
  return sum / static_cast<double>(m.k);
}

inline double accuracy(const ConfusionMatrix& m) {
  std::size_t correct = 0;
  for (std::size_t c = 0; c < m.k; ++c) correct += m.at(c, c);
  return static_cast<double>(correct) / static_cast<double>(m.total());
}

// Fractional ranks, 1-based, ties replaced by the average of their
// positions.
inline std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return a < b;
  });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw DataError("correlation undefined: an input vector is constant");
  }
  return sxy / std::sqrt(sxx * syy);
}

namespace detail {

// Continued-fraction core of the regularized incomplete beta function
// (modified Lentz iteration).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete beta continued fraction failed to converge");
}

}  // namespace detail

inline double incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw ConfigError("incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

// Two-sided p-value of Student's t with nu degrees of freedom.
inline double student_t_two_sided_p(double t, double nu) {
  if (nu <= 0.0) throw ConfigError("student t needs positive degrees of freedom");
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(0.5 * nu, 0.5, nu / (nu + t * t));
}

struct SpearmanResult {
  double rho = 0.0;
  double t = 0.0;
  double p_value = 1.0;
  bool significant = false;  // two-sided at 0.05
};

// Spearman's rank correlation as Pearson over average ranks, with the
// t-approximation for significance.
inline SpearmanResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw ShapeError("correlation inputs of length " + std::to_string(x.size()) + " and " +
                     std::to_string(y.size()));
  }
  if (x.size() < 3) throw DataError("correlation needs at least 3 observations");
  SpearmanResult r;
  r.rho = pearson(average_ranks(x), average_ranks(y));
  const double n = static_cast<double>(x.size());
  const double denom = 1.0 - r.rho * r.rho;
  if (denom <= 0.0) {
    r.t = r.rho > 0 ? INFINITY : -INFINITY;
    r.p_value = 0.0;
  } else {
    r.t = r.rho * std::sqrt((n - 2.0) / denom);
    r.p_value = student_t_two_sided_p(r.t, n - 2.0);
  }
  r.significant = r.p_value < 0.05;
  return r;
}

}  // namespace scnn
