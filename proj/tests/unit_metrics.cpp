#include <gtest/gtest.h>

#include <cmath>

#include "scnn/metrics.hpp"
#include "scnn/rng.hpp"

using namespace scnn;

namespace {

// Independent macro-F1: explicit per-class counts, no shared code with the
// library implementation.
double oracle_macro_f1(const std::vector<std::size_t>& preds,
                       const std::vector<std::size_t>& golds, std::size_t k) {
  double sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (preds[i] == c && golds[i] == c) ++tp;
      if (preds[i] == c && golds[i] != c) ++fp;
      if (preds[i] != c && golds[i] == c) ++fn;
    }
    const double p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
    const double r = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
    sum += p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
  return sum / static_cast<double>(k);
}

// Average ranks by sorting, written independently of metrics.hpp.
std::vector<double> oracle_ranks(const std::vector<double>& xs) {
  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

double oracle_pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
  }
  const double ma = sa / n, mb = sb / n;
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    da += (a[i] - ma) * (a[i] - ma);
    db += (b[i] - mb) * (b[i] - mb);
  }
  return num / std::sqrt(da * db);
}

// Student-t CDF closed forms for 1 and 3 degrees of freedom.
double t_two_sided_closed(double t, std::size_t df) {
  const double at = std::fabs(t);
  double cdf;
  if (df == 1) {
    cdf = 0.5 + std::atan(at) / M_PI;
  } else {
    const double u = at / std::sqrt(3.0);
    cdf = 0.5 + (u / (1.0 + u * u) + std::atan(u)) / M_PI;
  }
  return 2.0 * (1.0 - cdf);
}

}  // namespace

TEST(Confusion, CountsAndGuards) {
  ConfusionMatrix cm = confusion_matrix({0, 1, 1, 0}, {0, 1, 0, 1}, 2);
  EXPECT_EQ(cm.at(0, 0), 1u);
  EXPECT_EQ(cm.at(1, 1), 1u);
  EXPECT_EQ(cm.at(1, 0), 1u);  // gold 1 predicted 0
  EXPECT_EQ(cm.at(0, 1), 1u);
  EXPECT_EQ(cm.total(), 4u);
  EXPECT_THROW(confusion_matrix({0}, {0, 1}, 2), ShapeError);
  EXPECT_THROW(confusion_matrix({}, {}, 2), DataError);
  EXPECT_THROW(confusion_matrix({2}, {0}, 2), DataError);
}

TEST(MacroF1, HandCaseAllPredictedA) {
  // gold A,B; everything predicted A: F1(A)=2/3, F1(B)=0.
  const double f1 = macro_f1({0, 0}, {0, 1}, 2);
  EXPECT_NEAR(f1, (2.0 / 3.0 + 0.0) / 2.0, 1e-12);
  EXPECT_NEAR(f1, 0.3333, 5e-5);
}

TEST(MacroF1, PerfectAndZeroDenominators) {
  EXPECT_DOUBLE_EQ(macro_f1({0, 1, 2}, {0, 1, 2}, 3), 1.0);
  // Class 2 never appears anywhere: precision, recall both 0/0 -> 0.
  EXPECT_NEAR(macro_f1({0, 1}, {0, 1}, 3), 2.0 / 3.0, 1e-12);
}

TEST(MacroF1, ExhaustiveBinaryOracleEightItems) {
  std::vector<std::size_t> golds(8), preds(8);
  for (std::size_t g = 0; g < 256; ++g) {
    for (std::size_t p = 0; p < 256; ++p) {
      for (std::size_t i = 0; i < 8; ++i) {
        golds[i] = (g >> i) & 1;
        preds[i] = (p >> i) & 1;
      }
      ASSERT_DOUBLE_EQ(macro_f1(preds, golds, 2), oracle_macro_f1(preds, golds, 2))
          << "g=" << g << " p=" << p;
    }
  }
}

TEST(Metrics, PrecisionRecallAccuracy) {
  const ConfusionMatrix cm = confusion_matrix({0, 0, 1, 1, 1}, {0, 1, 1, 1, 0}, 2);
  const auto per_class = per_class_metrics(cm);
  ASSERT_EQ(per_class.size(), 2u);
  EXPECT_DOUBLE_EQ(per_class[0].precision, 0.5);
  EXPECT_DOUBLE_EQ(per_class[1].recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(accuracy(cm), 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(macro_precision(cm), (0.5 + 2.0 / 3.0) / 2.0);
}

TEST(Ranks, AveragesTies) {
  const auto r = average_ranks({10.0, 20.0, 20.0, 30.0});
  const std::vector<double> want{1.0, 2.5, 2.5, 4.0};
  EXPECT_EQ(r, want);
}

TEST(Spearman, PinnedExamples) {
  const std::vector<double> x{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(spearman(x, x).rho, 1.0);
  EXPECT_DOUBLE_EQ(spearman(x, {4, 3, 2, 1}).rho, -1.0);
  EXPECT_NEAR(spearman(x, {1, 3, 2, 4}).rho, 0.8, 1e-12);
}

TEST(Spearman, PerfectCorrelationHasZeroP) {
  const auto r = spearman({1, 2, 3, 4, 5}, {2, 4, 6, 8, 10});
  EXPECT_DOUBLE_EQ(r.rho, 1.0);
  EXPECT_DOUBLE_EQ(r.p_value, 0.0);
  EXPECT_TRUE(r.significant);
}

TEST(Spearman, MatchesRankFormulaOracleOnRandomPairs) {
  Rng rng(101);
  // One big pair of vectors plus many short ones, ties included.
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = trial == 0 ? 1000 : 3 + rng.below(40);
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Small integer range forces plenty of ties.
      xs[i] = static_cast<double>(rng.below(12));
      ys[i] = static_cast<double>(rng.below(12)) + 0.25 * xs[i];
    }
    const double want = oracle_pearson(oracle_ranks(xs), oracle_ranks(ys));
    EXPECT_NEAR(spearman(xs, ys).rho, want, 1e-12) << "trial " << trial;
  }
}

TEST(Spearman, AffineInvariance) {
  Rng rng(77);
  std::vector<double> xs(25), ys(25), scaled(25);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = rng.uniform(-5.0, 5.0);
    ys[i] = rng.uniform(-5.0, 5.0);
    scaled[i] = 3.5 * xs[i] + 11.0;
  }
  EXPECT_DOUBLE_EQ(spearman(xs, ys).rho, spearman(scaled, ys).rho);
}

TEST(Spearman, Guards) {
  EXPECT_THROW(spearman({1, 2, 3}, {1, 2}), ShapeError);
  EXPECT_THROW(spearman({1, 2}, {1, 2}), DataError);  // n < 3
  EXPECT_THROW(spearman({2, 2, 2}, {1, 2, 3}), DataError);
}

TEST(StudentT, MatchesClosedFormCdfs) {
  for (double t : {0.5, 1.0, 2.0, 3.576, 7.0}) {
    EXPECT_NEAR(student_t_two_sided_p(t, 1), t_two_sided_closed(t, 1), 1e-10) << t;
    EXPECT_NEAR(student_t_two_sided_p(t, 3), t_two_sided_closed(t, 3), 1e-10) << t;
    EXPECT_NEAR(student_t_two_sided_p(-t, 3), student_t_two_sided_p(t, 3), 1e-14);
  }
  EXPECT_NEAR(student_t_two_sided_p(0.0, 5), 1.0, 1e-12);
}

TEST(Spearman, SignificanceAtFivePercent) {
  // rho = 0.8 with n = 4 is not significant; the same rho with n = 40 is.
  std::vector<double> xs, ys;
  for (int rep = 0; rep < 10; ++rep) {
    xs.insert(xs.end(), {1 + 8.0 * rep, 2 + 8.0 * rep, 3 + 8.0 * rep, 4 + 8.0 * rep});
    ys.insert(ys.end(), {1 + 8.0 * rep, 3 + 8.0 * rep, 2 + 8.0 * rep, 4 + 8.0 * rep});
  }
  EXPECT_FALSE(spearman({1, 2, 3, 4}, {1, 3, 2, 4}).significant);
  const auto big = spearman(xs, ys);
  EXPECT_GT(big.rho, 0.9);
  EXPECT_TRUE(big.significant);
}
