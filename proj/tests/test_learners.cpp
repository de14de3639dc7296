#include <gtest/gtest.h>

#include <random>
#include <set>

#include "lpwfcm/learners.hpp"

using namespace lpwfcm;

namespace {

BinaryProblem make_problem(const std::vector<std::vector<double>>& x, const std::vector<int>& y) {
  BinaryProblem p;
  for (const auto& r : x) p.features.append_row(r);
  for (int v : y) p.targets.push_back(static_cast<unsigned char>(v));
  return p;
}

double accuracy(const BinaryModel& m, const BinaryProblem& p) {
  double ok = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto s = predict_soft(m, p.features.row(i));
    ok += (s.d1 > 0.5) == static_cast<bool>(p.targets[i]);
  }
  return ok / static_cast<double>(p.size());
}

double gini(double pos, double n) {
  if (n == 0) return 0;
  const double q = pos / n;
  return 1 - q * q - (1 - q) * (1 - q);
}

// Minimum weighted Gini over every (feature, midpoint) split, by direct counting.
double brute_stump_impurity(const BinaryProblem& p, bool& any_split) {
  any_split = false;
  double best = 1e300;
  const double n = static_cast<double>(p.size());
  for (std::size_t j = 0; j < p.features.cols(); ++j) {
    std::set<double> vals;
    for (std::size_t i = 0; i < p.size(); ++i) vals.insert(p.features(i, j));
    std::vector<double> v(vals.begin(), vals.end());
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      const double thr = v[k] + (v[k + 1] - v[k]) / 2;
      double nl = 0, pl = 0, nr = 0, pr = 0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (p.features(i, j) <= thr) {
          nl += 1;
          pl += p.targets[i];
        } else {
          nr += 1;
          pr += p.targets[i];
        }
      }
      best = std::min(best, nl / n * gini(pl, nl) + nr / n * gini(pr, nr));
      any_split = true;
    }
  }
  return best;
}

double stump_impurity(const BinaryModel& m, const BinaryProblem& p) {
  const auto& st = std::get<StumpParams>(m.params);
  double nl = 0, pl = 0, nr = 0, pr = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.features(i, st.feature) <= st.threshold) {
      nl += 1;
      pl += p.targets[i];
    } else {
      nr += 1;
      pr += p.targets[i];
    }
  }
  const double n = nl + nr;
  return nl / n * gini(pl, nl) + nr / n * gini(pr, nr);
}

}  // namespace

TEST(NaiveBayes, SeparatedClusters) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0, 1);
  BinaryProblem p;
  for (int i = 0; i < 100; ++i) {
    const bool pos = i < 50;
    p.features.append_row(std::vector<double>{(pos ? 3.0 : -3.0) + z(rng)});
    p.targets.push_back(pos);
  }
  const auto m = fit_naive_bayes(p);
  EXPECT_GE(accuracy(m, p), 0.95);
}

TEST(NaiveBayes, MatchesDirectLikelihood) {
  const auto p = make_problem({{0.0, 1.0}, {1.0, 2.0}, {2.0, 2.5}, {5.0, -1.0}, {6.0, 0.0}}, {1, 1, 1, 0, 0});
  const auto m = fit_naive_bayes(p);
  const std::vector<double> x{3.0, 0.5};
  // class 1: means (1, 11/6); class 0: means (5.5, -0.5); ML variances
  auto loglik = [](const std::vector<std::vector<double>>& rows, const std::vector<double>& q) {
    double ll = 0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      double mu = 0, var = 0;
      for (const auto& r : rows) mu += r[j];
      mu /= static_cast<double>(rows.size());
      for (const auto& r : rows) var += (r[j] - mu) * (r[j] - mu);
      var /= static_cast<double>(rows.size());
      ll += -0.5 * std::log(2 * M_PI * var) - (q[j] - mu) * (q[j] - mu) / (2 * var);
    }
    return ll;
  };
  const double l1 = std::log(0.6) + loglik({{0, 1}, {1, 2}, {2, 2.5}}, x);
  const double l0 = std::log(0.4) + loglik({{5, -1}, {6, 0}}, x);
  const double want = 1 / (1 + std::exp(l0 - l1));
  EXPECT_NEAR(predict_soft(m, x).d1, want, 1e-12);
}

TEST(NaiveBayes, SingleClassIsNearCertain) {
  const auto m = fit_naive_bayes(make_problem({{1}, {2}, {3}}, {1, 1, 1}));
  const auto s = predict_soft(m, std::vector<double>{-50});
  EXPECT_NEAR(s.d1, 1 - 1e-6, 1e-15);
  EXPECT_NEAR(s.d2, 1e-6, 1e-15);
}

TEST(NaiveBayes, IdenticalFeaturesBalanced) {
  const auto m = fit_naive_bayes(make_problem({{1}, {1}, {1}, {1}}, {1, 0, 1, 0}));
  const auto s = predict_soft(m, std::vector<double>{1});
  EXPECT_NEAR(s.d1, 0.5, 1e-12);
}

TEST(VotedPerceptron, SeparableTrainingErrorZero) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  BinaryProblem p;
  while (p.size() < 60) {
    const double a = u(rng), b = u(rng);
    const double margin = a + 2 * b - 0.2;
    if (std::fabs(margin) < 0.1) continue;
    p.features.append_row(std::vector<double>{a, b});
    p.targets.push_back(margin > 0);
  }
  const auto m = fit_voted_perceptron(p, 200, 9);
  EXPECT_EQ(accuracy(m, p), 1.0);
}

TEST(VotedPerceptron, Deterministic) {
  const auto p = make_problem({{0, 1}, {1, 0}, {1, 1}, {-1, 0}, {0, -1}}, {1, 1, 1, 0, 0});
  const auto a = fit_voted_perceptron(p, 5, 11), b = fit_voted_perceptron(p, 5, 11);
  EXPECT_EQ(std::get<PerceptronParams>(a.params).weights, std::get<PerceptronParams>(b.params).weights);
  EXPECT_EQ(std::get<PerceptronParams>(a.params).counts, std::get<PerceptronParams>(b.params).counts);
}

TEST(VotedPerceptron, ZeroMarginIsHalf) {
  BinaryModel m;
  m.dim = 2;
  m.params = PerceptronParams{{{0.0, 0.0, 0.0}}, {3.0}};
  const auto s = predict_soft(m, std::vector<double>{1.0, -2.0});
  EXPECT_EQ(s.d1, 0.5);
  EXPECT_EQ(s.d2, 0.5);
}

TEST(Stump, PerfectSplitWithSmoothedLeaves) {
  const auto p = make_problem({{-2}, {-1}, {-0.5}, {0.5}, {1}, {2}, {3}}, {0, 0, 0, 1, 1, 1, 1});
  const auto m = fit_decision_stump(p);
  const auto& st = std::get<StumpParams>(m.params);
  ASSERT_TRUE(st.has_split);
  EXPECT_DOUBLE_EQ(st.threshold, 0.0);
  EXPECT_DOUBLE_EQ(predict_soft(m, std::vector<double>{10}).d1, 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(predict_soft(m, std::vector<double>{-10}).d1, 1.0 / 5.0);
  EXPECT_EQ(accuracy(m, p), 1.0);
}

TEST(Stump, ConstantFeatureGivesPrior) {
  const auto m = fit_decision_stump(make_problem({{4}, {4}, {4}, {4}}, {1, 0, 0, 0}));
  const auto& st = std::get<StumpParams>(m.params);
  EXPECT_FALSE(st.has_split);
  EXPECT_DOUBLE_EQ(predict_soft(m, std::vector<double>{0}).d1, 2.0 / 6.0);
}

TEST(Stump, FourPointHandCase) {
  // splits on f0: 1.5 (imp 1/3), 2.5 (0.5), 3.5 (1/3); f1: 0.5 (0) is the best
  const auto p = make_problem({{1, 0}, {2, 1}, {3, 0}, {4, 1}}, {1, 0, 1, 0});
  const auto m = fit_decision_stump(p);
  const auto& st = std::get<StumpParams>(m.params);
  EXPECT_EQ(st.feature, 1u);
  EXPECT_DOUBLE_EQ(st.threshold, 0.5);
  bool any = false;
  EXPECT_DOUBLE_EQ(stump_impurity(m, p), brute_stump_impurity(p, any));
}

TEST(Stump, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> grid(0, 6), bit(0, 1), dn(2, 25), dd(1, 4);
  for (int trial = 0; trial < 300; ++trial) {
    BinaryProblem p;
    const int n = dn(rng), d = dd(rng);
    for (int i = 0; i < n; ++i) {
      std::vector<double> row(d);
      for (auto& v : row) v = grid(rng) * 0.5;
      p.features.append_row(row);
      p.targets.push_back(static_cast<unsigned char>(bit(rng)));
    }
    const auto m = fit_decision_stump(p);
    if (m.kind() != LearnerKind::decision_stump) continue;  // single class
    bool any = false;
    const double want = brute_stump_impurity(p, any);
    const auto& st = std::get<StumpParams>(m.params);
    ASSERT_EQ(st.has_split, any);
    if (any) {
      EXPECT_NEAR(stump_impurity(m, p), want, 1e-12);
    }
  }
}

TEST(PredictSoft, NormalizedForAllLearners) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> z(0, 1);
  BinaryProblem p;
  for (int i = 0; i < 40; ++i) {
    p.features.append_row(std::vector<double>{z(rng), z(rng), z(rng)});
    p.targets.push_back(p.features(i, 0) + z(rng) > 0);
  }
  for (auto kind : {LearnerKind::naive_bayes, LearnerKind::voted_perceptron, LearnerKind::decision_stump}) {
    const auto m = fit_binary(p, {kind, 10, 4});
    for (int q = 0; q < 50; ++q) {
      const std::vector<double> x{3 * z(rng), 3 * z(rng), 3 * z(rng)};
      const auto s = predict_soft(m, x);
      EXPECT_GE(s.d1, 0.0);
      EXPECT_LE(s.d1, 1.0);
      EXPECT_NEAR(s.d1 + s.d2, 1.0, 1e-12);
    }
  }
}

TEST(PredictSoft, ConstantModel) {
  const auto m = constant_model(3, 0.5);
  const auto s = predict_soft(m, std::vector<double>{1, 2, 3});
  EXPECT_EQ(s.d1, 0.5);
  EXPECT_EQ(s.d2, 0.5);
}

TEST(PredictSoft, DimensionMismatch) {
  const auto m = fit_decision_stump(make_problem({{1, 2}, {3, 4}}, {0, 1}));
  try {
    predict_soft(m, std::vector<double>{1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::argument);
  }
}

TEST(Learners, KindNames) {
  EXPECT_EQ(learner_kind_from_string("nb"), LearnerKind::naive_bayes);
  EXPECT_EQ(learner_kind_from_string("vp"), LearnerKind::voted_perceptron);
  EXPECT_EQ(learner_kind_from_string("stump"), LearnerKind::decision_stump);
  EXPECT_THROW(learner_kind_from_string("svm"), Error);
}

TEST(Learners, JsonRoundTripPreservesPredictions) {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> z(0, 1);
  BinaryProblem p;
  for (int i = 0; i < 30; ++i) {
    p.features.append_row(std::vector<double>{z(rng), z(rng)});
    p.targets.push_back(p.features(i, 1) > 0);
  }
  for (auto kind : {LearnerKind::naive_bayes, LearnerKind::voted_perceptron, LearnerKind::decision_stump}) {
    const auto m = fit_binary(p, {kind, 5, 1});
    nlohmann::json j = m;
    const auto back = j.get<BinaryModel>();
    for (int q = 0; q < 10; ++q) {
      const std::vector<double> x{z(rng), z(rng)};
      EXPECT_EQ(predict_soft(m, x).d1, predict_soft(back, x).d1);
    }
  }
}
