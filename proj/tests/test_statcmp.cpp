#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <random>

#include "lpwfcm/statcmp.hpp"
#include "oracles.hpp"

using namespace lpwfcm;

namespace {

ResultTable table(const std::vector<std::vector<double>>& rows) {
  ResultTable t;
  for (const auto& r : rows) t.values.append_row(r);
  for (std::size_t i = 0; i < rows.size(); ++i) t.datasets.push_back("d" + std::to_string(i));
  for (std::size_t j = 0; j < rows[0].size(); ++j) t.algorithms.push_back(std::to_string(j + 1));
  return t;
}

// Studentized range quantile (infinite dof) divided by sqrt(2).
double nemenyi_q_oracle(std::size_t k, double alpha) {
  const boost::math::normal N;
  auto cdf = [&](double q) {
    auto f = [&](double z) {
      return static_cast<double>(k) * boost::math::pdf(N, z) *
             std::pow(boost::math::cdf(N, z + q) - boost::math::cdf(N, z), static_cast<double>(k - 1));
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -12.0, 12.0, 15, 1e-13);
  };
  auto [lo, hi] = boost::math::tools::bisect([&](double q) { return cdf(q) - (1 - alpha); }, 0.1, 10.0,
                                             boost::math::tools::eps_tolerance<double>(40));
  return (lo + hi) / 2 / std::sqrt(2.0);
}

}  // namespace

TEST(Wilcoxon, FiveAllPositive) {
  const std::vector<double> a{1.1, 2.2, 3.3, 4.4, 5.5}, b{1, 2, 3, 4, 5};
  const auto r = wilcoxon_signed_rank(a, b);
  EXPECT_EQ(r.p, 0.0625);
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.w_plus, 15.0);
  EXPECT_EQ(r.w_minus, 0.0);
}

TEST(Wilcoxon, IdenticalIsInsufficient) {
  const std::vector<double> a{1, 2, 3, 4, 5, 6};
  try {
    wilcoxon_signed_rank(a, a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::insufficient_data);
  }
}

TEST(Wilcoxon, SymmetricDifferencesGivePOne) {
  const std::vector<double> a{1, -1, 2, -2, 3, -3}, b(6, 0.0);
  const auto r = wilcoxon_signed_rank(a, b);
  EXPECT_EQ(r.w_plus, r.w_minus);
  EXPECT_EQ(r.p, 1.0);
}

TEST(Wilcoxon, DpMatchesEnumeration) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> mag(1, 6), sign(0, 1);
  for (std::size_t n = 5; n <= 12; ++n)
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<double> a(n), b(n, 0.0);
      for (auto& v : a) v = (sign(rng) ? 1 : -1) * mag(rng) * 0.5;  // ties on |d|
      const auto r = wilcoxon_signed_rank(a, b);
      std::vector<double> m(n);
      for (std::size_t i = 0; i < n; ++i) m[i] = std::fabs(a[i]);
      const auto ranks = average_tie_ranks(m);
      EXPECT_EQ(r.p, oracle::wilcoxon_enumerated_p(ranks, r.w_plus)) << n;
    }
}

TEST(Wilcoxon, NormalApproximationAboveExactRange) {
  std::vector<double> a(30), b(30, 0.0);
  for (std::size_t i = 0; i < 30; ++i) a[i] = static_cast<double>(i + 1) * (i % 3 == 0 ? -1 : 1);
  const auto r = wilcoxon_signed_rank(a, b);
  EXPECT_FALSE(r.exact);
  // W- = 1+4+...+28 = 145, W+ = 320, mean 232.5, var 2363.75
  const double z = (std::fabs(320 - 232.5) - 0.5) / std::sqrt(2363.75);
  EXPECT_NEAR(r.p, std::erfc(z / std::sqrt(2.0)), 1e-12);
}

TEST(Holm, Example) {
  const auto a = holm_adjust(std::vector<double>{0.01, 0.04, 0.03});
  EXPECT_NEAR(a[0], 0.03, 1e-15);
  EXPECT_NEAR(a[1], 0.06, 1e-15);
  EXPECT_NEAR(a[2], 0.06, 1e-15);
  EXPECT_EQ(holm_adjust(std::vector<double>{0.2}), (std::vector<double>{0.2}));
  EXPECT_EQ(holm_adjust(std::vector<double>{1, 1, 1}), (std::vector<double>{1, 1, 1}));
}

TEST(Holm, MonotoneAndDominating) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> p(6);
    for (auto& v : p) v = u(rng) * u(rng);
    const auto a = holm_adjust(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_GE(a[i], p[i]);
      EXPECT_LE(a[i], 1.0);
      for (std::size_t j = 0; j < p.size(); ++j)
        if (p[i] < p[j]) {
          EXPECT_LE(a[i], a[j]);
        }
    }
  }
}

TEST(Friedman, IdenticalOrders) {
  const auto t = table({{0.1, 0.2, 0.3}, {0.2, 0.4, 0.5}, {0.0, 0.1, 0.9}, {0.3, 0.35, 0.4}});
  const auto r = friedman_test(t, true);
  EXPECT_NEAR(r.chi_square, 8.0, 1e-12);
  EXPECT_NEAR(r.p, 0.018315638888734182, 1e-12);
  EXPECT_EQ(r.average_ranks, (std::vector<double>{1, 2, 3}));
}

TEST(Friedman, AllEqualGivesPOne) {
  const auto r = friedman_test(table({{0.5, 0.5, 0.5}, {0.2, 0.2, 0.2}}), true);
  EXPECT_EQ(r.chi_square, 0.0);
  EXPECT_EQ(r.p, 1.0);
}

TEST(Ranks, TiesShareAverage) {
  const auto r = average_ranks(table({{0.1, 0.1, 0.3}, {0.2, 0.2, 0.5}}), true);
  EXPECT_EQ(r, (std::vector<double>{1.5, 1.5, 3}));
  const auto big = average_ranks(table({{0.1, 0.2, 0.3}, {0.2, 0.4, 0.5}}), false);
  EXPECT_EQ(big, (std::vector<double>{3, 2, 1}));
}

TEST(Nemenyi, TableConstants) {
  EXPECT_NEAR(nemenyi_cd(3, 10, 0.05), 2.343 * std::sqrt(12.0 / 60.0), 1e-12);
  EXPECT_NEAR(nemenyi_cd(2, 16, 0.05), 1.960 * std::sqrt(1.0 / 16.0), 1e-12);
  double prev = 1e9;
  for (std::size_t n = 2; n < 200; n += 7) {
    const double cd = nemenyi_cd(4, n, 0.05);
    EXPECT_LT(cd, prev);
    prev = cd;
  }
  EXPECT_THROW(nemenyi_q(11, 0.05), Error);
  EXPECT_THROW(nemenyi_q(3, 0.01), Error);
}

TEST(Nemenyi, TableMatchesStudentizedRange) {
  for (double alpha : {0.05, 0.10})
    for (std::size_t k = 2; k <= 10; ++k) EXPECT_NEAR(nemenyi_q(k, alpha), nemenyi_q_oracle(k, alpha), 1e-3) << k;
}

TEST(Spearman, Cases) {
  const std::vector<double> x{1, 2, 3, 4, 5}, y{1, 3, 2, 5, 4}, rev{5, 4, 3, 2, 1};
  const auto r = spearman_rho(x, y);
  EXPECT_NEAR(r.rho, 0.8, 1e-15);
  EXPECT_NEAR(r.p, 0.10408803866182788, 1e-12);
  const auto up = spearman_rho(x, x);
  EXPECT_EQ(up.rho, 1.0);
  EXPECT_EQ(up.p, 0.0);
  EXPECT_EQ(spearman_rho(x, rev).rho, -1.0);
  const std::vector<double> flat(5, 2.0);
  try {
    spearman_rho(x, flat);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::undefined_correlation);
  }
}

TEST(Compare, ThreeAlgorithms) {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 8; ++i) rows.push_back({0.3 + 0.01 * i, 0.28 + 0.012 * i, 0.25 + 0.011 * i});
  const auto rep = compare_algorithms(table(rows), 0.05);
  ASSERT_EQ(rep.pairwise.size(), 3u);
  for (const auto& pc : rep.pairwise) {
    ASSERT_TRUE(pc.test);
    EXPECT_GE(pc.p_holm, pc.test->p);
  }
  ASSERT_TRUE(rep.nemenyi_cd);
  EXPECT_NEAR(*rep.nemenyi_cd, nemenyi_cd(3, 8, 0.05), 1e-15);
}

TEST(Compare, IdenticalColumnsNoted) {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 6; ++i) rows.push_back({0.1 * i, 0.1 * i, 0.1 * i});
  const auto rep = compare_algorithms(table(rows), 0.05);
  for (const auto& pc : rep.pairwise) {
    EXPECT_FALSE(pc.test);
    EXPECT_FALSE(pc.note.empty());
  }
  EXPECT_EQ(rep.friedman.p, 1.0);
}

TEST(ResultTable, Validation) {
  EXPECT_THROW(table({{0.1, 0.2}}).validate(), Error);
  EXPECT_THROW(table({{0.1}, {0.2}}).validate(), Error);
  EXPECT_THROW(table({{0.1, NAN}, {0.2, 0.3}}).validate(), Error);
}
