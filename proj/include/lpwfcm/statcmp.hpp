#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lpwfcm/detail/special_functions.hpp"
#include "lpwfcm/error.hpp"
#include "lpwfcm/table.hpp"

namespace lpwfcm {

/// One metric, datasets (rows) x algorithms (columns).
struct ResultTable {
  Matrix values;
  std::vector<std::string> datasets;
  std::vector<std::string> algorithms;

  void validate() const {
    if (values.rows() != datasets.size() || values.cols() != algorithms.size())
      fail(ErrorKind::schema, "result table shape does not match its names");
    if (datasets.size() < 2) fail(ErrorKind::argument, "result table needs at least 2 datasets");
    if (algorithms.size() < 2) fail(ErrorKind::argument, "result table needs at least 2 algorithms");
    for (double v : values.data())
      if (!std::isfinite(v)) fail(ErrorKind::argument, "result table holds a missing or non-finite entry");
  }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> c(values.rows());
    for (std::size_t i = 0; i < values.rows(); ++i) c[i] = values(i, j);
    return c;
  }
};

/// Ranks 1..n with tied values sharing their average rank; ascending order gets rank 1.
inline std::vector<double> average_tie_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

struct WilcoxonResult {
  double w_plus = 0.0;
  double w_minus = 0.0;
  double statistic = 0.0;  // min(W+, W-)
  std::size_t n = 0;       // non-zero differences
  double p = 1.0;          // two-sided
  bool exact = true;
};

inline constexpr std::size_t kWilcoxonExactMax = 25;

namespace detail {

/// Number of sign vectors giving each doubled positive-rank sum.
inline std::vector<std::uint64_t> signed_rank_counts(std::span<const int> doubled_ranks) {
  const int total = std::accumulate(doubled_ranks.begin(), doubled_ranks.end(), 0);
  std::vector<std::uint64_t> count(static_cast<std::size_t>(total) + 1, 0);
  count[0] = 1;
  int reach = 0;
  for (int r : doubled_ranks) {
    for (int s = reach; s >= 0; --s)
      if (count[static_cast<std::size_t>(s)]) count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
    reach += r;
  }
  return count;
}

}  // namespace detail

/// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences are
/// dropped; tied |differences| share average ranks. Exact null distribution
/// (dynamic programming over rank sums) for n <= 25, otherwise the normal
/// approximation with tie and continuity corrections.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "wilcoxon samples must have equal length");
  std::vector<double> diff;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (!std::isfinite(d)) fail(ErrorKind::argument, "wilcoxon input is not finite");
    if (d != 0.0) diff.push_back(d);
  }
  if (diff.size() < 5)
    fail(ErrorKind::insufficient_data,
         "wilcoxon needs at least 5 non-zero differences, got " + std::to_string(diff.size()));

  std::vector<double> mag(diff.size());
  for (std::size_t i = 0; i < diff.size(); ++i) mag[i] = std::fabs(diff[i]);
  const auto ranks = average_tie_ranks(mag);

  WilcoxonResult r;
  r.n = diff.size();
  for (std::size_t i = 0; i < diff.size(); ++i) (diff[i] > 0 ? r.w_plus : r.w_minus) += ranks[i];
  r.statistic = std::min(r.w_plus, r.w_minus);

  if (r.n <= kWilcoxonExactMax) {
    std::vector<int> doubled(r.n);
    for (std::size_t i = 0; i < r.n; ++i) doubled[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
    const auto count = detail::signed_rank_counts(doubled);
    const auto w = static_cast<std::size_t>(std::lround(2.0 * r.w_plus));
    std::uint64_t lower = 0, upper = 0;
    for (std::size_t s = 0; s < count.size(); ++s) {
      if (s <= w) lower += count[s];
      if (s >= w) upper += count[s];
    }
    const double total = std::ldexp(1.0, static_cast<int>(r.n));
    r.p = std::min(1.0, 2.0 * static_cast<double>(std::min(lower, upper)) / total);
    r.exact = true;
  } else {
    const double n = static_cast<double>(r.n);
    double tie_term = 0.0;
    std::vector<double> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i);
      tie_term += t * t * t - t;
      i = j;
    }
    const double mean = n * (n + 1.0) / 4.0;
    const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    const double z = std::max(0.0, std::fabs(r.w_plus - mean) - 0.5) / std::sqrt(var);
    r.p = std::min(1.0, 2.0 * detail::normal_sf(z));
    r.exact = false;
  }
  return r;
}

/// Holm step-down adjustment; output in input order.
inline std::vector<double> holm_adjust(std::span<const double> p) {
  for (double v : p)
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::argument, "p-values must lie in [0,1]");
  const std::size_t k = p.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> adj(k);
  double running = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    running = std::max(running, std::min(1.0, static_cast<double>(k - j) * p[order[j]]));
    adj[order[j]] = running;
  }
  return adj;
}

/// Mean per-dataset rank of each algorithm (rank 1 = best).
inline std::vector<double> average_ranks(const ResultTable& t, bool smaller_is_better) {
  t.validate();
  const std::size_t n = t.values.rows(), k = t.values.cols();
  std::vector<double> mean(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(t.values.row(i).begin(), t.values.row(i).end());
    if (!smaller_is_better)
      for (auto& v : row) v = -v;
    const auto r = average_tie_ranks(row);
    for (std::size_t j = 0; j < k; ++j) mean[j] += r[j];
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  return mean;
}

struct FriedmanResult {
  double chi_square = 0.0;
  double p = 1.0;
  std::vector<double> average_ranks;
};

inline FriedmanResult friedman_test(const ResultTable& t, bool smaller_is_better) {
  FriedmanResult r;
  r.average_ranks = average_ranks(t, smaller_is_better);
  const double n = static_cast<double>(t.values.rows()), k = static_cast<double>(t.values.cols());
  double sum_sq = 0.0;
  for (double rj : r.average_ranks) sum_sq += rj * rj;
  r.chi_square = 12.0 * n / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0);
  if (std::fabs(r.chi_square) < 1e-12) r.chi_square = 0.0;
  r.p = detail::chi_square_sf(r.chi_square, k - 1.0);
  return r;
}

/// Nemenyi critical difference q_alpha * sqrt(k(k+1) / (6n)); q from the
/// studentized range statistic divided by sqrt(2), tabulated for k = 2..10.
inline double nemenyi_q(std::size_t k, double alpha) {
  static constexpr double q05[] = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164};
  static constexpr double q10[] = {1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920};
  if (k < 2 || k > 10) fail(ErrorKind::argument, "Nemenyi q is tabulated for 2 <= k <= 10 only");
  if (alpha == 0.05) return q05[k - 2];
  if (alpha == 0.10) return q10[k - 2];
  fail(ErrorKind::argument, "Nemenyi alpha must be 0.05 or 0.10");
}

inline double nemenyi_cd(std::size_t k, std::size_t n, double alpha) {
  require(n >= 2, "Nemenyi CD needs at least 2 datasets");
  const double kk = static_cast<double>(k);
  return nemenyi_q(k, alpha) * std::sqrt(kk * (kk + 1.0) / (6.0 * static_cast<double>(n)));
}

struct SpearmanResult {
  double rho = 0.0;
  double p = 1.0;
};

/// Rank correlation with a two-tailed t-test on n - 2 degrees of freedom.
inline SpearmanResult spearman_rho(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "spearman inputs must have equal length");
  require(x.size() >= 4, "spearman needs at least 4 observations");
  const auto rx = average_tie_ranks(x), ry = average_tie_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) fail(ErrorKind::undefined_correlation, "spearman input is constant");
  SpearmanResult r;
  r.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (1.0 - std::fabs(r.rho) < 1e-15) {
    r.rho = r.rho > 0 ? 1.0 : -1.0;
    r.p = 0.0;
    return r;
  }
  const double t = r.rho * std::sqrt((n - 2.0) / (1.0 - r.rho * r.rho));
  r.p = detail::student_t_two_tailed(t, n - 2.0);
  return r;
}

}  // namespace lpwfcm

namespace lpwfcm {

struct PairwiseComparison {
  std::size_t a = 0, b = 0;  // algorithm columns
  std::optional<WilcoxonResult> test;
  std::string note;          // set when the test could not run
  double p_holm = 1.0;
};

/// Full battery for one metric table: pairwise Wilcoxon with Holm adjustment,
/// Friedman, average ranks and the Nemenyi critical difference.
struct ComparisonReport {
  std::vector<PairwiseComparison> pairwise;
  FriedmanResult friedman;
  std::optional<double> nemenyi_cd;
  double alpha = 0.05;
};

inline ComparisonReport compare_algorithms(const ResultTable& t, double alpha, bool smaller_is_better = true) {
  t.validate();
  ComparisonReport rep;
  rep.alpha = alpha;
  const std::size_t k = t.algorithms.size();
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b) {
      PairwiseComparison pc{a, b, std::nullopt, "", 1.0};
      const auto ca = t.column(a), cb = t.column(b);
      try {
        pc.test = wilcoxon_signed_rank(ca, cb);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::insufficient_data) throw;
        pc.note = e.detail();
      }
      rep.pairwise.push_back(std::move(pc));
    }
  std::vector<double> raw;
  std::vector<std::size_t> slot;
  for (std::size_t i = 0; i < rep.pairwise.size(); ++i)
    if (rep.pairwise[i].test) {
      raw.push_back(rep.pairwise[i].test->p);
      slot.push_back(i);
    }
  const auto adj = holm_adjust(raw);
  for (std::size_t i = 0; i < slot.size(); ++i) rep.pairwise[slot[i]].p_holm = adj[i];
  rep.friedman = friedman_test(t, smaller_is_better);
  if (k <= 10 && (alpha == 0.05 || alpha == 0.10)) rep.nemenyi_cd = nemenyi_cd(k, t.datasets.size(), alpha);
  return rep;
}

}  // namespace lpwfcm
