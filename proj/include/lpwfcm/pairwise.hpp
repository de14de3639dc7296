#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lpwfcm/dataset.hpp"
#include "lpwfcm/error.hpp"
#include "lpwfcm/learners.hpp"
#include "lpwfcm/metrics.hpp"
#include "lpwfcm/random.hpp"

namespace lpwfcm {

/// One label pair. `index` is 0-based; `first < second` are 0-based label columns.
struct PairIndex {
  std::size_t index = 0;
  std::size_t first = 0;
  std::size_t second = 1;

  bool operator==(const PairIndex&) const = default;
};

inline std::size_t pair_count(std::size_t L) { return L * (L - 1) / 2; }

/// Lexicographic position of (first, second) among all pairs of L labels.
inline std::size_t encode_pair(std::size_t L, std::size_t first, std::size_t second) {
  require(first < second && second < L, "pair labels must satisfy first < second < L");
  return first * L - first * (first + 1) / 2 + (second - first - 1);
}

inline PairIndex decode_pair(std::size_t L, std::size_t index) {
  require(L >= 2 && index < pair_count(L), "pair index out of range");
  std::size_t first = 0, rest = index;
  while (rest >= L - 1 - first) {
    rest -= L - 1 - first;
    ++first;
  }
  return {index, first, first + 1 + rest};
}

inline std::vector<PairIndex> enumerate_pairs(std::size_t L) {
  if (L < 2) fail(ErrorKind::argument, "pairwise decomposition needs L >= 2, got " + std::to_string(L));
  std::vector<PairIndex> out;
  out.reserve(pair_count(L));
  for (std::size_t a = 0; a < L; ++a)
    for (std::size_t b = a + 1; b < L; ++b) out.push_back({out.size(), a, b});
  return out;
}

/// Instances carrying exactly one of the pair's labels; target 1 iff it is `first`.
inline BinaryProblem build_pair_problem(const Matrix& features, const LabelMatrix& labels, const PairIndex& p) {
  BinaryProblem out;
  out.features = Matrix(0, features.cols());
  for (std::size_t i = 0; i < labels.rows(); ++i) {
    const int a = labels(i, p.first), b = labels(i, p.second);
    if (a + b != 1) continue;
    out.features.append_row(features.row(i));
    out.targets.push_back(static_cast<unsigned char>(a));
  }
  return out;
}

inline BinaryProblem build_pair_problem(const MultiLabelDataset& ds, const PairIndex& p) {
  return build_pair_problem(ds.features, ds.labels, p);
}

struct PairModel {
  PairIndex pair;
  BinaryModel model;
};

/// One binary model per label pair; empty pair problems get the constant (0.5, 0.5) model.
inline std::vector<PairModel> train_lpw(const Matrix& features, const LabelMatrix& labels, const LearnerSpec& learner) {
  std::vector<PairModel> out;
  for (const auto& p : enumerate_pairs(labels.cols())) {
    auto problem = build_pair_problem(features, labels, p);
    if (problem.size() == 0) {
      out.push_back({p, constant_model(features.cols(), 0.5)});
      continue;
    }
    LearnerSpec spec = learner;
    spec.seed = derive_seed(learner.seed, {p.index});
    try {
      out.push_back({p, fit_binary(problem, spec)});
    } catch (const Error& e) {
      throw Error(e.kind(), "pair (" + std::to_string(p.first + 1) + "," + std::to_string(p.second + 1) +
                                "): " + e.detail());
    }
  }
  return out;
}

inline std::vector<PairModel> train_lpw(const MultiLabelDataset& train, const LearnerSpec& learner) {
  return train_lpw(train.features, train.labels, learner);
}

/// Per-label weighted mean of the pair outputs that concern that label.
/// A label whose weights sum to zero falls back to the unweighted mean.
inline std::vector<double> aggregate_supports(std::span<const PairIndex> pairs, std::span<const PairSupport> outputs,
                                              std::span<const double> weights, std::size_t L) {
  require(outputs.size() == pairs.size() && weights.size() == pairs.size(),
          "one output and one weight per pair classifier required");
  for (double w : weights)
    if (!std::isfinite(w) || w < 0.0) fail(ErrorKind::argument, "pair weights must be finite and non-negative");
  std::vector<double> num(L, 0.0), den(L, 0.0), plain(L, 0.0);
  std::vector<std::size_t> cnt(L, 0);
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    const auto& p = pairs[m];
    require(p.second < L, "pair refers to a label outside 0..L-1");
    num[p.first] += weights[m] * outputs[m].d1;
    num[p.second] += weights[m] * outputs[m].d2;
    den[p.first] += weights[m];
    den[p.second] += weights[m];
    plain[p.first] += outputs[m].d1;
    plain[p.second] += outputs[m].d2;
    ++cnt[p.first];
    ++cnt[p.second];
  }
  std::vector<double> d(L, 0.0);
  for (std::size_t i = 0; i < L; ++i) {
    if (den[i] > 0.0) d[i] = num[i] / den[i];
    else if (cnt[i] > 0) d[i] = plain[i] / static_cast<double>(cnt[i]);
    d[i] = std::clamp(d[i], 0.0, 1.0);
  }
  return d;
}

/// bit i = [support_i > theta_i].
inline std::vector<unsigned char> apply_thresholds(std::span<const double> supports, std::span<const double> theta) {
  if (supports.size() != theta.size()) fail(ErrorKind::argument, "support and threshold lengths differ");
  std::vector<unsigned char> out(supports.size());
  for (std::size_t i = 0; i < supports.size(); ++i) out[i] = supports[i] > theta[i] ? 1 : 0;
  return out;
}

/// Threshold candidates for one label: 0, midpoints of consecutive unique supports, 1.
inline std::vector<double> scut_candidates(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<double> c{0.0};
  for (std::size_t k = 0; k + 1 < values.size(); ++k) c.push_back(values[k] + (values[k + 1] - values[k]) / 2.0);
  c.push_back(1.0);
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

/// SCut: per-label threshold maximising that label's F1 on validation; ties go
/// to the smallest candidate.
inline std::vector<double> scut_fit(const Matrix& supports, const LabelMatrix& truth) {
  require(supports.rows() == truth.rows() && supports.cols() == truth.cols(), "support and truth shapes differ");
  require(supports.rows() >= 1, "SCut needs at least one validation instance");
  const std::size_t M = supports.rows(), L = supports.cols();
  std::vector<double> theta(L, 0.5);
  std::vector<std::pair<double, unsigned char>> col(M);
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<double> values(M);
    std::size_t positives = 0;
    for (std::size_t i = 0; i < M; ++i) {
      col[i] = {supports(i, l), truth(i, l)};
      values[i] = supports(i, l);
      positives += truth(i, l);
    }
    std::sort(col.begin(), col.end());
    const auto cand = scut_candidates(std::move(values));
    // sweep ascending thresholds; `k` = number of supports <= theta
    std::size_t k = 0, pos_below = 0;
    double best = -1.0;
    for (double th : cand) {
      while (k < M && col[k].first <= th) pos_below += col[k++].second;
      Contingency c;
      c.tp = positives - pos_below;
      c.fp = (M - k) - c.tp;
      c.fn = pos_below;
      const double f = f1_score(c);
      if (f > best) {
        best = f;
        theta[l] = th;
      }
    }
  }
  return theta;
}

}  // namespace lpwfcm
