#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lpwfcm/dataset.hpp"
#include "lpwfcm/detail/special_functions.hpp"
#include "lpwfcm/error.hpp"
#include "lpwfcm/learners.hpp"
#include "lpwfcm/pairwise.hpp"
#include "lpwfcm/random.hpp"

namespace lpwfcm {

enum class RrcMode { beta_mc, soft };

inline std::string to_string(RrcMode m) { return m == RrcMode::beta_mc ? "beta_mc" : "soft"; }

inline RrcMode rrc_mode_from_string(const std::string& s) {
  if (s == "beta_mc") return RrcMode::beta_mc;
  if (s == "soft") return RrcMode::soft;
  fail(ErrorKind::argument, "unknown rrc mode '" + s + "'");
}

inline constexpr std::size_t kRrcDraws = 100000;

/// Probability that the randomised reference classifier picks the pair's first
/// label. In beta_mc mode the two supports are modelled as independent
/// Beta(2 d1, 2 d2) and Beta(2 d2, 2 d1) variables and P(first > second) is
/// estimated from kRrcDraws seeded draws. Each draw pair (X, Y) contributes the
/// conditional probabilities P(Y < X | X) and P(X > Y | Y), which keeps the
/// estimator unbiased at a fraction of the indicator's variance.
inline double rrc_probability(PairSupport d, RrcMode mode, std::uint64_t seed,
                              std::size_t draws = kRrcDraws) {
  if (!(d.d1 >= 0.0 && d.d1 <= 1.0 && d.d2 >= 0.0 && d.d2 <= 1.0) || std::fabs(d.d1 + d.d2 - 1.0) > 1e-9)
    fail(ErrorKind::argument, "rrc_probability needs a normalised support pair");
  if (mode == RrcMode::soft) return d.d1;
  if (d.d1 <= 0.0) return 0.0;
  if (d.d1 >= 1.0) return 1.0;

  const double a = 2.0 * d.d1, b = 2.0 * d.d2;
  Rng rng(seed);
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  const detail::RegularizedBeta cdf_x(a, b), cdf_y(b, a);
  double acc = 0.0;
  for (std::size_t k = 0; k < draws; ++k) {
    const double x1 = ga(rng), x2 = gb(rng);
    const double x = x1 / (x1 + x2);   // ~ Beta(a, b)
    const double y1 = gb(rng), y2 = ga(rng);
    const double y = y1 / (y1 + y2);   // ~ Beta(b, a)
    // P(Y < x) for Y ~ Beta(b, a); P(X > y) for X ~ Beta(a, b)
    acc += cdf_y(x) + (1.0 - cdf_x(y));
  }
  return acc / (2.0 * static_cast<double>(draws));
}

/// Per-pair memo of rrc_probability keyed by the exact support value. The seed
/// for a support value is derived from (global seed, pair index, bits of d1),
/// so a cached entry is identical to a fresh evaluation.
class RrcCache {
 public:
  RrcCache(RrcMode mode, std::uint64_t seed) : mode_(mode), seed_(seed) {}

  RrcMode mode() const noexcept { return mode_; }
  std::uint64_t seed() const noexcept { return seed_; }

  double operator()(std::size_t pair_index, PairSupport d) {
    if (mode_ == RrcMode::soft) return rrc_probability(d, mode_, 0);
    const auto key = std::make_pair(pair_index, std::bit_cast<std::uint64_t>(d.d1));
    {
      std::lock_guard lock(mutex_);
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    const double v = rrc_probability(d, mode_, derive_seed(seed_, {pair_index, key.second}));
    std::lock_guard lock(mutex_);
    memo_.emplace(key, v);
    return v;
  }

 private:
  RrcMode mode_;
  std::uint64_t seed_;
  std::mutex mutex_;
  std::map<std::pair<std::size_t, std::uint64_t>, double> memo_;
};

/// Crisp validation subsets of one pair: rows with exactly one of the two labels,
/// split by which one.
struct ClassSubsets {
  std::vector<unsigned char> first;
  std::vector<unsigned char> second;
};

inline ClassSubsets build_class_subsets(const LabelMatrix& labels, const PairIndex& p) {
  ClassSubsets s;
  s.first.assign(labels.rows(), 0);
  s.second.assign(labels.rows(), 0);
  for (std::size_t k = 0; k < labels.rows(); ++k) {
    const int a = labels(k, p.first), b = labels(k, p.second);
    if (a + b != 1) continue;
    (a ? s.first : s.second)[k] = 1;
  }
  return s;
}

/// Fuzzy decision regions of one pair classifier over the validation rows:
/// first[k] = P_rrc(first label | x_k), second[k] = 1 - first[k].
struct DecisionRegion {
  std::vector<double> first;
  std::vector<double> second;
};

inline DecisionRegion build_decision_regions(const BinaryModel& model, const Matrix& validation_features,
                                             const PairIndex& p, RrcCache& rrc) {
  DecisionRegion r;
  r.first.resize(validation_features.rows());
  r.second.resize(validation_features.rows());
  for (std::size_t k = 0; k < validation_features.rows(); ++k) {
    const double mu = rrc(p.index, predict_soft(model, validation_features.row(k)));
    r.first[k] = mu;
    r.second[k] = 1.0 - mu;
  }
  return r;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "distance between vectors of different dimension");
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double t = a[j] - b[j];
    s += t * t;
  }
  return s;
}

/// Neighbourhood distance: root-mean-square difference over the (standardised)
/// features, i.e. Euclidean distance divided by sqrt(d), so a given beta means
/// the same locality whatever the dimensionality.
inline double rms_squared_distance(std::span<const double> a, std::span<const double> b) {
  return a.empty() ? 0.0 : squared_distance(a, b) / static_cast<double>(a.size());
}

/// Gaussian-potential memberships exp(-beta * delta_k^2) from precomputed squared distances.
inline std::vector<double> neighborhood_from_sqdist(std::span<const double> sqdist, double beta) {
  if (!(beta > 0.0)) fail(ErrorKind::argument, "neighbourhood beta must be positive");
  std::vector<double> mu(sqdist.size());
  for (std::size_t k = 0; k < sqdist.size(); ++k) mu[k] = std::exp(-beta * sqdist[k]);
  return mu;
}

inline std::vector<double> neighborhood(std::span<const double> z, const Matrix& validation_features, double beta) {
  if (!(beta > 0.0)) fail(ErrorKind::argument, "neighbourhood beta must be positive");
  std::vector<double> sq(validation_features.rows());
  for (std::size_t k = 0; k < sq.size(); ++k) sq[k] = rms_squared_distance(z, validation_features.row(k));
  return neighborhood_from_sqdist(sq, beta);
}

/// Sigma-count of a fuzzy set.
inline double fuzzy_cardinality(std::span<const double> memberships) {
  double s = 0.0;
  for (double m : memberships) {
    if (!(m >= 0.0 && m <= 1.0)) fail(ErrorKind::argument, "fuzzy membership outside [0,1]");
    s += m;
  }
  return s;
}

/// 2x2 local confusion matrix; cell[s][h], s = true class, h = classifier response,
/// index 0 <-> the pair's first label.
struct FuzzyConfusionMatrix {
  std::array<std::array<double, 2>, 2> cell{};

  double total() const { return cell[0][0] + cell[0][1] + cell[1][0] + cell[1][1]; }
};

/// cell(s, h) = |V_s ∩ D_h ∩ N| / |N| with product intersection.
inline FuzzyConfusionMatrix estimate_confusion(const ClassSubsets& subsets, const DecisionRegion& region,
                                               std::span<const double> nbhd) {
  const std::size_t M = nbhd.size();
  require(subsets.first.size() == M && subsets.second.size() == M && region.first.size() == M &&
              region.second.size() == M,
          "fuzzy structures must share the validation index set");
  double card = 0.0;
  FuzzyConfusionMatrix e;
  for (std::size_t k = 0; k < M; ++k) {
    card += nbhd[k];
    const std::array<unsigned char, 2> in{subsets.first[k], subsets.second[k]};
    for (int s = 0; s < 2; ++s) {
      if (!in[s]) continue;
      e.cell[s][0] += region.first[k] * nbhd[k];
      e.cell[s][1] += region.second[k] * nbhd[k];
    }
  }
  if (!(card > 0.0)) fail(ErrorKind::estimation, "neighbourhood has zero fuzzy cardinality");
  for (auto& row : e.cell)
    for (auto& v : row) v /= card;
  return e;
}

inline constexpr double kConfusionSmoothing = 1e-6;

/// P(s | h): column-stochastic, cond[s][h].
struct ConditionalMatrix {
  std::array<std::array<double, 2>, 2> cond{};
};

inline ConditionalMatrix conditional_posterior(const FuzzyConfusionMatrix& e) {
  ConditionalMatrix c;
  for (int h = 0; h < 2; ++h) {
    const double a = e.cell[0][h] + kConfusionSmoothing, b = e.cell[1][h] + kConfusionSmoothing;
    c.cond[0][h] = a / (a + b);
    c.cond[1][h] = b / (a + b);
  }
  return c;
}

/// P(s | x) = sum_h P(h | x) P(s | h, x).
inline PairSupport corrected_supports(double p_first, const ConditionalMatrix& c) {
  require(p_first >= 0.0 && p_first <= 1.0, "rrc probability outside [0,1]");
  for (int h = 0; h < 2; ++h) {
    const double a = c.cond[0][h], b = c.cond[1][h];
    if (!(a >= 0.0 && b >= 0.0) || std::fabs(a + b - 1.0) > 1e-9)
      fail(ErrorKind::argument, "conditional matrix is not column-stochastic");
  }
  const double p_second = 1.0 - p_first;
  const double s1 = p_first * c.cond[0][0] + p_second * c.cond[0][1];
  const double s2 = p_first * c.cond[1][0] + p_second * c.cond[1][1];
  return {s1, s2};
}

}  // namespace lpwfcm
