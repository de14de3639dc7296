#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "lpwfcm/error.hpp"
#include "lpwfcm/random.hpp"
#include "lpwfcm/table.hpp"

namespace lpwfcm {

/// Pair-filtered training material. target 1 <-> first label of the pair.
struct BinaryProblem {
  Matrix features;
  std::vector<unsigned char> targets;

  std::size_t size() const noexcept { return features.rows(); }
};

/// Normalised soft output of a binary model: d1 + d2 = 1.
struct PairSupport {
  double d1 = 0.5;
  double d2 = 0.5;
};

enum class LearnerKind { naive_bayes, voted_perceptron, decision_stump, constant };

inline std::string to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::naive_bayes: return "naive_bayes";
    case LearnerKind::voted_perceptron: return "voted_perceptron";
    case LearnerKind::decision_stump: return "decision_stump";
    case LearnerKind::constant: return "constant";
  }
  return "?";
}

inline LearnerKind learner_kind_from_string(const std::string& s) {
  if (s == "naive_bayes" || s == "nb") return LearnerKind::naive_bayes;
  if (s == "voted_perceptron" || s == "vp") return LearnerKind::voted_perceptron;
  if (s == "decision_stump" || s == "stump") return LearnerKind::decision_stump;
  if (s == "constant") return LearnerKind::constant;
  fail(ErrorKind::argument, "unknown learner '" + s + "'");
}

struct LearnerSpec {
  LearnerKind kind = LearnerKind::decision_stump;
  int epochs = 10;  // voted perceptron only
  std::uint64_t seed = 0;
};

inline constexpr double kNearCertain = 1e-6;
inline constexpr double kVarianceFloor = 1e-9;

struct ConstantParams {
  double d1 = 0.5;
};

struct NaiveBayesParams {
  std::array<double, 2> log_prior{};  // [class m1, class m2]
  std::array<std::vector<double>, 2> mean;
  std::array<std::vector<double>, 2> var;
};

struct PerceptronParams {
  std::vector<std::vector<double>> weights;  // last entry of each vector is the bias
  std::vector<double> counts;
};

struct StumpParams {
  bool has_split = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double left_d1 = 0.5;   // x[feature] <= threshold
  double right_d1 = 0.5;
};

struct BinaryModel {
  std::size_t dim = 0;
  std::array<double, 2> class_prior{0.5, 0.5};
  std::variant<ConstantParams, NaiveBayesParams, PerceptronParams, StumpParams> params;

  LearnerKind kind() const noexcept {
    switch (params.index()) {
      case 1: return LearnerKind::naive_bayes;
      case 2: return LearnerKind::voted_perceptron;
      case 3: return LearnerKind::decision_stump;
      default: return LearnerKind::constant;
    }
  }
};

inline BinaryModel constant_model(std::size_t dim, double d1) {
  BinaryModel m;
  m.dim = dim;
  m.class_prior = {d1, 1.0 - d1};
  m.params = ConstantParams{d1};
  return m;
}

namespace detail {

inline double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline PairSupport from_score(double z) { return {logistic(z), logistic(-z)}; }

inline void check_problem(const BinaryProblem& p) {
  if (p.features.cols() == 0) fail(ErrorKind::argument, "binary problem has zero features");
  if (p.size() == 0) fail(ErrorKind::argument, "binary problem has no instances");
  if (p.targets.size() != p.size()) fail(ErrorKind::argument, "target count differs from row count");
}

inline std::size_t positives(const BinaryProblem& p) {
  return static_cast<std::size_t>(std::count(p.targets.begin(), p.targets.end(), 1));
}

/// Single-class problems yield a near-certain constant model.
inline bool single_class(const BinaryProblem& p, BinaryModel& out) {
  const std::size_t pos = positives(p);
  if (pos != 0 && pos != p.size()) return false;
  out = constant_model(p.features.cols(), pos ? 1.0 - kNearCertain : kNearCertain);
  return true;
}

inline double gini(double pos, double n) {
  if (n <= 0) return 0.0;
  const double p = pos / n, q = (n - pos) / n;
  return 1.0 - p * p - q * q;
}

inline double split_impurity(double pos_left, double n_left, double pos_total, double n_total) {
  const double n_right = n_total - n_left;
  return (n_left / n_total) * gini(pos_left, n_left) + (n_right / n_total) * gini(pos_total - pos_left, n_right);
}

inline double laplace(double pos, double n) { return (pos + 1.0) / (n + 2.0); }

}  // namespace detail

/// Gaussian naive Bayes.
inline BinaryModel fit_naive_bayes(const BinaryProblem& p) {
  detail::check_problem(p);
  BinaryModel m;
  if (detail::single_class(p, m)) return m;
  const std::size_t n = p.size(), d = p.features.cols();
  NaiveBayesParams nb;
  std::array<double, 2> count{};
  for (int c = 0; c < 2; ++c) {
    nb.mean[c].assign(d, 0.0);
    nb.var[c].assign(d, 0.0);
  }
  // class slot 0 <-> target 1 (m1), slot 1 <-> target 0 (m2)
  for (std::size_t i = 0; i < n; ++i) {
    const int c = p.targets[i] ? 0 : 1;
    count[c] += 1.0;
    auto row = p.features.row(i);
    for (std::size_t j = 0; j < d; ++j) nb.mean[c][j] += row[j];
  }
  for (int c = 0; c < 2; ++c)
    for (auto& v : nb.mean[c]) v /= count[c];
  for (std::size_t i = 0; i < n; ++i) {
    const int c = p.targets[i] ? 0 : 1;
    auto row = p.features.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double r = row[j] - nb.mean[c][j];
      nb.var[c][j] += r * r;
    }
  }
  for (int c = 0; c < 2; ++c)
    for (auto& v : nb.var[c]) v = std::max(v / count[c], kVarianceFloor);
  m.dim = d;
  m.class_prior = {count[0] / static_cast<double>(n), count[1] / static_cast<double>(n)};
  nb.log_prior = {std::log(m.class_prior[0]), std::log(m.class_prior[1])};
  m.params = std::move(nb);
  return m;
}

/// Freund-Schapire voted perceptron with survival-count votes.
inline BinaryModel fit_voted_perceptron(const BinaryProblem& p, int epochs, std::uint64_t seed) {
  detail::check_problem(p);
  require(epochs >= 1, "voted perceptron needs epochs >= 1");
  BinaryModel m;
  if (detail::single_class(p, m)) return m;
  const std::size_t n = p.size(), d = p.features.cols();

  PerceptronParams vp;
  std::vector<double> v(d + 1, 0.0);
  double c = 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (int e = 0; e < epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (auto i : order) {
      auto row = p.features.row(i);
      const double y = p.targets[i] ? 1.0 : -1.0;
      double s = v[d];
      for (std::size_t j = 0; j < d; ++j) s += v[j] * row[j];
      if (y * s <= 0.0) {
        if (c > 0.0) {
          vp.weights.push_back(v);
          vp.counts.push_back(c);
        }
        for (std::size_t j = 0; j < d; ++j) v[j] += y * row[j];
        v[d] += y;
        c = 1.0;
      } else {
        c += 1.0;
      }
    }
  }
  if (c > 0.0) {
    vp.weights.push_back(v);
    vp.counts.push_back(c);
  }
  const double pos = static_cast<double>(detail::positives(p));
  m.dim = d;
  m.class_prior = {pos / static_cast<double>(n), 1.0 - pos / static_cast<double>(n)};
  m.params = std::move(vp);
  return m;
}

/// One-split tree chosen by weighted Gini; leaves carry Laplace-smoothed frequencies.
inline BinaryModel fit_decision_stump(const BinaryProblem& p) {
  detail::check_problem(p);
  BinaryModel m;
  if (detail::single_class(p, m)) return m;
  const std::size_t n = p.size(), d = p.features.cols();
  const double n_total = static_cast<double>(n);
  const double pos_total = static_cast<double>(detail::positives(p));

  StumpParams best;
  double best_impurity = 0.0;
  std::vector<std::size_t> order(n);
  for (std::size_t j = 0; j < d; ++j) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p.features(a, j) < p.features(b, j); });
    double pos_left = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      pos_left += p.targets[order[k]];
      const double lo = p.features(order[k], j), hi = p.features(order[k + 1], j);
      if (!(lo < hi)) continue;
      const double n_left = static_cast<double>(k + 1);
      const double imp = detail::split_impurity(pos_left, n_left, pos_total, n_total);
      if (!best.has_split || imp < best_impurity) {
        best_impurity = imp;
        best.has_split = true;
        best.feature = j;
        best.threshold = lo + (hi - lo) / 2.0;
        best.left_d1 = detail::laplace(pos_left, n_left);
        best.right_d1 = detail::laplace(pos_total - pos_left, n_total - n_left);
      }
    }
  }
  if (!best.has_split) best.left_d1 = best.right_d1 = detail::laplace(pos_total, n_total);
  m.dim = d;
  m.class_prior = {pos_total / n_total, 1.0 - pos_total / n_total};
  m.params = best;
  return m;
}

inline BinaryModel fit_binary(const BinaryProblem& p, const LearnerSpec& spec) {
  switch (spec.kind) {
    case LearnerKind::naive_bayes: return fit_naive_bayes(p);
    case LearnerKind::voted_perceptron: return fit_voted_perceptron(p, spec.epochs, spec.seed);
    case LearnerKind::decision_stump: return fit_decision_stump(p);
    case LearnerKind::constant: detail::check_problem(p); return constant_model(p.features.cols(), 0.5);
  }
  fail(ErrorKind::argument, "unknown learner kind");
}

inline PairSupport predict_soft(const BinaryModel& m, std::span<const double> x) {
  if (x.size() != m.dim)
    fail(ErrorKind::argument,
         "feature vector has dimension " + std::to_string(x.size()) + ", model expects " + std::to_string(m.dim));
  struct Visitor {
    std::span<const double> x;
    PairSupport operator()(const ConstantParams& c) const { return {c.d1, 1.0 - c.d1}; }
    PairSupport operator()(const NaiveBayesParams& nb) const {
      std::array<double, 2> ll = nb.log_prior;
      for (int c = 0; c < 2; ++c)
        for (std::size_t j = 0; j < x.size(); ++j) {
          const double r = x[j] - nb.mean[c][j];
          ll[c] -= 0.5 * std::log(2.0 * M_PI * nb.var[c][j]) + r * r / (2.0 * nb.var[c][j]);
        }
      return detail::from_score(ll[0] - ll[1]);
    }
    PairSupport operator()(const PerceptronParams& vp) const {
      const std::size_t d = x.size();
      double vote = 0.0, total = 0.0;
      for (std::size_t k = 0; k < vp.weights.size(); ++k) {
        const auto& w = vp.weights[k];
        double s = w[d];
        for (std::size_t j = 0; j < d; ++j) s += w[j] * x[j];
        vote += vp.counts[k] * static_cast<double>((s > 0.0) - (s < 0.0));
        total += vp.counts[k];
      }
      return detail::from_score(total > 0.0 ? vote / total : 0.0);
    }
    PairSupport operator()(const StumpParams& st) const {
      const double d1 = (!st.has_split || x[st.feature] <= st.threshold) ? st.left_d1 : st.right_d1;
      return {d1, 1.0 - d1};
    }
  };
  return std::visit(Visitor{x}, m.params);
}

inline void to_json(nlohmann::json& j, const BinaryModel& m) {
  j = nlohmann::json{{"kind", to_string(m.kind())}, {"dim", m.dim}, {"class_prior", m.class_prior}};
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ConstantParams>) {
          j["d1"] = p.d1;
        } else if constexpr (std::is_same_v<P, NaiveBayesParams>) {
          j["log_prior"] = p.log_prior;
          j["mean"] = p.mean;
          j["var"] = p.var;
        } else if constexpr (std::is_same_v<P, PerceptronParams>) {
          j["weights"] = p.weights;
          j["counts"] = p.counts;
        } else {
          j["has_split"] = p.has_split;
          j["feature"] = p.feature;
          j["threshold"] = p.threshold;
          j["left_d1"] = p.left_d1;
          j["right_d1"] = p.right_d1;
        }
      },
      m.params);
}

inline void from_json(const nlohmann::json& j, BinaryModel& m) {
  m.dim = j.at("dim").get<std::size_t>();
  m.class_prior = j.at("class_prior").get<std::array<double, 2>>();
  switch (learner_kind_from_string(j.at("kind").get<std::string>())) {
    case LearnerKind::constant: m.params = ConstantParams{j.at("d1").get<double>()}; break;
    case LearnerKind::naive_bayes: {
      NaiveBayesParams p;
      j.at("log_prior").get_to(p.log_prior);
      j.at("mean").get_to(p.mean);
      j.at("var").get_to(p.var);
      m.params = std::move(p);
      break;
    }
    case LearnerKind::voted_perceptron: {
      PerceptronParams p;
      j.at("weights").get_to(p.weights);
      j.at("counts").get_to(p.counts);
      m.params = std::move(p);
      break;
    }
    case LearnerKind::decision_stump: {
      StumpParams p;
      j.at("has_split").get_to(p.has_split);
      j.at("feature").get_to(p.feature);
      j.at("threshold").get_to(p.threshold);
      j.at("left_d1").get_to(p.left_d1);
      j.at("right_d1").get_to(p.right_d1);
      m.params = p;
      break;
    }
  }
}

}  // namespace lpwfcm
