#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "lpwfcm/dataset.hpp"
#include "lpwfcm/fcm.hpp"
#include "lpwfcm/learners.hpp"
#include "lpwfcm/nmi.hpp"
#include "lpwfcm/pairwise.hpp"
#include "lpwfcm/random.hpp"

namespace lpwfcm {

/// plain: raw pairwise supports, uniform weights.
/// fcm: supports corrected by the local fuzzy confusion matrix, uniform weights.
/// weighted_fcm: corrected supports, NMI competence weights.
enum class Mode { plain, fcm, weighted_fcm };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::plain: return "plain";
    case Mode::fcm: return "fcm";
    case Mode::weighted_fcm: return "weighted_fcm";
  }
  return "?";
}

inline Mode mode_from_string(const std::string& s) {
  if (s == "plain") return Mode::plain;
  if (s == "fcm") return Mode::fcm;
  if (s == "weighted_fcm") return Mode::weighted_fcm;
  fail(ErrorKind::argument, "unknown model mode '" + s + "'");
}

struct FitOptions {
  Mode mode = Mode::plain;
  LearnerSpec learner;
  double t = 0.6;
  std::uint64_t seed = 0;
  RrcMode rrc = RrcMode::beta_mc;
  double beta = 1.0;
  double gamma = 0.0;
  /// Shared memo for RRC probabilities; when null a private one seeded from `seed` is made.
  std::shared_ptr<RrcCache> rrc_cache;
};

/// Saved validation-side structures used by the correction at inference time.
struct CorrectionState {
  std::vector<ClassSubsets> subsets;     // per pair
  std::vector<DecisionRegion> regions;   // per pair
};

struct LpwModel {
  Mode mode = Mode::plain;
  std::vector<std::string> label_names;
  Standardizer scaler;
  std::vector<PairModel> pairs;
  std::vector<double> thresholds;
  double beta = 1.0;
  double gamma = 0.0;
  Matrix validation_features;  // standardised
  LabelMatrix validation_labels;
  std::optional<CorrectionState> correction;
  std::shared_ptr<RrcCache> rrc;

  std::size_t label_count() const noexcept { return label_names.size(); }
  std::vector<PairIndex> pair_indices() const {
    std::vector<PairIndex> out;
    for (const auto& p : pairs) out.push_back(p.pair);
    return out;
  }
};

/// Query rows with everything that does not depend on (beta, gamma) precomputed.
struct PreparedQueries {
  std::vector<std::vector<PairSupport>> raw;   // [query][pair] base-classifier outputs
  std::vector<std::vector<double>> p_rrc;      // [query][pair] P_rrc(first | x)
  Matrix sqdist;                               // [query][validation row]
  std::vector<std::ptrdiff_t> exclude;         // validation row left out per query, or -1
};

/// Per-query intermediate values, for tracing.
struct QueryTrace {
  std::vector<PairSupport> outputs;
  std::vector<double> weights;
  std::vector<double> supports;
};

namespace detail {

inline PreparedQueries prepare(const LpwModel& m, const Matrix& standardized, bool leave_one_out) {
  PreparedQueries q;
  const std::size_t Q = standardized.rows(), P = m.pairs.size();
  q.raw.assign(Q, std::vector<PairSupport>(P));
  q.exclude.assign(Q, -1);
  const bool corrected = m.mode != Mode::plain;
  if (corrected) {
    q.p_rrc.assign(Q, std::vector<double>(P, 0.0));
    q.sqdist = Matrix(Q, m.validation_features.rows());
  }
  for (std::size_t i = 0; i < Q; ++i) {
    auto x = standardized.row(i);
    for (std::size_t k = 0; k < P; ++k) {
      q.raw[i][k] = predict_soft(m.pairs[k].model, x);
      if (corrected) q.p_rrc[i][k] = (*m.rrc)(m.pairs[k].pair.index, q.raw[i][k]);
    }
    if (corrected) {
      for (std::size_t v = 0; v < m.validation_features.rows(); ++v)
        q.sqdist(i, v) = rms_squared_distance(x, m.validation_features.row(v));
      if (leave_one_out && m.validation_features.rows() > 1) q.exclude[i] = static_cast<std::ptrdiff_t>(i);
    }
  }
  return q;
}

/// Neighbourhood memberships shifted by the nearest distance; the confusion
/// estimate is a ratio over these memberships, so the shift cancels and only
/// guards against underflow.
inline std::vector<double> stable_neighborhood(std::span<const double> sqdist, double beta, std::ptrdiff_t exclude) {
  double nearest = std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < sqdist.size(); ++v)
    if (static_cast<std::ptrdiff_t>(v) != exclude) nearest = std::min(nearest, sqdist[v]);
  std::vector<double> mu(sqdist.size(), 0.0);
  if (!std::isfinite(nearest)) return mu;
  for (std::size_t v = 0; v < sqdist.size(); ++v)
    if (static_cast<std::ptrdiff_t>(v) != exclude) mu[v] = std::exp(-beta * (sqdist[v] - nearest));
  return mu;
}

inline std::vector<double> query_supports(const LpwModel& m, const PreparedQueries& q, std::size_t i, double beta,
                                          double gamma, QueryTrace* trace = nullptr) {
  const std::size_t P = m.pairs.size();
  std::vector<PairSupport> outputs(P);
  std::vector<double> weights(P, 1.0);
  if (m.mode == Mode::plain) {
    outputs = q.raw[i];
  } else {
    const auto nb = stable_neighborhood(q.sqdist.row(i), beta, q.exclude[i]);
    const WeightConfig wc{gamma, 1e-6};
    for (std::size_t k = 0; k < P; ++k) {
      const auto eps = estimate_confusion(m.correction->subsets[k], m.correction->regions[k], nb);
      outputs[k] = corrected_supports(q.p_rrc[i][k], conditional_posterior(eps));
      if (m.mode == Mode::weighted_fcm) weights[k] = nmi_weight(eps, wc);
    }
  }
  const auto pairs = m.pair_indices();
  auto s = aggregate_supports(pairs, outputs, weights, m.label_count());
  if (trace) *trace = {outputs, weights, s};
  return s;
}

}  // namespace detail

/// Supports for prepared queries at the given correction hyperparameters.
inline Matrix supports_for(const LpwModel& m, const PreparedQueries& q, double beta, double gamma) {
  Matrix out(q.raw.size(), m.label_count());
  for (std::size_t i = 0; i < q.raw.size(); ++i) {
    auto s = detail::query_supports(m, q, i, beta, gamma);
    std::copy(s.begin(), s.end(), out.row(i).begin());
  }
  return out;
}

/// Prepares raw (unstandardised) query rows.
inline PreparedQueries prepare_queries(const LpwModel& m, const Matrix& raw_features) {
  return detail::prepare(m, m.scaler.apply(raw_features), false);
}

/// Prepares the model's own validation rows, each excluded from its own neighbourhood.
inline PreparedQueries prepare_validation(const LpwModel& m) { return detail::prepare(m, m.validation_features, true); }

/// Re-fits SCut thresholds on the validation outputs of the full pipeline.
inline void calibrate_thresholds(LpwModel& m, const PreparedQueries& validation) {
  m.thresholds = scut_fit(supports_for(m, validation, m.beta, m.gamma), m.validation_labels);
}

inline void calibrate_thresholds(LpwModel& m) { calibrate_thresholds(m, prepare_validation(m)); }

/// Learning procedure: split into training/validation parts, standardise on the
/// training part, train one classifier per label pair, build decision regions
/// and class subsets on the validation part, then fit SCut thresholds.
inline LpwModel fit_model(const MultiLabelDataset& s, const FitOptions& opt) {
  s.validate();
  if (opt.mode != Mode::plain) require(opt.beta > 0.0, "beta must be positive");
  const auto split = split_train_validation(s, opt.t, derive_seed(opt.seed, {1}));

  LpwModel m;
  m.mode = opt.mode;
  m.label_names = s.label_names;
  m.beta = opt.beta;
  m.gamma = opt.mode == Mode::weighted_fcm ? opt.gamma : 0.0;
  m.scaler = Standardizer::fit(split.train.features);
  const Matrix train_x = m.scaler.apply(split.train.features);
  m.validation_features = m.scaler.apply(split.validation.features);
  m.validation_labels = split.validation.labels;
  m.rrc = opt.rrc_cache ? opt.rrc_cache : std::make_shared<RrcCache>(opt.rrc, derive_seed(opt.seed, {3}));

  LearnerSpec learner = opt.learner;
  learner.seed = derive_seed(opt.seed, {2});
  m.pairs = train_lpw(train_x, split.train.labels, learner);

  if (m.mode != Mode::plain) {
    CorrectionState c;
    for (const auto& pm : m.pairs) {
      c.subsets.push_back(build_class_subsets(m.validation_labels, pm.pair));
      c.regions.push_back(build_decision_regions(pm.model, m.validation_features, pm.pair, *m.rrc));
    }
    m.correction = std::move(c);
  }
  m.thresholds.assign(m.label_count(), 0.5);
  calibrate_thresholds(m);
  return m;
}

/// Classification procedure for one raw feature vector.
inline std::vector<double> predict_supports(const LpwModel& m, std::span<const double> x, QueryTrace* trace = nullptr) {
  Matrix one(0, x.size());
  one.append_row(x);
  const auto q = prepare_queries(m, one);
  return detail::query_supports(m, q, 0, m.beta, m.gamma, trace);
}

inline std::vector<unsigned char> predict(const LpwModel& m, std::span<const double> x) {
  return apply_thresholds(predict_supports(m, x), m.thresholds);
}

inline void to_json(nlohmann::json& j, const LpwModel& m) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : m.pairs)
    pairs.push_back({{"index", p.pair.index}, {"first", p.pair.first}, {"second", p.pair.second}, {"model", p.model}});
  nlohmann::json vx = nlohmann::json::array(), vy = nlohmann::json::array();
  for (std::size_t i = 0; i < m.validation_features.rows(); ++i) {
    auto r = m.validation_features.row(i);
    auto y = m.validation_labels.row(i);
    vx.push_back(std::vector<double>(r.begin(), r.end()));
    vy.push_back(std::vector<int>(y.begin(), y.end()));
  }
  j = nlohmann::json{{"mode", to_string(m.mode)},
                     {"label_names", m.label_names},
                     {"scaler", {{"mean", m.scaler.mean()}, {"scale", m.scaler.scale()}}},
                     {"pairs", std::move(pairs)},
                     {"thresholds", m.thresholds},
                     {"beta", m.beta},
                     {"gamma", m.gamma},
                     {"rrc", {{"mode", to_string(m.rrc->mode())}, {"seed", m.rrc->seed()}}},
                     {"validation", {{"features", std::move(vx)}, {"labels", std::move(vy)}}}};
  if (m.correction) {
    nlohmann::json regions = nlohmann::json::array(), subsets = nlohmann::json::array();
    for (std::size_t k = 0; k < m.pairs.size(); ++k) {
      regions.push_back({{"first", m.correction->regions[k].first}, {"second", m.correction->regions[k].second}});
      subsets.push_back({{"first", m.correction->subsets[k].first}, {"second", m.correction->subsets[k].second}});
    }
    j["correction"] = {{"regions", std::move(regions)}, {"subsets", std::move(subsets)}};
  }
}

inline void from_json(const nlohmann::json& j, LpwModel& m) {
  m = LpwModel{};
  m.mode = mode_from_string(j.at("mode").get<std::string>());
  j.at("label_names").get_to(m.label_names);
  m.scaler = Standardizer(j.at("scaler").at("mean").get<std::vector<double>>(),
                          j.at("scaler").at("scale").get<std::vector<double>>());
  for (const auto& p : j.at("pairs"))
    m.pairs.push_back({{p.at("index").get<std::size_t>(), p.at("first").get<std::size_t>(),
                        p.at("second").get<std::size_t>()},
                       p.at("model").get<BinaryModel>()});
  j.at("thresholds").get_to(m.thresholds);
  j.at("beta").get_to(m.beta);
  j.at("gamma").get_to(m.gamma);
  m.rrc = std::make_shared<RrcCache>(rrc_mode_from_string(j.at("rrc").at("mode").get<std::string>()),
                                     j.at("rrc").at("seed").get<std::uint64_t>());
  const auto& vx = j.at("validation").at("features");
  const auto& vy = j.at("validation").at("labels");
  m.validation_features = Matrix(0, m.scaler.dim());
  m.validation_labels = LabelMatrix(0, m.label_names.size());
  for (std::size_t i = 0; i < vx.size(); ++i) {
    m.validation_features.append_row(vx[i].get<std::vector<double>>());
    auto y = vy[i].get<std::vector<unsigned char>>();
    m.validation_labels.append_row(y);
  }
  if (j.contains("correction")) {
    CorrectionState c;
    for (const auto& r : j.at("correction").at("regions"))
      c.regions.push_back({r.at("first").get<std::vector<double>>(), r.at("second").get<std::vector<double>>()});
    for (const auto& s : j.at("correction").at("subsets"))
      c.subsets.push_back(
          {s.at("first").get<std::vector<unsigned char>>(), s.at("second").get<std::vector<unsigned char>>()});
    m.correction = std::move(c);
  }
}

}  // namespace lpwfcm
