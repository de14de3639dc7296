#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lpwfcm/dataset.hpp"
#include "lpwfcm/metrics.hpp"
#include "lpwfcm/model.hpp"
#include "lpwfcm/random.hpp"

namespace lpwfcm {

/// Algorithm numbering used in experiment reports.
enum class Algorithm : int { plain = 1, fcm = 2, weighted_fcm = 3 };

inline Mode mode_of(Algorithm a) {
  switch (a) {
    case Algorithm::plain: return Mode::plain;
    case Algorithm::fcm: return Mode::fcm;
    case Algorithm::weighted_fcm: return Mode::weighted_fcm;
  }
  fail(ErrorKind::argument, "unknown algorithm");
}

inline Algorithm algorithm_from_int(int a) {
  if (a < 1 || a > 3) fail(ErrorKind::argument, "algorithm must be 1, 2 or 3, got " + std::to_string(a));
  return static_cast<Algorithm>(a);
}

inline std::vector<double> default_beta_grid() { return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}; }
inline std::vector<double> default_gamma_grid() {
  std::vector<double> g;
  for (int e = -7; e <= -1; ++e) g.push_back(std::ldexp(1.0, e));
  return g;
}

struct ExperimentConfig {
  std::size_t folds = 10;
  double t = 0.6;
  std::uint64_t seed = 0;
  LearnerSpec learner;
  RrcMode rrc = RrcMode::beta_mc;
  std::vector<double> beta_grid = default_beta_grid();
  std::vector<double> gamma_grid = default_gamma_grid();
  std::size_t inner_folds = 3;
};

struct GridPoint {
  double beta = 0.0;
  double gamma = 0.0;
  double objective = 0.0;  // mean inner-CV macro-F1 loss
};

struct TuneChoice {
  double beta = 1.0;
  double gamma = 0.0;
  double objective = 0.0;
  std::vector<GridPoint> table;
};

struct TraceRecord {
  std::size_t fold = 0;
  std::size_t row = 0;  // dataset row of the test query
  std::size_t pair = 0;
  double d1 = 0.0;
  double d2 = 0.0;
  double weight = 1.0;
};

struct FoldResult {
  std::size_t fold = 0;
  MetricReport report;
  std::optional<TuneChoice> tuning;
};

using TraceSink = std::function<void(const TraceRecord&)>;

namespace detail {

inline std::shared_ptr<RrcCache> experiment_cache(const ExperimentConfig& cfg) {
  return std::make_shared<RrcCache>(cfg.rrc, derive_seed(cfg.seed, {40}));
}

inline MultiLabelDataset rows(const MultiLabelDataset& ds, const std::vector<std::size_t>& idx) { return ds.subset(idx); }

}  // namespace detail

/// Chooses (beta, gamma) by inner k-fold CV on `train`, minimising macro-F1 loss.
/// Algorithm fcm searches beta only (gamma = 0); weighted_fcm searches the full grid.
/// Ties go to the smaller beta, then the smaller gamma.
inline TuneChoice grid_search(const MultiLabelDataset& train, Algorithm alg, const ExperimentConfig& cfg,
                              std::uint64_t seed, std::shared_ptr<RrcCache> cache = nullptr) {
  require(alg != Algorithm::plain, "the plain algorithm has no correction hyperparameters");
  require(cfg.inner_folds >= 2, "inner CV needs at least 2 folds");
  if (train.size() < 2 * cfg.inner_folds)
    fail(ErrorKind::argument, "grid search needs at least " + std::to_string(2 * cfg.inner_folds) +
                                  " training instances, got " + std::to_string(train.size()));
  require(!cfg.beta_grid.empty(), "beta grid is empty");
  const std::vector<double> gammas = alg == Algorithm::weighted_fcm ? cfg.gamma_grid : std::vector<double>{0.0};
  require(!gammas.empty(), "gamma grid is empty");
  if (!cache) cache = detail::experiment_cache(cfg);

  std::vector<GridPoint> table;
  for (double b : cfg.beta_grid)
    for (double g : gammas) table.push_back({b, g, 0.0});

  const auto folds = kfold_indices(train.size(), cfg.inner_folds, derive_seed(seed, {1}));
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto inner_train = detail::rows(train, fold_complement(folds, f));
    const auto inner_test = detail::rows(train, folds[f]);
    FitOptions opt{mode_of(alg), cfg.learner, cfg.t, derive_seed(seed, {2, f}), cfg.rrc, 1.0, 0.0, cache};
    LpwModel m = fit_model(inner_train, opt);
    const auto val = prepare_validation(m);
    const auto test = prepare_queries(m, inner_test.features);
    for (auto& gp : table) {
      const auto theta = scut_fit(supports_for(m, val, gp.beta, gp.gamma), m.validation_labels);
      PredictionSet P;
      P.supports = supports_for(m, test, gp.beta, gp.gamma);
      P.truth = inner_test.labels;
      P.predicted = LabelMatrix(P.supports.rows(), P.supports.cols());
      for (std::size_t i = 0; i < P.supports.rows(); ++i) {
        auto bits = apply_thresholds(P.supports.row(i), theta);
        std::copy(bits.begin(), bits.end(), P.predicted.row(i).begin());
      }
      gp.objective += macro_f1_loss(P) / static_cast<double>(folds.size());
    }
  }

  TuneChoice best;
  best.objective = std::numeric_limits<double>::infinity();
  for (const auto& gp : table) {
    // table is ordered by beta then gamma, so strict < keeps the smallest on ties
    if (gp.objective < best.objective) {
      best.beta = gp.beta;
      best.gamma = gp.gamma;
      best.objective = gp.objective;
    }
  }
  best.table = std::move(table);
  return best;
}

/// Evaluates a fitted model on held-out rows.
inline PredictionSet predict_set(const LpwModel& m, const MultiLabelDataset& test) {
  const auto q = prepare_queries(m, test.features);
  PredictionSet P;
  P.supports = supports_for(m, q, m.beta, m.gamma);
  P.truth = test.labels;
  P.predicted = LabelMatrix(P.supports.rows(), P.supports.cols());
  for (std::size_t i = 0; i < P.supports.rows(); ++i) {
    auto bits = apply_thresholds(P.supports.row(i), m.thresholds);
    std::copy(bits.begin(), bits.end(), P.predicted.row(i).begin());
  }
  return P;
}

/// k-fold cross-validated run of one algorithm. Each training fold is split into
/// training/validation parts at ratio t; the correction hyperparameters are tuned
/// by inner CV on the training fold. The test fold is only touched for scoring.
/// Fold partitions and per-fold seeds do not depend on the algorithm, so runs of
/// different algorithms with the same config are paired.
inline std::vector<FoldResult> run_experiment(const MultiLabelDataset& ds, Algorithm alg, const ExperimentConfig& cfg,
                                              std::shared_ptr<RrcCache> cache = nullptr,
                                              const TraceSink& trace = nullptr) {
  ds.validate();
  require(cfg.folds >= 2, "experiment needs at least 2 folds");
  if (!cache) cache = detail::experiment_cache(cfg);
  const auto folds = kfold_indices(ds.size(), cfg.folds, derive_seed(cfg.seed, {10}));

  std::vector<FoldResult> out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    try {
      const auto train = detail::rows(ds, fold_complement(folds, f));
      const auto test = detail::rows(ds, folds[f]);
      FoldResult r;
      r.fold = f;
      FitOptions opt{mode_of(alg), cfg.learner, cfg.t, derive_seed(cfg.seed, {20, f}), cfg.rrc, 1.0, 0.0, cache};
      if (alg != Algorithm::plain) {
        r.tuning = grid_search(train, alg, cfg, derive_seed(cfg.seed, {30, f}), cache);
        opt.beta = r.tuning->beta;
        opt.gamma = r.tuning->gamma;
      }
      const LpwModel m = fit_model(train, opt);
      const auto P = predict_set(m, test);
      r.report = evaluate_all(P);
      if (trace) {
        const auto q = prepare_queries(m, test.features);
        for (std::size_t i = 0; i < test.size(); ++i) {
          QueryTrace qt;
          detail::query_supports(m, q, i, m.beta, m.gamma, &qt);
          for (std::size_t k = 0; k < qt.outputs.size(); ++k)
            trace({f, folds[f][i], k, qt.outputs[k].d1, qt.outputs[k].d2, qt.weights[k]});
        }
      }
      out.push_back(std::move(r));
    } catch (const Error& e) {
      throw Error(e.kind(), "fold " + std::to_string(f) + ": " + e.detail());
    }
  }
  return out;
}

/// Mean of one named metric over fold results.
inline double mean_metric(const std::vector<FoldResult>& results, std::size_t metric_index) {
  double s = 0.0;
  for (const auto& r : results) s += r.report.values().at(metric_index);
  return results.empty() ? 0.0 : s / static_cast<double>(results.size());
}

}  // namespace lpwfcm
