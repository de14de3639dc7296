#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "lpwfcm/error.hpp"
#include "lpwfcm/table.hpp"

namespace lpwfcm {

/// Supports, thresholded predictions and ground truth for M instances x L labels.
struct PredictionSet {
  Matrix supports;
  LabelMatrix predicted;
  LabelMatrix truth;

  void validate() const {
    if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols())
      fail(ErrorKind::argument, "prediction and truth dimensions differ");
    if (supports.rows() != truth.rows() || supports.cols() != truth.cols())
      fail(ErrorKind::argument, "support and truth dimensions differ");
    if (truth.rows() == 0) fail(ErrorKind::argument, "prediction set is empty");
  }
};

struct MetricReport {
  double hamming = 0.0;
  double zero_one = 0.0;
  double example_f1_loss = 0.0;
  double ranking_loss = 0.0;
  double macro_fdr = 0.0;
  double macro_fnr = 0.0;
  double macro_f1_loss = 0.0;
  double micro_f1_loss = 0.0;

  static const std::vector<std::string>& names() {
    static const std::vector<std::string> n{"hamming",   "zero_one",  "example_f1_loss", "ranking_loss",
                                            "macro_fdr", "macro_fnr", "macro_f1_loss",   "micro_f1_loss"};
    return n;
  }
  std::vector<double> values() const {
    return {hamming, zero_one, example_f1_loss, ranking_loss, macro_fdr, macro_fnr, macro_f1_loss, micro_f1_loss};
  }
};

struct Contingency {
  std::size_t tp = 0, fp = 0, fn = 0;
};

/// precision := 1 when tp+fp == 0; recall := 1 when tp+fn == 0.
inline double precision(const Contingency& c) {
  return c.tp + c.fp == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}
inline double recall(const Contingency& c) {
  return c.tp + c.fn == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}
inline double f1_score(const Contingency& c) {
  const double p = precision(c), r = recall(c);
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

inline std::vector<Contingency> per_label_counts(const LabelMatrix& predicted, const LabelMatrix& truth) {
  std::vector<Contingency> out(truth.cols());
  for (std::size_t i = 0; i < truth.rows(); ++i)
    for (std::size_t l = 0; l < truth.cols(); ++l) {
      const bool y = truth(i, l), p = predicted(i, l);
      out[l].tp += y && p;
      out[l].fp += !y && p;
      out[l].fn += y && !p;
    }
  return out;
}

inline double hamming_loss(const PredictionSet& P) {
  P.validate();
  std::size_t wrong = 0;
  for (std::size_t k = 0; k < P.truth.data().size(); ++k) wrong += P.truth.data()[k] != P.predicted.data()[k];
  return static_cast<double>(wrong) / static_cast<double>(P.truth.data().size());
}

inline double zero_one_loss(const PredictionSet& P) {
  P.validate();
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < P.truth.rows(); ++i) {
    auto y = P.truth.row(i);
    auto p = P.predicted.row(i);
    wrong += !std::equal(y.begin(), y.end(), p.begin());
  }
  return static_cast<double>(wrong) / static_cast<double>(P.truth.rows());
}

inline double example_f1_loss(const PredictionSet& P) {
  P.validate();
  double total = 0.0;
  for (std::size_t i = 0; i < P.truth.rows(); ++i) {
    std::size_t both = 0, ny = 0, np = 0;
    for (std::size_t l = 0; l < P.truth.cols(); ++l) {
      both += P.truth(i, l) && P.predicted(i, l);
      ny += P.truth(i, l);
      np += P.predicted(i, l);
    }
    total += ny + np == 0 ? 1.0 : 2.0 * static_cast<double>(both) / static_cast<double>(ny + np);
  }
  return 1.0 - total / static_cast<double>(P.truth.rows());
}

/// Fraction of mis-ordered (relevant, irrelevant) pairs, ties 0.5; instances
/// lacking relevant or irrelevant labels are skipped.
inline double ranking_loss(const PredictionSet& P) {
  P.validate();
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < P.truth.rows(); ++i) {
    double bad = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < P.truth.cols(); ++a) {
      if (!P.truth(i, a)) continue;
      for (std::size_t b = 0; b < P.truth.cols(); ++b) {
        if (P.truth(i, b)) continue;
        ++pairs;
        const double sa = P.supports(i, a), sb = P.supports(i, b);
        if (sa < sb) bad += 1.0;
        else if (sa == sb) bad += 0.5;
      }
    }
    if (pairs == 0) continue;
    total += bad / static_cast<double>(pairs);
    ++counted;
  }
  if (counted == 0) fail(ErrorKind::undefined_metric, "ranking loss: no instance has both relevant and irrelevant labels");
  return total / static_cast<double>(counted);
}

inline double macro_fdr(const PredictionSet& P) {
  P.validate();
  auto c = per_label_counts(P.predicted, P.truth);
  double s = 0.0;
  for (const auto& x : c) s += 1.0 - precision(x);
  return s / static_cast<double>(c.size());
}

inline double macro_fnr(const PredictionSet& P) {
  P.validate();
  auto c = per_label_counts(P.predicted, P.truth);
  double s = 0.0;
  for (const auto& x : c) s += 1.0 - recall(x);
  return s / static_cast<double>(c.size());
}

inline double macro_f1_loss(const PredictionSet& P) {
  P.validate();
  auto c = per_label_counts(P.predicted, P.truth);
  double s = 0.0;
  for (const auto& x : c) s += f1_score(x);
  return 1.0 - s / static_cast<double>(c.size());
}

inline double micro_f1_loss(const PredictionSet& P) {
  P.validate();
  Contingency pooled;
  for (const auto& x : per_label_counts(P.predicted, P.truth)) {
    pooled.tp += x.tp;
    pooled.fp += x.fp;
    pooled.fn += x.fn;
  }
  if (pooled.tp + pooled.fp + pooled.fn == 0) return 0.0;
  return 1.0 - 2.0 * static_cast<double>(pooled.tp) / static_cast<double>(2 * pooled.tp + pooled.fp + pooled.fn);
}

inline MetricReport evaluate_all(const PredictionSet& P) {
  MetricReport r;
  r.hamming = hamming_loss(P);
  r.zero_one = zero_one_loss(P);
  r.example_f1_loss = example_f1_loss(P);
  r.ranking_loss = ranking_loss(P);
  r.macro_fdr = macro_fdr(P);
  r.macro_fnr = macro_fnr(P);
  r.macro_f1_loss = macro_f1_loss(P);
  r.micro_f1_loss = micro_f1_loss(P);
  return r;
}

}  // namespace lpwfcm
