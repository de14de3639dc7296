#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "lpwfcm/error.hpp"
#include "lpwfcm/random.hpp"
#include "lpwfcm/table.hpp"

namespace lpwfcm {

/// N feature vectors paired with N binary label vectors.
struct MultiLabelDataset {
  Matrix features;      // N x d
  LabelMatrix labels;   // N x L, entries 0/1
  std::vector<std::string> feature_names;
  std::vector<std::string> label_names;

  std::size_t size() const noexcept { return features.rows(); }
  std::size_t dim() const noexcept { return features.cols(); }
  std::size_t label_count() const noexcept { return labels.cols(); }

  /// Throws ErrorKind::schema / value when the dataset invariants do not hold.
  void validate() const {
    if (features.rows() != labels.rows())
      fail(ErrorKind::schema, "feature and label row counts differ");
    if (size() < 1) fail(ErrorKind::schema, "dataset has no instances");
    if (dim() < 1) fail(ErrorKind::schema, "dataset has no features");
    if (label_count() < 2) fail(ErrorKind::schema, "dataset needs at least 2 labels");
    if (feature_names.size() != dim()) fail(ErrorKind::schema, "feature name count differs from d");
    if (label_names.size() != label_count()) fail(ErrorKind::schema, "label name count differs from L");
    for (auto v : labels.data())
      if (v > 1) fail(ErrorKind::value, "label matrix holds a value outside {0,1}");
  }

  MultiLabelDataset subset(std::span<const std::size_t> idx) const {
    return {features.select_rows(idx), labels.select_rows(idx), feature_names, label_names};
  }

  bool operator==(const MultiLabelDataset&) const = default;
};

struct SplitResult {
  MultiLabelDataset train;
  MultiLabelDataset validation;
  double t = 0.0;
  std::vector<std::size_t> train_index;
  std::vector<std::size_t> validation_index;
};

struct DatasetStats {
  double label_cardinality = 0.0;
  double label_density = 0.0;
  double avg_imbalance_ratio = 0.0;
};

namespace detail {

inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

}  // namespace detail

/// Uniform random split into training part (round(t*N) rows) and validation part.
inline SplitResult split_train_validation(const MultiLabelDataset& ds, double t, std::uint64_t seed) {
  require(t > 0.0 && t < 1.0, "split ratio t must lie in (0,1)");
  const std::size_t n = ds.size();
  require(n >= 2, "split needs at least 2 instances");
  const auto n_train = static_cast<std::size_t>(std::llround(t * static_cast<double>(n)));
  if (n_train == 0 || n_train == n)
    fail(ErrorKind::argument, "split ratio " + std::to_string(t) + " leaves an empty part for N=" + std::to_string(n));

  auto idx = detail::shuffled_indices(n, seed);
  std::vector<std::size_t> tr(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> va(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  std::sort(tr.begin(), tr.end());
  std::sort(va.begin(), va.end());
  SplitResult out{ds.subset(tr), ds.subset(va), t, std::move(tr), std::move(va)};
  return out;
}

/// k disjoint folds covering 0..N-1, sizes differing by at most one.
inline std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n)
    fail(ErrorKind::argument, "fold count k=" + std::to_string(k) + " must satisfy 2 <= k <= N=" + std::to_string(n));
  auto idx = detail::shuffled_indices(n, seed);
  std::vector<std::vector<std::size_t>> folds(k);
  const std::size_t base = n / k, extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    folds[f].assign(idx.begin() + static_cast<std::ptrdiff_t>(pos), idx.begin() + static_cast<std::ptrdiff_t>(pos + len));
    std::sort(folds[f].begin(), folds[f].end());
    pos += len;
  }
  return folds;
}

/// Complement of one fold.
inline std::vector<std::size_t> fold_complement(const std::vector<std::vector<std::size_t>>& folds, std::size_t f) {
  std::vector<std::size_t> out;
  for (std::size_t g = 0; g < folds.size(); ++g)
    if (g != f) out.insert(out.end(), folds[g].begin(), folds[g].end());
  std::sort(out.begin(), out.end());
  return out;
}

/// Hyperplane-labelled synthetic data. Label l is [w_l . x + b_l > 0], flipped
/// with probability `noise`. Offsets are redrawn until every label occurs.
inline MultiLabelDataset generate_synthetic(std::size_t n, std::size_t L, std::size_t d, double noise,
                                            std::uint64_t seed) {
  require(n >= 10, "synthetic data needs n >= 10");
  require(L >= 2, "synthetic data needs L >= 2");
  require(d >= L, "synthetic data needs d >= L");
  require(noise >= 0.0 && noise < 0.5, "noise must lie in [0, 0.5)");

  constexpr int kMaxAttempts = 100;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Matrix x(n, d);
  Matrix w(L, d);
  {
    Rng rng(derive_seed(seed, {1}));
    for (auto& v : x.data()) v = normal(rng);
    for (auto& v : w.data()) v = normal(rng);
  }
  std::vector<double> flips(n * L);
  {
    Rng rng(derive_seed(seed, {2}));
    for (auto& v : flips) v = unit(rng);
  }

  MultiLabelDataset ds;
  ds.features = x;
  for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("f" + std::to_string(j + 1));
  for (std::size_t l = 0; l < L; ++l) ds.label_names.push_back("L" + std::to_string(l + 1));

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(derive_seed(seed, {3, static_cast<std::uint64_t>(attempt)}));
    std::vector<double> offset(L);
    for (std::size_t l = 0; l < L; ++l) {
      double norm = 0.0;
      for (double v : w.row(l)) norm += v * v;
      offset[l] = (2.0 * unit(rng) - 1.0) * 0.5 * std::sqrt(norm);
    }
    LabelMatrix y(n, L);
    std::vector<std::size_t> freq(L, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t l = 0; l < L; ++l) {
        double s = offset[l];
        for (std::size_t j = 0; j < d; ++j) s += w(l, j) * x(i, j);
        bool bit = s > 0.0;
        if (flips[i * L + l] < noise) bit = !bit;
        y(i, l) = bit ? 1 : 0;
        freq[l] += bit ? 1 : 0;
      }
    }
    if (std::all_of(freq.begin(), freq.end(), [](std::size_t f) { return f > 0; })) {
      ds.labels = std::move(y);
      return ds;
    }
  }
  fail(ErrorKind::generation, "could not draw offsets giving every label a positive instance");
}

/// Label cardinality, density and average imbalance ratio.
inline DatasetStats compute_stats(const MultiLabelDataset& ds) {
  const std::size_t n = ds.size(), L = ds.label_count();
  require(n >= 1 && L >= 1, "stats need a non-empty dataset");
  std::vector<std::size_t> freq(L, 0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < L; ++l) {
      freq[l] += ds.labels(i, l);
      total += ds.labels(i, l);
    }
  for (std::size_t l = 0; l < L; ++l)
    if (freq[l] == 0) {
      const std::string name = l < ds.label_names.size() ? ds.label_names[l] : std::to_string(l);
      fail(ErrorKind::stats, "label '" + name + "' has no positive instance");
    }
  DatasetStats s;
  s.label_cardinality = static_cast<double>(total) / static_cast<double>(n);
  s.label_density = s.label_cardinality / static_cast<double>(L);
  const double max_freq = static_cast<double>(*std::max_element(freq.begin(), freq.end()));
  double ir = 0.0;
  for (auto f : freq) ir += max_freq / static_cast<double>(f);
  s.avg_imbalance_ratio = ir / static_cast<double>(L);
  return s;
}

/// Per-feature z-score parameters estimated on one dataset and applied to others.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(std::vector<double> mean, std::vector<double> scale)
      : mean_(std::move(mean)), scale_(std::move(scale)) {}

  static Standardizer fit(const Matrix& x) {
    const std::size_t n = x.rows(), d = x.cols();
    require(n >= 1, "standardizer needs at least one row");
    std::vector<double> mean(d, 0.0), scale(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j);
    for (auto& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double c = x(i, j) - mean[j];
        scale[j] += c * c;
      }
    for (auto& s : scale) {
      s = std::sqrt(s / static_cast<double>(n));
      if (!(s > 1e-12)) s = 1.0;
    }
    return {std::move(mean), std::move(scale)};
  }

  std::size_t dim() const noexcept { return mean_.size(); }
  const std::vector<double>& mean() const noexcept { return mean_; }
  const std::vector<double>& scale() const noexcept { return scale_; }

  std::vector<double> apply(std::span<const double> row) const {
    if (row.size() != dim()) fail(ErrorKind::argument, "feature vector has wrong dimension");
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean_[j]) / scale_[j];
    return out;
  }

  Matrix apply(const Matrix& x) const {
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      auto r = apply(x.row(i));
      std::copy(r.begin(), r.end(), out.row(i).begin());
    }
    return out;
  }

 private:
  std::vector<double> mean_;
  std::vector<double> scale_;
};

// JSON cache format: row-major nested arrays plus names.

inline void to_json(nlohmann::json& j, const MultiLabelDataset& ds) {
  nlohmann::json feats = nlohmann::json::array(), labs = nlohmann::json::array();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto f = ds.features.row(i);
    auto y = ds.labels.row(i);
    feats.push_back(std::vector<double>(f.begin(), f.end()));
    labs.push_back(std::vector<int>(y.begin(), y.end()));
  }
  j = nlohmann::json{{"feature_names", ds.feature_names},
                     {"label_names", ds.label_names},
                     {"features", std::move(feats)},
                     {"labels", std::move(labs)}};
}

inline void from_json(const nlohmann::json& j, MultiLabelDataset& ds) {
  try {
    ds = MultiLabelDataset{};
    ds.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    ds.label_names = j.at("label_names").get<std::vector<std::string>>();
    const auto& feats = j.at("features");
    const auto& labs = j.at("labels");
    if (feats.size() != labs.size()) fail(ErrorKind::schema, "features and labels differ in row count");
    ds.features = Matrix(0, ds.feature_names.size());
    ds.labels = LabelMatrix(0, ds.label_names.size());
    for (std::size_t i = 0; i < feats.size(); ++i) {
      auto f = feats[i].get<std::vector<double>>();
      auto y = labs[i].get<std::vector<int>>();
      std::vector<unsigned char> yb;
      for (int v : y) {
        if (v != 0 && v != 1) fail(ErrorKind::value, "label value outside {0,1} in row " + std::to_string(i));
        yb.push_back(static_cast<unsigned char>(v));
      }
      if (f.size() != ds.feature_names.size() || yb.size() != ds.label_names.size())
        fail(ErrorKind::schema, "row " + std::to_string(i) + " has the wrong width");
      ds.features.append_row(f);
      ds.labels.append_row(yb);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("dataset json: ") + e.what());
  }
  ds.validate();
}

}  // namespace lpwfcm
