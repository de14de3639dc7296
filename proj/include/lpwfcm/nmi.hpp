#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

#include "lpwfcm/error.hpp"
#include "lpwfcm/fcm.hpp"

namespace lpwfcm {

/// 2x2 joint distribution p[u][v]; u = true class, v = classifier response.
using Joint2x2 = std::array<std::array<double, 2>, 2>;

struct WeightConfig {
  double gamma = 0.0;         // in [0, 1)
  double weight_floor = 1e-6;

  void validate() const {
    require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0,1)");
    require(weight_floor > 0.0, "weight floor must be positive");
  }
};

/// Joint distribution proportional to the confusion cells; nullopt when all cells are zero.
inline std::optional<Joint2x2> normalize_joint(const FuzzyConfusionMatrix& e) {
  const double total = e.total();
  if (!(total > 0.0)) return std::nullopt;
  Joint2x2 p{};
  for (int u = 0; u < 2; ++u)
    for (int v = 0; v < 2; ++v) p[u][v] = e.cell[u][v] / total;
  return p;
}

struct Marginals {
  std::array<double, 2> f{};  // true class (row sums)
  std::array<double, 2> g{};  // response (column sums)
};

inline Marginals marginals(const Joint2x2& p) {
  double total = 0.0;
  for (const auto& row : p)
    for (double v : row) {
      if (!(v >= 0.0)) fail(ErrorKind::argument, "joint distribution has a negative cell");
      total += v;
    }
  if (std::fabs(total - 1.0) > 1e-9) fail(ErrorKind::argument, "joint distribution does not sum to 1");
  Marginals m;
  for (int u = 0; u < 2; ++u)
    for (int v = 0; v < 2; ++v) {
      m.f[u] += p[u][v];
      m.g[v] += p[u][v];
    }
  return m;
}

/// Mutual information in bits, 0 log 0 := 0.
inline double mutual_information(const Joint2x2& p) {
  const auto m = marginals(p);
  double mi = 0.0;
  for (int u = 0; u < 2; ++u)
    for (int v = 0; v < 2; ++v) {
      const double fg = m.f[u] * m.g[v];
      if (p[u][v] > 0.0 && fg > 0.0) mi += p[u][v] * std::log2(p[u][v] / fg);
    }
  return std::max(mi, 0.0);
}

/// Joint entropy in bits.
inline double joint_entropy(const Joint2x2& p) {
  marginals(p);
  double h = 0.0;
  for (const auto& row : p)
    for (double v : row)
      if (v > 0.0) h -= v * std::log2(v);
  return std::max(h, 0.0);
}

/// Competence weight (MI / joint entropy)^gamma, clamped to [floor, 1].
inline double nmi_weight(const FuzzyConfusionMatrix& e, const WeightConfig& cfg) {
  cfg.validate();
  if (cfg.gamma == 0.0) return 1.0;
  const auto p = normalize_joint(e);
  if (!p) return cfg.weight_floor;
  const double h = joint_entropy(*p);
  if (!(h > 0.0)) return cfg.weight_floor;
  const double ratio = std::min(mutual_information(*p) / h, 1.0);
  return std::clamp(std::pow(ratio, cfg.gamma), cfg.weight_floor, 1.0);
}

}  // namespace lpwfcm
