#pragma once

#include <cmath>
#include <limits>

#include "lpwfcm/error.hpp"

namespace lpwfcm::detail {

inline constexpr double kSpecialEps = 1e-15;
inline constexpr int kSpecialMaxIter = 10000;

/// Regularized lower incomplete gamma P(a, x), series / continued fraction.
inline double regularized_gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
inline double regularized_gamma_q(double a, double x) {
  require(a > 0.0 && x >= 0.0, "incomplete gamma needs a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  const double log_front = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    double sum = 1.0 / a, term = sum, ap = a;
    for (int n = 0; n < kSpecialMaxIter; ++n) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * kSpecialEps) break;
    }
    return 1.0 - sum * std::exp(log_front);
  }
  // Lentz continued fraction for Q
  const double tiny = std::numeric_limits<double>::min() / kSpecialEps;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < kSpecialMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kSpecialEps) break;
  }
  return std::exp(log_front) * h;
}

inline double regularized_gamma_p(double a, double x) { return 1.0 - regularized_gamma_q(a, x); }

namespace beta_impl {

inline double continued_fraction(double a, double b, double x) {
  const double tiny = std::numeric_limits<double>::min() / kSpecialEps;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kSpecialMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kSpecialEps) break;
  }
  return h;
}

}  // namespace beta_impl

/// Regularized incomplete beta I_x(a, b) for fixed shapes; the log-normaliser
/// is computed once so repeated evaluation in x is cheap.
class RegularizedBeta {
 public:
  RegularizedBeta(double a, double b) : a_(a), b_(b) {
    require(a > 0.0 && b > 0.0, "incomplete beta needs a, b > 0");
    log_norm_ = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  }

  double operator()(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double front = std::exp(log_norm_ + a_ * std::log(x) + b_ * std::log1p(-x));
    if (x < (a_ + 1.0) / (a_ + b_ + 2.0)) return front * beta_impl::continued_fraction(a_, b_, x) / a_;
    return 1.0 - front * beta_impl::continued_fraction(b_, a_, 1.0 - x) / b_;
  }

 private:
  double a_, b_, log_norm_;
};

inline double regularized_beta(double x, double a, double b) { return RegularizedBeta(a, b)(x); }

/// Upper tail of the chi-square distribution with `dof` degrees of freedom.
inline double chi_square_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return regularized_gamma_q(dof / 2.0, x / 2.0);
}

/// Two-tailed p-value of Student's t with `dof` degrees of freedom.
inline double student_t_two_tailed(double t, double dof) {
  if (!std::isfinite(t)) return 0.0;
  return regularized_beta(dof / (dof + t * t), dof / 2.0, 0.5);
}

/// Standard normal upper tail.
inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace lpwfcm::detail
