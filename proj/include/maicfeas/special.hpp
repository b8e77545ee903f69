#pragma once

#include <cmath>

#include "maicfeas/common.hpp"

namespace maicfeas {

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace detail {

/// Continued fraction for the incomplete beta function, evaluated with the
/// modified Lentz algorithm. Converges rapidly for x < (a+1)/(a+b+2).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr double eps = 1e-15;
  constexpr double fpmin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;

  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  throw ConvergenceError("incomplete beta: continued fraction did not converge",
                         500, 0.0);
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0)
    throw Error("regularized_incomplete_beta: a and b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0))
    return std::exp(ln_front) * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - std::exp(ln_front) * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// CDF of the F distribution with (d1, d2) degrees of freedom.
inline double f_cdf(double x, double d1, double d2) {
  if (d1 <= 0.0 || d2 <= 0.0) throw Error("f_cdf: degrees of freedom must be positive");
  if (x <= 0.0) return 0.0;
  return regularized_incomplete_beta(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2));
}

/// Upper tail of the F distribution, computed directly so that small
/// p-values keep full relative accuracy.
inline double f_survival(double x, double d1, double d2) {
  if (d1 <= 0.0 || d2 <= 0.0)
    throw Error("f_survival: degrees of freedom must be positive");
  if (x <= 0.0) return 1.0;
  return regularized_incomplete_beta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * x));
}

}  // namespace maicfeas
