#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "maicfeas/data.hpp"
#include "maicfeas/special.hpp"

namespace maicfeas {

enum class HotellingVariant { FixedAd, TwoSample };
enum class PValueMethod { FDistribution, Resampling };

inline const char* to_string(HotellingVariant v) {
  return v == HotellingVariant::FixedAd ? "fixed" : "two-sample";
}
inline const char* to_string(PValueMethod m) {
  return m == PValueMethod::FDistribution ? "f-distribution" : "resampling";
}

struct HotellingResult {
  double statistic = 0.0;  // T² or T²_AD
  HotellingVariant variant = HotellingVariant::FixedAd;
  double f_statistic = 0.0;  // (n−p)/(pn−p) × statistic
  int df1 = 0;               // p
  int df2 = 0;               // n − p
  double p_value = 1.0;
  PValueMethod method = PValueMethod::FDistribution;
  std::optional<int> resample_draws;
  std::optional<std::uint64_t> seed;
};

namespace detail {

/// (ȳ − x̄)' Σ̂⁻¹ (ȳ − x̄) with Σ̂ the IPD sample covariance (denominator n−1).
/// A near-singular Σ̂ is rejected with a message naming the covariates that
/// dominate the smallest-eigenvalue direction, since collinear dummy codings
/// are the usual culprit.
inline double mahalanobis_quadform(const Matrix& y, const Vec& xbar,
                                   const std::vector<std::string>& names,
                                   double cond_limit = 1e12) {
  const std::size_t p = y.rows(), n = y.cols();
  if (n <= p)
    throw Error("hotelling: requires n > p (got n=" + std::to_string(n) +
                ", p=" + std::to_string(p) + ")");
  const Matrix sigma = sample_covariance(y);
  const SymmetricEigen eig = eigen_symmetric(sigma);
  const double lmax = eig.values.front(), lmin = eig.values.back();
  if (lmin <= 0.0 || lmax / lmin > cond_limit) {
    const Vec v = eig.vectors.col(p - 1);
    double vmax = norm_inf(v);
    std::string culprits;
    for (std::size_t i = 0; i < p; ++i) {
      if (std::abs(v[i]) >= 0.5 * vmax) {
        if (!culprits.empty()) culprits += ", ";
        culprits += i < names.size() ? names[i] : ("covariate " + std::to_string(i + 1));
      }
    }
    throw SingularityError(
        "hotelling: IPD covariance is singular or near-singular; "
        "near-collinear covariates: " + culprits);
  }
  Vec diff(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) diff[i] = sample_mean(y.row(i)) - xbar[i];
  double quad = 0.0;
  for (std::size_t k = 0; k < p; ++k) {
    double proj = 0.0;
    for (std::size_t i = 0; i < p; ++i) proj += eig.vectors(i, k) * diff[i];
    quad += proj * proj / eig.values[k];
  }
  return quad;
}

inline HotellingResult make_result(double statistic, HotellingVariant variant,
                                   std::size_t p, std::size_t n) {
  HotellingResult r;
  r.statistic = statistic;
  r.variant = variant;
  r.df1 = static_cast<int>(p);
  r.df2 = static_cast<int>(n - p);
  const double np = static_cast<double>(n), pp = static_cast<double>(p);
  r.f_statistic = statistic * (np - pp) / (pp * np - pp);
  r.p_value = f_survival(r.f_statistic, pp, np - pp);
  return r;
}

inline void validate_pair(const IpdMatrix& ipd, const AdVector& ad) {
  if (ipd.p() != ad.p())
    throw AlignmentError("hotelling: AD/IPD dimension mismatch");
  if (!ipd.values.finite() || !all_finite(ad.values))
    throw Error("hotelling: non-finite input");
}

}  // namespace detail

/// T² = n (ȳ − x̄)' Σ̂⁻¹ (ȳ − x̄), treating the AD vector as fixed;
/// (n−p)/(pn−p) T² is referred to an F(p, n−p) distribution.
inline HotellingResult hotelling_fixed_ad(const IpdMatrix& ipd, const AdVector& ad) {
  detail::validate_pair(ipd, ad);
  const double quad =
      detail::mahalanobis_quadform(ipd.values, ad.values, ipd.covariate_names);
  return detail::make_result(static_cast<double>(ipd.n()) * quad,
                             HotellingVariant::FixedAd, ipd.p(), ipd.n());
}

/// T²_AD = n·n_AD/(n+n_AD) (ȳ − x̄)' Σ̂⁻¹ (ȳ − x̄), treating the AD mean as
/// sampled with size n_AD but estimating Σ̂ from the IPD alone. The same
/// (n−p)/(pn−p) scaling and F(p, n−p) reference apply, which differs from the
/// classic two-sample T² reference on purpose.
inline HotellingResult hotelling_two_sample(const IpdMatrix& ipd, const AdVector& ad) {
  detail::validate_pair(ipd, ad);
  if (!ad.n_ad)
    throw Error("hotelling_two_sample: AD sample size n_ad is required");
  if (*ad.n_ad < 1) throw Error("hotelling_two_sample: n_ad must be >= 1");
  const double n = static_cast<double>(ipd.n());
  const double n_ad = static_cast<double>(*ad.n_ad);
  const double quad =
      detail::mahalanobis_quadform(ipd.values, ad.values, ipd.covariate_names);
  return detail::make_result(n * n_ad / (n + n_ad) * quad,
                             HotellingVariant::TwoSample, ipd.p(), ipd.n());
}

/// Resampling p-value for either statistic under H0: μ = x̄. The IPD columns
/// are shifted by x̄ − ȳ so the null holds exactly, then bootstrap samples of
/// size n (with replacement) are drawn and the statistic recomputed against
/// x̄ each time. p = (1 + #{T*_b ≥ T_obs}) / (draws + 1); deterministic for a
/// fixed seed.
inline HotellingResult hotelling_resampled(const IpdMatrix& ipd, const AdVector& ad,
                                           HotellingVariant variant, int draws,
                                           std::uint64_t seed) {
  if (draws < 100) throw Error("hotelling_resampled: draws must be at least 100");
  HotellingResult observed = variant == HotellingVariant::FixedAd
                                 ? hotelling_fixed_ad(ipd, ad)
                                 : hotelling_two_sample(ipd, ad);

  const std::size_t p = ipd.p(), n = ipd.n();
  Matrix shifted = ipd.values;
  for (std::size_t i = 0; i < p; ++i) {
    const double delta = ad.values[i] - sample_mean(ipd.values.row(i));
    for (std::size_t j = 0; j < n; ++j) shifted(i, j) += delta;
  }

  const double factor =
      variant == HotellingVariant::FixedAd
          ? static_cast<double>(n)
          : static_cast<double>(n) * static_cast<double>(*ad.n_ad) /
                (static_cast<double>(n) + static_cast<double>(*ad.n_ad));

  std::mt19937_64 rng(seed);
  Matrix sample(p, n);
  int exceed = 0;
  for (int b = 0; b < draws; ++b) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t idx = static_cast<std::size_t>(rng() % n);
      for (std::size_t i = 0; i < p; ++i) sample(i, j) = shifted(i, idx);
    }
    double stat;
    try {
      stat = factor * detail::mahalanobis_quadform(sample, ad.values,
                                                   ipd.covariate_names);
    } catch (const SingularityError&) {
      stat = std::numeric_limits<double>::infinity();  // degenerate draw counts against H1
    }
    if (stat >= observed.statistic) ++exceed;
  }

  observed.method = PValueMethod::Resampling;
  observed.resample_draws = draws;
  observed.seed = seed;
  observed.p_value =
      (1.0 + static_cast<double>(exceed)) / (static_cast<double>(draws) + 1.0);
  return observed;
}

}  // namespace maicfeas
