#pragma once

#include <utility>
#include <vector>

#include "maicfeas/data.hpp"

namespace maicfeas {

/// Principal components of the standardized IPD (correlation-matrix PCA) with
/// the AD vector projected into the same coordinates. `ad_outside` lists the
/// PCs whose AD score falls outside the IPD score range; any such PC proves
/// the AD is outside the IPD convex hull (the converse does not hold).
struct PcaProjection {
  Matrix loadings;    // p x p, column k = PC k, orthonormal
  Vec eigenvalues;    // descending, summing to p
  Matrix ipd_scores;  // p x n
  Vec ad_scores;      // p
  std::vector<std::pair<double, double>> per_pc_range;  // (min, max) per PC
  std::vector<std::size_t> ad_outside;                  // 0-based PC indices
  std::vector<std::size_t> degenerate_pcs;  // eigenvalue < 1e-10: direction undefined,
                                            // excluded from the outside-range test
  bool rank_warning = false;                // p > n-1 or degenerate PCs present
};

/// Margin applied to the outside-range flags. Keeps the flag sound against
/// the hull check's own feasibility tolerance: a point flagged outside here
/// can never be declared hull-feasible.
inline constexpr double kPcaOutsideMargin = 1e-6;

inline PcaProjection pca_locate(const IpdMatrix& ipd, const AdVector& ad) {
  auto [z, ad_z, params] = standardize(ipd, ad);  // rejects constant covariates
  const std::size_t p = ipd.p(), n = ipd.n();

  Matrix corr(p, p);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a; b < p; ++b) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += z.values(a, j) * z.values(b, j);
      corr(a, b) = s / static_cast<double>(n - 1);
      corr(b, a) = corr(a, b);
    }

  SymmetricEigen eig = eigen_symmetric(corr);

  // deterministic sign convention: the largest-magnitude entry of each
  // loading column is positive (ties resolved by lowest row index)
  for (std::size_t k = 0; k < p; ++k) {
    std::size_t imax = 0;
    double amax = -1.0;
    for (std::size_t i = 0; i < p; ++i) {
      const double a = std::abs(eig.vectors(i, k));
      if (a > amax) {
        amax = a;
        imax = i;
      }
    }
    if (eig.vectors(imax, k) < 0.0)
      for (std::size_t i = 0; i < p; ++i) eig.vectors(i, k) = -eig.vectors(i, k);
  }

  PcaProjection out;
  out.eigenvalues = eig.values;
  out.loadings = std::move(eig.vectors);

  out.ipd_scores = Matrix(p, n);
  for (std::size_t k = 0; k < p; ++k)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < p; ++i) s += out.loadings(i, k) * z.values(i, j);
      out.ipd_scores(k, j) = s;
    }
  out.ad_scores.resize(p);
  for (std::size_t k = 0; k < p; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < p; ++i) s += out.loadings(i, k) * ad_z.values[i];
    out.ad_scores[k] = s;
  }

  out.per_pc_range.resize(p);
  for (std::size_t k = 0; k < p; ++k) {
    double lo = out.ipd_scores(k, 0), hi = lo;
    for (std::size_t j = 1; j < n; ++j) {
      lo = std::min(lo, out.ipd_scores(k, j));
      hi = std::max(hi, out.ipd_scores(k, j));
    }
    out.per_pc_range[k] = {lo, hi};
  }

  for (std::size_t k = 0; k < p; ++k) {
    if (out.eigenvalues[k] < 1e-10) {
      out.degenerate_pcs.push_back(k);
      continue;
    }
    const auto [lo, hi] = out.per_pc_range[k];
    if (out.ad_scores[k] < lo - kPcaOutsideMargin ||
        out.ad_scores[k] > hi + kPcaOutsideMargin)
      out.ad_outside.push_back(k);
  }
  out.rank_warning = (p > n - 1) || !out.degenerate_pcs.empty();
  return out;
}

}  // namespace maicfeas
