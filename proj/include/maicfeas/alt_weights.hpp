#pragma once

#include <utility>
#include <vector>

#include "maicfeas/hull.hpp"

namespace maicfeas {

enum class DistanceMetric { Euclidean, Mahalanobis };

inline const char* to_string(DistanceMetric m) {
  return m == DistanceMetric::Euclidean ? "euclidean" : "mahalanobis";
}

/// A family of feasible weight vectors (every column satisfies Yw = x̄,
/// w ≥ 0, Σw = 1) together with an inverse-distance blend of them. Unlike
/// MAIC's exponential weights, the blend tends to favor patients close to
/// the AD vector.
struct AltWeightSet {
  Matrix basis;  // n x n, column k from the LP with the k-th projected axis objective
  Vec blend;     // d, nonnegative, sums to 1
  Vec final;     // basis × blend
  DistanceMetric distance_metric = DistanceMetric::Euclidean;
  std::vector<std::size_t> degenerate_columns;  // projected axis was ~0; hull witness used
  std::vector<std::size_t> floored_distances;   // patient coincides with the AD vector
};

namespace detail {

/// P = I − M'(MM')⁻¹M for a p×n matrix M, i.e. the orthogonal projector onto
/// the complement of M's row space. Rank deficiency is absorbed by a
/// pseudo-inverse with eigenvalues below 1e-10·λmax treated as zero.
inline Matrix row_space_complement_projector(const Matrix& m, bool* rank_deficient) {
  const std::size_t p = m.rows(), n = m.cols();
  Matrix gram(p, p);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a; b < p; ++b) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += m(a, j) * m(b, j);
      gram(a, b) = s;
      gram(b, a) = s;
    }
  const SymmetricEigen eig = eigen_symmetric(gram);
  const double lmax = eig.values.empty() ? 0.0 : eig.values.front();
  const double cutoff = 1e-10 * std::max(lmax, 1e-300);
  bool deficient = false;
  Vec inv(p, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    if (eig.values[k] > cutoff)
      inv[k] = 1.0 / eig.values[k];
    else
      deficient = true;
  }
  if (rank_deficient) *rank_deficient = deficient;

  // B = (MM')⁺ M, then P = I − M'B
  Matrix b(p, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < p; ++k) {
      if (inv[k] == 0.0) continue;
      double proj = 0.0;
      for (std::size_t i = 0; i < p; ++i) proj += eig.vectors(i, k) * m(i, j);
      proj *= inv[k];
      for (std::size_t i = 0; i < p; ++i) b(i, j) += eig.vectors(i, k) * proj;
    }
  }
  Matrix proj = Matrix::identity(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < p; ++i) s += m(i, r) * b(i, c);
      proj(r, c) -= s;
    }
  return proj;
}

}  // namespace detail

/// Projection onto the orthogonal complement of the IPD row space:
/// P = I_n − Y'(YY')⁻¹Y. Symmetric, idempotent, YP = 0.
inline Matrix projection_matrix(const IpdMatrix& ipd, bool* rank_deficient = nullptr) {
  if (!ipd.values.finite()) throw Error("projection_matrix: non-finite input");
  return detail::row_space_complement_projector(ipd.values, rank_deficient);
}

/// Runs the membership LP n times, maximizing c'v with c the k-th column of
/// the projector built from the AD-centered standardized IPD. Each column of
/// the result is a basic feasible solution, hence supported on at most p + 1
/// patients. Columns whose projected axis vanishes (the axis lies in the IPD
/// row space) fall back to the hull-check witness.
inline Matrix alt_weight_basis(const IpdMatrix& ipd, const AdVector& ad,
                               std::vector<std::size_t>* degenerate_columns = nullptr,
                               const HullOptions& opts = {}) {
  FeasibilityVerdict verdict = check_in_hull(ipd, ad, opts);
  if (verdict.status == HullStatus::Infeasible)
    throw FeasibilityError(
        "alt_weight_basis: AD lies outside the convex hull of the IPD columns",
        std::move(verdict));

  const std::size_t n = ipd.n();
  const auto prob = detail::standardized_problem(ipd, ad);

  // center the standardized columns at the AD point, so feasible weights are
  // exactly the vectors with Cw = 0 on the constraint simplex
  Matrix centered = prob.z;
  for (std::size_t i = 0; i < centered.rows(); ++i)
    for (std::size_t j = 0; j < n; ++j) centered(i, j) -= prob.ad_z[i];
  const Matrix proj = detail::row_space_complement_projector(centered, nullptr);

  auto [a, b] = detail::hull_constraints(prob.z, prob.ad_z);
  lp::SimplexSolver base(a, b, {.feas_tol = opts.feasibility_tol});
  if (!base.solve_feasibility())
    throw Error("alt_weight_basis: LP infeasible after a feasible hull check");
  base.prepare_phase2();

  Matrix basis(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec objective = proj.col(k);
    if (norm_inf(objective) < 1e-12) {
      if (degenerate_columns) degenerate_columns->push_back(k);
      for (std::size_t i = 0; i < n; ++i) basis(i, k) = (*verdict.witness)[i];
      continue;
    }
    lp::SimplexSolver solver = base;  // shared presolved phase-1 basis
    solver.maximize(objective);
    const Vec w = solver.primal_solution();
    for (std::size_t i = 0; i < n; ++i) basis(i, k) = w[i];
  }
  return basis;
}

/// Blends the basis columns with d_k ∝ 1/dist²(y_k, x̄). Patients that
/// coincide with the AD vector get the capped distance floor 1e-12, which
/// makes them dominate the blend; such patients are flagged.
inline AltWeightSet blend_by_distance(const Matrix& basis, const IpdMatrix& ipd,
                                      const AdVector& ad,
                                      DistanceMetric metric = DistanceMetric::Euclidean) {
  const std::size_t p = ipd.p(), n = ipd.n();
  if (basis.rows() != n || basis.cols() != n)
    throw Error("blend_by_distance: basis must be n x n");

  AltWeightSet out;
  out.basis = basis;
  out.distance_metric = metric;

  SymmetricEigen cov_eig;
  if (metric == DistanceMetric::Mahalanobis)
    cov_eig = eigen_symmetric(sample_covariance(ipd.values));

  Vec dist2(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    Vec diff(p, 0.0);
    for (std::size_t i = 0; i < p; ++i) diff[i] = ipd.values(i, j) - ad.values[i];
    if (metric == DistanceMetric::Euclidean) {
      dist2[j] = dot(diff, diff);
    } else {
      const double lmax = cov_eig.values.front();
      const double cutoff = 1e-10 * std::max(lmax, 1e-300);
      double q = 0.0;
      for (std::size_t k = 0; k < p; ++k) {
        if (cov_eig.values[k] <= cutoff) continue;
        double proj = 0.0;
        for (std::size_t i = 0; i < p; ++i) proj += cov_eig.vectors(i, k) * diff[i];
        q += proj * proj / cov_eig.values[k];
      }
      dist2[j] = q;
    }
    if (dist2[j] < 1e-12) {
      dist2[j] = 1e-12;
      out.floored_distances.push_back(j);
    }
  }

  out.blend.resize(n);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out.blend[j] = 1.0 / dist2[j];
    total += out.blend[j];
  }
  for (double& d : out.blend) d /= total;

  out.final = matvec(basis, out.blend);
  return out;
}

/// Convenience wrapper: basis + blend in one call.
inline AltWeightSet alternative_weights(const IpdMatrix& ipd, const AdVector& ad,
                                        DistanceMetric metric = DistanceMetric::Euclidean,
                                        const HullOptions& opts = {}) {
  std::vector<std::size_t> degenerate;
  const Matrix basis = alt_weight_basis(ipd, ad, &degenerate, opts);
  AltWeightSet out = blend_by_distance(basis, ipd, ad, metric);
  out.degenerate_columns = std::move(degenerate);
  return out;
}

}  // namespace maicfeas
