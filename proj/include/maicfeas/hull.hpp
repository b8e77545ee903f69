#pragma once

#include <optional>
#include <string>
#include <utility>

#include "maicfeas/data.hpp"
#include "maicfeas/simplex.hpp"

namespace maicfeas {

enum class HullStatus { Interior, Boundary, Infeasible };

inline const char* to_string(HullStatus s) {
  switch (s) {
    case HullStatus::Interior: return "interior";
    case HullStatus::Boundary: return "boundary";
    case HullStatus::Infeasible: return "infeasible";
  }
  return "?";
}

/// Outcome of the convex-hull membership test. When the AD vector is in the
/// hull, `witness` holds nonnegative patient weights summing to one with
/// Y w = x̄; when it is not, `certificate` holds a direction c (original
/// covariate scale) with c'x̄ strictly greater than every c'y_i.
struct FeasibilityVerdict {
  HullStatus status = HullStatus::Infeasible;
  std::optional<Vec> witness;      // length n
  std::optional<Vec> certificate;  // length p
  double witness_violation = 0.0;  // ||Yw - x̄||_inf in standardized coordinates
  double separation_margin = 0.0;  // c'x̄ - max_i c'y_i when infeasible
  int exit_code = 2;               // 0 feasible / 2 infeasible
};

/// Error carrying the verdict that forbids a downstream computation.
class FeasibilityError : public Error {
 public:
  FeasibilityError(const std::string& what, FeasibilityVerdict v)
      : Error(what), verdict(std::move(v)) {}
  FeasibilityVerdict verdict;
};

struct HullOptions {
  double feasibility_tol = 1e-8;  // on standardized covariates
  double probe_epsilon = 1e-6;    // interiority perturbation, standardized
};

namespace detail {

struct StandardizedProblem {
  Matrix z;   // p x n, rows centered and scaled
  Vec ad_z;   // p
  Vec scales; // per-row divisor used (for mapping certificates back)
};

inline StandardizedProblem standardized_problem(const IpdMatrix& ipd, const AdVector& ad) {
  if (ipd.p() != ad.p())
    throw AlignmentError("hull check: AD/IPD dimension mismatch");
  if (ipd.p() == 0 || ipd.n() == 0) throw Error("hull check: empty input");
  if (!ipd.values.finite() || !all_finite(ad.values))
    throw Error("hull check: non-finite input");

  const RobustScaling s = robust_scaling(ipd.values);
  StandardizedProblem out;
  out.scales = s.scales;
  out.z = Matrix(ipd.p(), ipd.n());
  out.ad_z.resize(ipd.p());
  for (std::size_t i = 0; i < ipd.p(); ++i) {
    for (std::size_t j = 0; j < ipd.n(); ++j)
      out.z(i, j) = (ipd.values(i, j) - s.means[i]) / s.scales[i];
    out.ad_z[i] = (ad.values[i] - s.means[i]) / s.scales[i];
  }
  return out;
}

/// Constraint system of the membership LP: {Z v = target, 1'v = 1, v >= 0}.
inline std::pair<Matrix, Vec> hull_constraints(const Matrix& z, const Vec& target) {
  const std::size_t p = z.rows(), n = z.cols();
  Matrix a(p + 1, n);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = z(i, j);
  for (std::size_t j = 0; j < n; ++j) a(p, j) = 1.0;
  Vec b = target;
  b.push_back(1.0);
  return {std::move(a), std::move(b)};
}

inline bool target_feasible(const Matrix& z, const Vec& target, double feas_tol) {
  auto [a, b] = hull_constraints(z, target);
  lp::SimplexSolver solver(a, b, {.feas_tol = feas_tol});
  return solver.solve_feasibility();
}

inline HullStatus probe_standardized(const Matrix& z, const Vec& ad_z, double eps,
                                     double feas_tol) {
  Vec target = ad_z;
  for (std::size_t j = 0; j < ad_z.size(); ++j) {
    for (double sign : {1.0, -1.0}) {
      target[j] = ad_z[j] + sign * eps;
      if (!target_feasible(z, target, feas_tol)) return HullStatus::Boundary;
    }
    target[j] = ad_z[j];
  }
  return HullStatus::Interior;
}

}  // namespace detail

/// Decides whether the AD vector lies in the convex hull of the IPD columns
/// via a phase-1 simplex on standardized covariates. Feasible verdicts are
/// refined into Interior/Boundary with an axis-perturbation probe.
inline FeasibilityVerdict check_in_hull(const IpdMatrix& ipd, const AdVector& ad,
                                        const HullOptions& opts = {}) {
  const auto prob = detail::standardized_problem(ipd, ad);
  auto [a, b] = detail::hull_constraints(prob.z, prob.ad_z);
  lp::SimplexSolver solver(a, b, {.feas_tol = opts.feasibility_tol});

  FeasibilityVerdict verdict;
  if (!solver.solve_feasibility()) {
    verdict.status = HullStatus::Infeasible;
    verdict.exit_code = 2;
    const Vec dual = solver.farkas_dual();  // (c, gamma) in standardized coords
    Vec cert(ipd.p());
    for (std::size_t i = 0; i < ipd.p(); ++i) cert[i] = dual[i] / prob.scales[i];
    // margin is invariant under the per-row rescaling used above
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ipd.n(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < ipd.p(); ++i) s += cert[i] * ipd.values(i, j);
      best = std::max(best, s);
    }
    verdict.separation_margin = dot(cert, ad.values) - best;
    verdict.certificate = std::move(cert);
    return verdict;
  }

  Vec w = solver.primal_solution();
  Vec residual = matvec(prob.z, w);
  for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= prob.ad_z[i];
  verdict.witness_violation = norm_inf(residual);
  verdict.witness = std::move(w);
  verdict.exit_code = 0;
  verdict.status = detail::probe_standardized(prob.z, prob.ad_z, opts.probe_epsilon,
                                              opts.feasibility_tol);
  return verdict;
}

/// Classifies a feasible AD point as Interior or Boundary by re-testing
/// feasibility at the 2p axis perturbations x̄ ± ε e_j (standardized scale).
inline HullStatus interiority_probe(const IpdMatrix& ipd, const AdVector& ad,
                                    double epsilon = 1e-6) {
  const auto prob = detail::standardized_problem(ipd, ad);
  return detail::probe_standardized(prob.z, prob.ad_z, epsilon, HullOptions{}.feasibility_tol);
}

}  // namespace maicfeas
