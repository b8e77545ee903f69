#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>

#include "maicfeas/hull.hpp"

namespace maicfeas {

struct MaicOptions {
  double grad_tol = 1e-9;    // on the infinity norm of grad(Q/n), standardized scale
  double moment_tol = 1e-6;  // on the re-weighted moment residual, standardized scale
  int max_iterations = 500;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double hessian_cond_limit = 1e12;
  std::optional<Vec> start;  // starting beta, standardized scale (defaults to zero)
  HullOptions hull;
};

/// A converged MAIC fit: beta on the original covariate scale, patient weights
/// rescaled to sum to n.
struct MaicFit {
  Vec beta;
  Vec weights;
  double ess = 0.0;
  double ess_fraction = 0.0;
  double moment_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// (Σw)² / Σw², scale-invariant in the weights.
inline double effective_sample_size(const Vec& weights) {
  if (weights.empty()) throw Error("effective_sample_size: empty weights");
  double sum = 0.0, sumsq = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w))
      throw Error("effective_sample_size: weights must be finite and nonnegative");
    sum += w;
    sumsq += w * w;
  }
  if (sumsq == 0.0) throw Error("effective_sample_size: all weights are zero");
  return sum * sum / sumsq;
}

inline double weighted_outcome_mean(const OutcomeVector& outcome, const Vec& weights) {
  if (outcome.n() != weights.size())
    throw Error("weighted_outcome_mean: outcome/weights length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    num += outcome.values[i] * weights[i];
    den += weights[i];
  }
  if (den <= 0.0) throw Error("weighted_outcome_mean: weights sum to zero");
  return num / den;
}

/// Solves the moment condition  Σ y_i exp(y_i'β) / Σ exp(y_i'β) = x̄  by
/// minimizing the convex surrogate Q(β) = Σ exp((y_i − x̄)'β): the first-order
/// condition of Q is exactly the moment condition. Safeguarded Newton with
/// Armijo backtracking, computed on standardized covariates; gradient-descent
/// fallback when the Hessian condition estimate exceeds the limit.
///
/// Refuses Boundary and Infeasible instances outright: the exponential weight
/// family cannot reach them and any "solution" an unguarded optimizer returns
/// there is arbitrary.
inline MaicFit fit_maic(const IpdMatrix& ipd, const AdVector& ad,
                        const MaicOptions& opts = {}) {
  FeasibilityVerdict verdict = check_in_hull(ipd, ad, opts.hull);
  if (verdict.status == HullStatus::Infeasible)
    throw FeasibilityError(
        "fit_maic: AD lies outside the convex hull of the IPD columns; "
        "no reweighting can match it (run `check` for the certificate)",
        std::move(verdict));
  if (verdict.status == HullStatus::Boundary)
    throw FeasibilityError(
        "fit_maic: AD lies on the boundary of the IPD convex hull; matching "
        "would force zero weights, which the exponential weight family cannot "
        "represent",
        std::move(verdict));

  const std::size_t p = ipd.p(), n = ipd.n();
  const detail::RobustScaling scaling = detail::robust_scaling(ipd.values);

  // design on the standardized scale, centered at the AD vector
  Matrix d(p, n);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < n; ++j)
      d(i, j) = (ipd.values(i, j) - ad.values[i]) / scaling.scales[i];

  Vec gamma(p, 0.0);
  if (opts.start) {
    if (opts.start->size() != p) throw Error("fit_maic: start vector has wrong length");
    gamma = *opts.start;
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  Vec u(n, 0.0), grad(p, 0.0);

  const auto evaluate = [&](const Vec& g, Vec& w) {
    double q = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < p; ++i) s += d(i, j) * g[i];
      w[j] = std::exp(s);
      q += w[j];
    }
    return q * inv_n;
  };

  double q = evaluate(gamma, u);
  int iter = 0;
  bool converged = false;
  double grad_inf = 0.0;

  for (; iter < opts.max_iterations; ++iter) {
    double usum = 0.0;
    for (std::size_t j = 0; j < n; ++j) usum += u[j];
    for (std::size_t i = 0; i < p; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += d(i, j) * u[j];
      grad[i] = s * inv_n;
    }
    grad_inf = norm_inf(grad);
    double moment_inf = 0.0;
    for (std::size_t i = 0; i < p; ++i)
      moment_inf = std::max(moment_inf, std::abs(grad[i] * static_cast<double>(n) / usum));
    if (grad_inf <= opts.grad_tol && moment_inf <= opts.moment_tol) {
      converged = true;
      break;
    }

    Matrix h(p, p);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t a = 0; a < p; ++a) {
        const double da = d(a, j) * u[j];
        for (std::size_t b = a; b < p; ++b) h(a, b) += da * d(b, j);
      }
    }
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = a; b < p; ++b) {
        h(a, b) *= inv_n;
        h(b, a) = h(a, b);
      }

    Vec step(p, 0.0);
    bool newton_ok = false;
    const SymmetricEigen eig = eigen_symmetric(h);
    if (eig.values.back() > 0.0 &&
        eig.values.front() / eig.values.back() <= opts.hessian_cond_limit) {
      step = solve_symmetric(eig, grad, opts.hessian_cond_limit);
      for (double& s : step) s = -s;
      newton_ok = true;
    }
    if (!newton_ok) {
      for (std::size_t i = 0; i < p; ++i) step[i] = -grad[i];
    }
    double slope = dot(grad, step);
    if (slope >= 0.0) {  // not a descent direction; fall back to steepest descent
      for (std::size_t i = 0; i < p; ++i) step[i] = -grad[i];
      slope = -dot(grad, grad);
    }

    // once the predicted decrease drops below the rounding floor of Q the
    // Armijo test can no longer certify progress; in that regime the full
    // step is taken as-is and the gradient check decides termination
    if (-slope <= 8.0 * std::numeric_limits<double>::epsilon() * q) {
      for (std::size_t i = 0; i < p; ++i) gamma[i] += step[i];
      q = evaluate(gamma, u);
      continue;
    }

    double t = 1.0;
    Vec trial(p, 0.0), trial_u(n, 0.0);
    for (;;) {
      for (std::size_t i = 0; i < p; ++i) trial[i] = gamma[i] + t * step[i];
      const double qt = evaluate(trial, trial_u);
      if (qt <= q + opts.armijo_c * t * slope) {
        q = qt;
        break;
      }
      t *= opts.backtrack;
      if (t < 1e-18)
        throw ConvergenceError("fit_maic: line search failed to make progress",
                               iter, grad_inf);
    }
    gamma = trial;
    u = trial_u;
  }

  if (!converged)
    throw ConvergenceError("fit_maic: no convergence within " +
                               std::to_string(opts.max_iterations) + " iterations",
                           iter, grad_inf);

  MaicFit fit;
  fit.iterations = iter;
  fit.converged = true;
  fit.beta.resize(p);
  for (std::size_t i = 0; i < p; ++i) fit.beta[i] = gamma[i] / scaling.scales[i];

  // weights from the original-scale linear scores, so every downstream
  // consumer (diagnostics, plots) sees the same ordering bit for bit
  Vec score(n, 0.0);
  double wsum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < p; ++i) s += (ipd.values(i, j) - ad.values[i]) * fit.beta[i];
    score[j] = std::exp(s);
    wsum += score[j];
  }
  fit.weights.resize(n);
  const double rescale = static_cast<double>(n) / wsum;
  for (std::size_t j = 0; j < n; ++j) fit.weights[j] = score[j] * rescale;

  double residual = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += d(i, j) * score[j];
    residual = std::max(residual, std::abs(s / wsum));
  }
  fit.moment_residual = residual;
  fit.ess = effective_sample_size(fit.weights);
  fit.ess_fraction = fit.ess / static_cast<double>(n);
  return fit;
}

/// Steepest-ascent report: MAIC log-weights are an affine function of the
/// projection of y_i − x̄ onto β̃, so the largest weights sit at the extreme
/// IPD points along that direction, not at the points nearest the AD.
struct SteepestAscentDiagnostic {
  bool uniform_weights = false;   // β̃ = 0: no direction exists
  Vec direction;                  // β̃ / ||β̃||
  Vec components;                 // (y_i − x̄)' direction, one per patient
  double rank_correlation = 0.0;  // Spearman(components, log weights); 1 by construction
  std::size_t max_weight_index = 0;
};

inline SteepestAscentDiagnostic steepest_ascent_diagnostic(const MaicFit& fit,
                                                           const IpdMatrix& ipd,
                                                           const AdVector& ad) {
  if (!fit.converged) throw Error("steepest_ascent_diagnostic: fit did not converge");
  if (fit.beta.size() != ipd.p() || fit.weights.size() != ipd.n())
    throw Error("steepest_ascent_diagnostic: fit does not match data");

  SteepestAscentDiagnostic diag;
  const std::size_t p = ipd.p(), n = ipd.n();
  const double nb = norm2(fit.beta);
  diag.max_weight_index = static_cast<std::size_t>(
      std::max_element(fit.weights.begin(), fit.weights.end()) - fit.weights.begin());
  if (nb == 0.0) {
    diag.uniform_weights = true;
    return diag;
  }

  diag.direction.resize(p);
  for (std::size_t i = 0; i < p; ++i) diag.direction[i] = fit.beta[i] / nb;

  diag.components.resize(n);
  Vec logw(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < p; ++i) s += (ipd.values(i, j) - ad.values[i]) * fit.beta[i];
    diag.components[j] = s / nb;
    logw[j] = std::log(fit.weights[j]);
  }
  diag.rank_correlation = spearman(diag.components, logw);
  return diag;
}

}  // namespace maicfeas
