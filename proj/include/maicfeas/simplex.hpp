#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>

#include "maicfeas/linalg.hpp"

namespace maicfeas::lp {

struct SimplexOptions {
  double pivot_tol = 1e-9;  // reduced-cost / pivot-element threshold
  double feas_tol = 1e-8;   // phase-1 optimum above this means infeasible
  int max_pivots = 200000;
};

/// Dense-tableau simplex for systems {A x = b, x >= 0}.
///
/// Phase 1 minimizes the sum of artificial variables and decides feasibility
/// exactly, in finitely many pivots: entering and leaving variables are chosen
/// by Bland's anti-cycling rule (lowest eligible index). On an infeasible
/// system the phase-1 duals give a Farkas certificate: a vector y with
/// y'A_j <= 0 for every column j and y'b > 0.
///
/// Phase 2 maximizes a linear objective over the same constraints from the
/// phase-1 basis. The solver is copyable, so one phase-1 solve can seed many
/// phase-2 runs with different objectives.
class SimplexSolver {
 public:
  SimplexSolver(const Matrix& a, const Vec& b, SimplexOptions opts = {})
      : opts_(opts), n_(a.cols()), m_(a.rows()) {
    if (b.size() != m_) throw Error("simplex: A/b dimension mismatch");
    flip_.assign(m_, 1.0);
    basis_.resize(m_);
    tableau_.assign(m_, Vec(n_ + m_ + 1, 0.0));
    for (std::size_t i = 0; i < m_; ++i) {
      // rows with negative rhs are negated so the all-artificial basis is feasible
      const double s = (b[i] < 0.0) ? -1.0 : 1.0;
      flip_[i] = s;
      for (std::size_t j = 0; j < n_; ++j) tableau_[i][j] = s * a(i, j);
      tableau_[i][n_ + i] = 1.0;
      tableau_[i].back() = s * b[i];
      basis_[i] = n_ + i;
    }
  }

  /// Runs phase 1. Returns true when {A x = b, x >= 0} is feasible.
  bool solve_feasibility() {
    cost_.assign(n_ + m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) cost_[n_ + i] = 1.0;
    recompute_reduced_costs();
    // artificials stay eligible to re-enter: pinning them at zero once they
    // leave can leave the objective far above the true inconsistency measure
    // when rows are nearly dependent, flipping the feasibility verdict
    run_simplex(n_ + m_);
    recompute_reduced_costs();  // the Farkas duals read off reduced_
    infeasibility_ = objective();
    feasible_ = infeasibility_ <= opts_.feas_tol;
    phase1_done_ = true;
    return feasible_;
  }

  double infeasibility() const { return infeasibility_; }
  bool feasible() const { return feasible_; }
  int pivots() const { return pivots_; }

  /// Current basic solution restricted to the original variables.
  Vec primal_solution() const {
    Vec x(n_, 0.0);
    for (std::size_t i = 0; i < rows(); ++i) {
      if (basis_[i] < n_) x[basis_[i]] = std::max(0.0, tableau_[i].back());
    }
    return x;
  }

  /// Farkas certificate of infeasibility (valid after a failed phase 1):
  /// the phase-1 duals, un-flipped back to the caller's row signs.
  Vec farkas_dual() const {
    if (!phase1_done_ || feasible_)
      throw Error("simplex: Farkas certificate requested on a feasible system");
    Vec y(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) y[i] = flip_[i] * (1.0 - reduced_[n_ + i]);
    return y;
  }

  /// Pivots artificial variables out of the basis and erases redundant rows,
  /// leaving a purely original basis ready for phase 2.
  void prepare_phase2() {
    if (!feasible_) throw Error("simplex: phase 2 on an infeasible system");
    for (std::size_t i = 0; i < rows();) {
      if (basis_[i] < n_) {
        ++i;
        continue;
      }
      std::size_t enter = n_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (is_basic(j)) continue;
        if (std::abs(tableau_[i][j]) > opts_.pivot_tol) {
          enter = j;
          break;
        }
      }
      if (enter < n_) {
        pivot(i, enter);
        ++i;
      } else {
        // the row is a linear combination of the others; drop it
        tableau_.erase(tableau_.begin() + static_cast<std::ptrdiff_t>(i));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
        flip_.erase(flip_.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
  }

  /// Phase 2: maximizes c'x from the current basic feasible solution.
  double maximize(const Vec& c) {
    if (c.size() != n_) throw Error("simplex: objective dimension mismatch");
    for (std::size_t i = 0; i < rows(); ++i) {
      if (basis_[i] >= n_)
        throw Error("simplex: call prepare_phase2 before maximize");
    }
    cost_.assign(n_ + m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) cost_[j] = -c[j];
    recompute_reduced_costs();
    run_simplex(n_);  // artificial columns are off limits in phase 2
    return -objective();
  }

 private:
  std::size_t rows() const { return tableau_.size(); }

  bool is_basic(std::size_t j) const {
    return std::find(basis_.begin(), basis_.end(), j) != basis_.end();
  }

  double objective() const {
    double obj = 0.0;
    for (std::size_t i = 0; i < rows(); ++i)
      obj += cost_[basis_[i]] * tableau_[i].back();
    return obj;
  }

  void recompute_reduced_costs() {
    const std::size_t w = n_ + m_;
    reduced_.assign(w, 0.0);
    for (std::size_t j = 0; j < w; ++j) {
      double z = 0.0;
      for (std::size_t i = 0; i < rows(); ++i)
        z += cost_[basis_[i]] * tableau_[i][j];
      reduced_[j] = cost_[j] - z;
    }
  }

  void pivot(std::size_t pr, std::size_t pc) {
    Vec& prow = tableau_[pr];
    const double inv = 1.0 / prow[pc];
    for (double& v : prow) v *= inv;
    prow[pc] = 1.0;
    for (std::size_t i = 0; i < rows(); ++i) {
      if (i == pr) continue;
      Vec& row = tableau_[i];
      const double f = row[pc];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_ + m_; ++j) row[j] -= f * prow[j];
      row[pc] = 0.0;
    }
    const double rf = reduced_[pc];
    if (rf != 0.0) {
      for (std::size_t j = 0; j < n_ + m_; ++j) reduced_[j] -= rf * prow[j];
    }
    reduced_[pc] = 0.0;
    basis_[pr] = pc;
    ++pivots_;
    if (pivots_ % 64 == 0) recompute_reduced_costs();
  }

  /// Bland's rule: entering variable is the lowest-index eligible column with
  /// a negative reduced cost; leaving row is the ratio-test minimizer, ties
  /// broken by the lowest basic variable index.
  void run_simplex(std::size_t eligible_cols) {
    const int start_pivots = pivots_;
    for (;;) {
      if (pivots_ - start_pivots > opts_.max_pivots)
        throw Error("simplex: pivot limit exceeded");
      std::size_t enter = eligible_cols;
      std::size_t leave = rows();
      for (std::size_t j = 0; j < eligible_cols; ++j) {
        if (reduced_[j] >= -opts_.pivot_tol) continue;
        double best_ratio = std::numeric_limits<double>::infinity();
        std::size_t best_row = rows();
        double col_max = 0.0;
        for (std::size_t i = 0; i < rows(); ++i) {
          const double e = tableau_[i][j];
          col_max = std::max(col_max, e);
          if (e <= opts_.pivot_tol) continue;
          const double ratio = tableau_[i].back() / e;
          if (ratio < best_ratio ||
              (ratio == best_ratio && best_row < rows() &&
               basis_[i] < basis_[best_row])) {
            best_ratio = ratio;
            best_row = i;
          }
        }
        if (best_row == rows()) {
          if (col_max <= 0.0)
            throw Error("simplex: unbounded objective over the feasible polytope");
          continue;  // only tolerance-level positive entries; skip this column
        }
        enter = j;
        leave = best_row;
        break;
      }
      if (enter == eligible_cols) return;  // optimal
      pivot(leave, enter);
    }
  }

  SimplexOptions opts_;
  std::size_t n_;  // original variables
  std::size_t m_;  // constraints as built (rows may be erased later)
  std::vector<Vec> tableau_;
  std::vector<std::size_t> basis_;
  Vec flip_;
  Vec cost_;
  Vec reduced_;
  double infeasibility_ = std::numeric_limits<double>::infinity();
  bool feasible_ = false;
  bool phase1_done_ = false;
  int pivots_ = 0;
};

}  // namespace maicfeas::lp
