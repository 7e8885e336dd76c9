#pragma once

// Revised primal simplex for  max c'x  s.t.  A x = b, x >= 0, started from a
// caller-supplied feasible basis. A is stored by sparse columns. The basis
// inverse is kept explicitly (the row count is small here) with product-form
// updates and a periodic refactorisation. Entering and leaving variables
// follow Bland's smallest-index rule.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "hedonic/error.hpp"
#include "hedonic/linalg.hpp"

namespace hedonic::lp {

struct SparseColumn {
  std::vector<std::pair<std::size_t, double>> entries;  // (row, coefficient)
};

struct StandardFormLp {
  std::size_t rows = 0;
  std::vector<SparseColumn> columns;
  std::vector<double> cost;
  std::vector<double> rhs;
};

struct SimplexOptions {
  double degeneracy_tol = 1e-9;
  double pivot_tol = 1e-11;
  std::size_t refactor_every = 50;
  std::size_t max_iterations = 5'000'000;
};

struct SimplexSolution {
  std::vector<double> x;             // all variables
  std::vector<std::size_t> basis;    // basic variable per row position
  std::vector<double> duals;         // y' = c_B' B^{-1}
  double objective = 0.0;            // c'x
  double dual_objective = 0.0;       // y'b
  std::size_t iterations = 0;
  bool degenerate_optimum = false;
  double max_reduced_cost = 0.0;
};

class RevisedSimplex {
 public:
  RevisedSimplex(const StandardFormLp& lp, SimplexOptions opt = {}) : lp_(lp), opt_(opt) {
    if (lp_.cost.size() != lp_.columns.size() || lp_.rhs.size() != lp_.rows)
      throw Error(ErrorCode::ShapeMismatch, "inconsistent LP dimensions");
    double cmax = 0.0;
    for (double c : lp_.cost) cmax = std::max(cmax, std::abs(c));
    price_tol_ = 1e-11 * (1.0 + cmax);
  }

  SimplexSolution solve(std::vector<std::size_t> initial_basis) {
    const std::size_t m = lp_.rows;
    if (initial_basis.size() != m) throw Error(ErrorCode::ShapeMismatch, "initial basis has the wrong size");
    basis_ = std::move(initial_basis);
    is_basic_.assign(lp_.columns.size(), 0);
    for (auto v : basis_) is_basic_[v] = 1;
    refactor();
    for (double v : xb_)
      if (v < -1e-9) throw Error(ErrorCode::InfeasibleMarginals, "initial basis is not primal feasible");

    SimplexSolution sol;
    std::vector<double> y(m), d(m);
    std::size_t since_refactor = 0;
    while (true) {
      compute_duals(y);
      std::size_t entering = npos;
      for (std::size_t t = 0; t < lp_.columns.size(); ++t) {
        if (is_basic_[t]) continue;
        if (reduced_cost(t, y) > price_tol_) {
          entering = t;
          break;
        }
      }
      if (entering == npos) break;
      if (++sol.iterations > opt_.max_iterations)
        throw Error(ErrorCode::IterationLimit, "revised simplex exceeded its iteration budget");

      ftran(entering, d);
      std::size_t row = npos;
      double theta = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m; ++r) {
        if (d[r] <= opt_.pivot_tol) continue;
        const double ratio = std::max(0.0, xb_[r]) / d[r];
        if (ratio < theta - 1e-13) {
          theta = ratio;
          row = r;
        } else if (ratio <= theta + 1e-13 && basis_[r] < basis_[row]) {
          row = r;
        }
      }
      if (row == npos) throw Error(ErrorCode::InfeasibleMarginals, "LP is unbounded");

      for (std::size_t r = 0; r < m; ++r) xb_[r] -= theta * d[r];
      xb_[row] = theta;
      update_inverse(row, d);
      is_basic_[basis_[row]] = 0;
      is_basic_[entering] = 1;
      basis_[row] = entering;
      if (++since_refactor >= opt_.refactor_every) {
        refactor();
        since_refactor = 0;
      }
    }

    refactor();
    compute_duals(y);
    sol.basis = basis_;
    sol.duals = y;
    sol.x.assign(lp_.columns.size(), 0.0);
    for (std::size_t r = 0; r < m; ++r) sol.x[basis_[r]] = std::max(0.0, xb_[r]);
    for (std::size_t t = 0; t < lp_.columns.size(); ++t) sol.objective += lp_.cost[t] * sol.x[t];
    for (std::size_t r = 0; r < m; ++r) sol.dual_objective += y[r] * lp_.rhs[r];
    sol.max_reduced_cost = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < lp_.columns.size(); ++t) {
      if (is_basic_[t]) continue;
      const double rc = reduced_cost(t, y);
      sol.max_reduced_cost = std::max(sol.max_reduced_cost, rc);
      if (std::abs(rc) <= opt_.degeneracy_tol) sol.degenerate_optimum = true;
    }
    return sol;
  }

 private:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  double reduced_cost(std::size_t t, const std::vector<double>& y) const {
    double rc = lp_.cost[t];
    for (const auto& [row, coef] : lp_.columns[t].entries) rc -= y[row] * coef;
    return rc;
  }

  void compute_duals(std::vector<double>& y) const {
    const std::size_t m = lp_.rows;
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double cb = lp_.cost[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t r = 0; r < m; ++r) y[r] += cb * binv_(i, r);
    }
  }

  void ftran(std::size_t t, std::vector<double>& d) const {
    std::fill(d.begin(), d.end(), 0.0);
    for (const auto& [row, coef] : lp_.columns[t].entries)
      for (std::size_t r = 0; r < lp_.rows; ++r) d[r] += binv_(r, row) * coef;
  }

  void update_inverse(std::size_t row, const std::vector<double>& d) {
    const std::size_t m = lp_.rows;
    const double piv = d[row];
    for (std::size_t c = 0; c < m; ++c) binv_(row, c) /= piv;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == row || d[r] == 0.0) continue;
      const double f = d[r];
      for (std::size_t c = 0; c < m; ++c) binv_(r, c) -= f * binv_(row, c);
    }
  }

  void refactor() {
    const std::size_t m = lp_.rows;
    Matrix B(m, m);
    for (std::size_t c = 0; c < m; ++c)
      for (const auto& [row, coef] : lp_.columns[basis_[c]].entries) B(row, c) = coef;
    const LuDecomposition lu(B, 1e-12);
    if (lu.singular()) throw Error(ErrorCode::ShapeMismatch, "simplex basis is singular");
    binv_ = lu.inverse();
    xb_ = binv_ * std::span<const double>(lp_.rhs);
  }

  const StandardFormLp& lp_;
  SimplexOptions opt_;
  double price_tol_ = 0.0;
  std::vector<std::size_t> basis_;
  std::vector<char> is_basic_;
  Matrix binv_;
  std::vector<double> xb_;
};

}  // namespace hedonic::lp
