#pragma once

// Primal simplex on the transportation polytope
//   max sum_ij r_ij g_ij  s.t.  sum_j g_ij = a_i, sum_i g_ij = b_j, g >= 0.
// The basis is a spanning tree of the bipartite row/column graph with
// m + n - 1 cells (degenerate zero-flow cells included). Pivoting follows
// Bland's rule with cells ordered row-major.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <span>
#include <vector>

#include "hedonic/error.hpp"
#include "hedonic/linalg.hpp"

namespace hedonic::lp {

struct TransportSolution {
  std::vector<double> flow;          // dense, row-major m * n
  std::vector<std::size_t> basis;    // basic cell indices
  std::vector<double> u, v;          // u_i + v_j = r_ij on the basis
  std::size_t iterations = 0;
  bool degenerate_optimum = false;   // some nonbasic reduced cost within degeneracy_tol of 0
  double max_reduced_cost = 0.0;     // at termination; <= 0 up to pricing tolerance
};

struct TransportOptions {
  double degeneracy_tol = 1e-9;
  std::size_t max_iterations = 1'000'000;
};

namespace detail {

/// Northwest-corner rule. When a row and column are exhausted together only
/// the row pointer moves, so the next cell enters the basis at zero flow.
inline void northwest_corner(std::span<const double> a_in, std::span<const double> b_in, std::vector<double>& flow,
                             std::vector<std::size_t>& basis) {
  const std::size_t m = a_in.size(), n = b_in.size();
  std::vector<double> a(a_in.begin(), a_in.end()), b(b_in.begin(), b_in.end());
  std::size_t i = 0, j = 0;
  while (true) {
    const double q = std::max(0.0, std::min(a[i], b[j]));
    flow[i * n + j] = q;
    basis.push_back(i * n + j);
    a[i] -= q;
    b[j] -= q;
    if (i + 1 == m && j + 1 == n) break;
    if (i + 1 == m) ++j;
    else if (j + 1 == n) ++i;
    else if (a[i] <= b[j]) ++i;
    else ++j;
  }
}

}  // namespace detail

class TransportationSimplex {
 public:
  TransportationSimplex(const Matrix& reward, std::span<const double> supply, std::span<const double> demand,
                        TransportOptions opt = {})
      : r_(reward), a_(supply.begin(), supply.end()), b_(demand.begin(), demand.end()), opt_(opt) {
    if (r_.rows() != a_.size() || r_.cols() != b_.size())
      throw Error(ErrorCode::SizeMismatch, "reward matrix does not match marginals");
    if (a_.empty() || b_.empty()) throw Error(ErrorCode::EmptyMeasure, "transportation problem with no agents");
    m_ = a_.size();
    n_ = b_.size();
    price_tol_ = 1e-11 * (1.0 + r_.max_abs());
  }

  TransportSolution solve() {
    TransportSolution sol;
    sol.flow.assign(m_ * n_, 0.0);
    detail::northwest_corner(a_, b_, sol.flow, sol.basis);
    std::vector<char> basic(m_ * n_, 0);
    for (auto c : sol.basis) basic[c] = 1;

    while (true) {
      build_tree(sol.basis);
      compute_duals(sol);
      std::size_t entering = npos;
      for (std::size_t c = 0; c < m_ * n_; ++c) {
        if (basic[c]) continue;
        if (r_(c / n_, c % n_) - sol.u[c / n_] - sol.v[c % n_] > price_tol_) {
          entering = c;
          break;
        }
      }
      if (entering == npos) break;
      if (++sol.iterations > opt_.max_iterations)
        throw Error(ErrorCode::IterationLimit, "transportation simplex exceeded its iteration budget");
      pivot(sol, basic, entering);
    }

    recompute_flows(sol);
    sol.max_reduced_cost = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < m_ * n_; ++c) {
      if (basic[c]) continue;
      const double rc = r_(c / n_, c % n_) - sol.u[c / n_] - sol.v[c % n_];
      sol.max_reduced_cost = std::max(sol.max_reduced_cost, rc);
      if (std::abs(rc) <= opt_.degeneracy_tol) sol.degenerate_optimum = true;
    }
    return sol;
  }

 private:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  // Tree nodes: rows 0..m-1, columns m..m+n-1. Each adjacency entry stores
  // (neighbour node, cell index).
  void build_tree(const std::vector<std::size_t>& basis) {
    adj_.assign(m_ + n_, {});
    for (auto c : basis) {
      const std::size_t i = c / n_, j = c % n_;
      adj_[i].push_back({m_ + j, c});
      adj_[m_ + j].push_back({i, c});
    }
  }

  void compute_duals(TransportSolution& sol) const {
    sol.u.assign(m_, 0.0);
    sol.v.assign(n_, 0.0);
    std::vector<char> seen(m_ + n_, 0);
    std::deque<std::size_t> queue{0};
    seen[0] = 1;
    while (!queue.empty()) {
      const std::size_t node = queue.front();
      queue.pop_front();
      for (const auto& [next, cell] : adj_[node]) {
        if (seen[next]) continue;
        seen[next] = 1;
        const std::size_t i = cell / n_, j = cell % n_;
        if (next >= m_) sol.v[j] = r_(i, j) - sol.u[i];
        else sol.u[i] = r_(i, j) - sol.v[j];
        queue.push_back(next);
      }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
      throw Error(ErrorCode::IterationLimit, "transportation basis is not a spanning tree");
  }

  /// Cells on the tree path from column node of the entering cell back to its row node.
  std::vector<std::size_t> tree_path(std::size_t from, std::size_t to) const {
    std::vector<std::size_t> parent_node(m_ + n_, npos), parent_cell(m_ + n_, npos);
    std::deque<std::size_t> queue{from};
    parent_node[from] = from;
    while (!queue.empty()) {
      const std::size_t node = queue.front();
      queue.pop_front();
      if (node == to) break;
      for (const auto& [next, cell] : adj_[node]) {
        if (parent_node[next] != npos) continue;
        parent_node[next] = node;
        parent_cell[next] = cell;
        queue.push_back(next);
      }
    }
    std::vector<std::size_t> cells;
    for (std::size_t node = to; node != from; node = parent_node[node]) cells.push_back(parent_cell[node]);
    std::reverse(cells.begin(), cells.end());
    return cells;
  }

  void pivot(TransportSolution& sol, std::vector<char>& basic, std::size_t entering) {
    const std::size_t i = entering / n_, j = entering % n_;
    // The cycle leaves column j along the path, alternating -, +, -, ...
    const auto path = tree_path(m_ + j, i);
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < path.size(); p += 2) theta = std::min(theta, sol.flow[path[p]]);
    std::size_t leaving = npos;
    for (std::size_t p = 0; p < path.size(); p += 2)
      if (sol.flow[path[p]] <= theta + 1e-15 && path[p] < leaving) leaving = path[p];

    sol.flow[entering] += theta;
    for (std::size_t p = 0; p < path.size(); ++p) sol.flow[path[p]] += (p % 2 == 0) ? -theta : theta;
    sol.flow[leaving] = 0.0;
    basic[leaving] = 0;
    basic[entering] = 1;
    *std::find(sol.basis.begin(), sol.basis.end(), leaving) = entering;
  }

  /// Re-derives basic flows from the marginals by peeling tree leaves, which
  /// removes drift accumulated over many +/- theta updates.
  void recompute_flows(TransportSolution& sol) const {
    std::vector<double> rem(m_ + n_);
    for (std::size_t i = 0; i < m_; ++i) rem[i] = a_[i];
    for (std::size_t j = 0; j < n_; ++j) rem[m_ + j] = b_[j];
    std::vector<std::size_t> degree(m_ + n_, 0);
    for (std::size_t node = 0; node < m_ + n_; ++node) degree[node] = adj_[node].size();
    std::vector<char> done(m_ * n_, 0);
    std::fill(sol.flow.begin(), sol.flow.end(), 0.0);
    std::deque<std::size_t> leaves;
    for (std::size_t node = 0; node < m_ + n_; ++node)
      if (degree[node] == 1) leaves.push_back(node);
    while (!leaves.empty()) {
      const std::size_t node = leaves.front();
      leaves.pop_front();
      if (degree[node] != 1) continue;
      for (const auto& [other, cell] : adj_[node]) {
        if (done[cell]) continue;
        done[cell] = 1;
        const double f = std::max(0.0, rem[node]);
        sol.flow[cell] = f;
        rem[node] -= f;
        rem[other] -= f;
        --degree[node];
        if (--degree[other] == 1) leaves.push_back(other);
        break;
      }
    }
  }

  Matrix r_;
  std::vector<double> a_, b_;
  TransportOptions opt_;
  std::size_t m_ = 0, n_ = 0;
  double price_tol_ = 0.0;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj_;
};

inline TransportSolution solve_transportation(const Matrix& reward, std::span<const double> supply,
                                              std::span<const double> demand, TransportOptions opt = {}) {
  return TransportationSimplex(reward, supply, demand, opt).solve();
}

}  // namespace hedonic::lp
