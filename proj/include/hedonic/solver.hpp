#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hedonic/core_model.hpp"
#include "hedonic/lp/revised_simplex.hpp"
#include "hedonic/lp/transportation.hpp"
#include "hedonic/reduction.hpp"
#include "hedonic/surplus.hpp"

namespace hedonic {

/// Optimal coupling plus the certificate that it is optimal.
struct SolveResult {
  Coupling coupling;
  double objective = 0.0;           // sum of mass * surplus over the support
  DualPotentials potentials;        // normalised so that min U = 0
  std::vector<double> z_potential;  // W over Z points; only for the fixed-alpha problem
  double dual_objective = 0.0;      // sum mu U + sum nu V (+ sum alpha W)
  double gap = 0.0;                 // |objective - dual_objective|
  std::size_t iterations = 0;
  bool degenerate = false;          // possible non-unique optimum
  std::string method;
};

enum class HybridMethod { ReduceLift, DirectLp };

inline constexpr std::string_view to_string(HybridMethod m) {
  return m == HybridMethod::ReduceLift ? "reduce_lift" : "direct_lp";
}

inline constexpr double kMassBalanceTol = 1e-9;
inline constexpr double kDustMass = 1e-14;

namespace detail {

inline double weighted_sum(std::span<const double> w, std::span<const double> f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * f[i];
  return acc;
}

inline void check_balance(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  const double sa = std::accumulate(a.weights.begin(), a.weights.end(), 0.0);
  const double sb = std::accumulate(b.weights.begin(), b.weights.end(), 0.0);
  if (std::abs(sa - sb) > kMassBalanceTol)
    throw Error(ErrorCode::InfeasibleMarginals, "marginal masses differ: " + std::to_string(sa) + " vs " +
                                                    std::to_string(sb));
}

/// Shift (U, V[, W]) so that min U = 0; U + V (+ W) is unchanged.
inline void normalise(std::vector<double>& U, std::vector<double>& V) {
  if (U.empty()) return;
  const double lo = *std::min_element(U.begin(), U.end());
  for (auto& u : U) u -= lo;
  for (auto& v : V) v += lo;
}

inline void check_dims(const SurplusModel& s, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                       std::span<const Point> Z) {
  const Dims d = s.dims();
  if (mu.dim() != d.x || nu.dim() != d.y || (!Z.empty() && Z.front().size() != d.z))
    throw Error(ErrorCode::DimensionMismatch, "measure dimensions do not match the surplus");
  if (Z.empty()) throw Error(ErrorCode::EmptyGrid, "Z point set is empty");
}

/// Greedy northwest-corner start on the (i, j[, k]) index box. Each step
/// exhausts the smallest remaining marginal among pointers that can still
/// move, so the cells form a basis of the (rank-reduced) constraint matrix.
inline std::vector<std::array<std::size_t, 3>> northwest_cells(std::vector<std::vector<double>> rem) {
  const std::size_t dims = rem.size();
  std::vector<std::size_t> ptr(dims, 0);
  std::vector<std::array<std::size_t, 3>> cells;
  while (true) {
    double q = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < dims; ++a) q = std::min(q, rem[a][ptr[a]]);
    q = std::max(q, 0.0);
    std::array<std::size_t, 3> cell{0, 0, 0};
    for (std::size_t a = 0; a < dims; ++a) {
      cell[a] = ptr[a];
      rem[a][ptr[a]] -= q;
    }
    cells.push_back(cell);
    std::size_t move = dims;
    for (std::size_t a = 0; a < dims; ++a) {
      if (ptr[a] + 1 == rem[a].size()) continue;
      if (move == dims || rem[a][ptr[a]] < rem[move][ptr[move]]) move = a;
    }
    if (move == dims) break;
    ++ptr[move];
  }
  return cells;
}

/// Builds and solves the explicit LP over gamma_ijk. With alpha empty only the
/// X and Y marginals are imposed. The last Y row (and last Z row) are dropped
/// as they are implied by the others.
inline SolveResult solve_explicit(const SurplusTensor& t, std::span<const double> mu, std::span<const double> nu,
                                  std::span<const double> alpha) {
  const std::size_t nx = t.nx(), ny = t.ny(), nz = t.nz();
  const bool fixed = !alpha.empty();
  lp::StandardFormLp lp;
  lp.rows = nx + (ny - 1) + (fixed ? nz - 1 : 0);
  lp.rhs.assign(lp.rows, 0.0);
  for (std::size_t i = 0; i < nx; ++i) lp.rhs[i] = mu[i];
  for (std::size_t j = 0; j + 1 < ny; ++j) lp.rhs[nx + j] = nu[j];
  if (fixed)
    for (std::size_t k = 0; k + 1 < nz; ++k) lp.rhs[nx + ny - 1 + k] = alpha[k];

  const std::size_t nvar = nx * ny * nz;
  lp.columns.resize(nvar);
  lp.cost.resize(nvar);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t k = 0; k < nz; ++k) {
        const std::size_t v = (i * ny + j) * nz + k;
        auto& col = lp.columns[v].entries;
        col.push_back({i, 1.0});
        if (j + 1 < ny) col.push_back({nx + j, 1.0});
        if (fixed && k + 1 < nz) col.push_back({nx + ny - 1 + k, 1.0});
        lp.cost[v] = t(i, j, k);
      }

  std::vector<std::vector<double>> rem{std::vector<double>(mu.begin(), mu.end()),
                                       std::vector<double>(nu.begin(), nu.end())};
  if (fixed) rem.emplace_back(alpha.begin(), alpha.end());
  std::vector<std::size_t> basis;
  for (const auto& c : northwest_cells(std::move(rem))) basis.push_back((c[0] * ny + c[1]) * nz + c[2]);

  const auto sol = lp::RevisedSimplex(lp).solve(std::move(basis));

  SolveResult res;
  std::vector<CouplingEntry> entries;
  for (std::size_t v = 0; v < nvar; ++v)
    if (sol.x[v] > kDustMass) entries.push_back({{v / (ny * nz), (v / nz) % ny, v % nz}, sol.x[v]});
  res.coupling = Coupling(3, {nx, ny, nz}, std::move(entries));
  res.potentials.U.assign(sol.duals.begin(), sol.duals.begin() + static_cast<std::ptrdiff_t>(nx));
  res.potentials.V.assign(ny, 0.0);
  for (std::size_t j = 0; j + 1 < ny; ++j) res.potentials.V[j] = sol.duals[nx + j];
  if (fixed) {
    res.z_potential.assign(nz, 0.0);
    for (std::size_t k = 0; k + 1 < nz; ++k) res.z_potential[k] = sol.duals[nx + ny - 1 + k];
  }
  normalise(res.potentials.U, res.potentials.V);
  res.iterations = sol.iterations;
  res.degenerate = sol.degenerate_optimum;
  return res;
}

inline void finish(SolveResult& r, std::span<const double> mu, std::span<const double> nu,
                   std::span<const double> alpha = {}) {
  r.dual_objective = weighted_sum(mu, r.potentials.U) + weighted_sum(nu, r.potentials.V);
  if (!alpha.empty()) r.dual_objective += weighted_sum(alpha, r.z_potential);
  r.gap = std::abs(r.objective - r.dual_objective);
}

}  // namespace detail

/// Bipartite transport with a dense reward matrix (maximisation).
inline SolveResult solve_bipartite(const Matrix& reward, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (reward.rows() != mu.size() || reward.cols() != nu.size())
    throw Error(ErrorCode::SizeMismatch, "reward matrix does not match the measures");
  for (double r : reward.data())
    if (!std::isfinite(r)) throw Error(ErrorCode::EvalDomainError, "reward matrix has non-finite entries");
  detail::check_balance(mu, nu);
  validate_measure(mu);
  validate_measure(nu);

  const auto sol = lp::solve_transportation(reward, mu.weights, nu.weights);
  std::vector<CouplingEntry> entries;
  for (auto cell : sol.basis)
    if (sol.flow[cell] > kDustMass) entries.push_back({{cell / nu.size(), cell % nu.size(), 0}, sol.flow[cell]});

  SolveResult res;
  res.method = "bipartite";
  res.coupling = Coupling(2, {mu.size(), nu.size(), 1}, std::move(entries));
  res.potentials = {sol.u, sol.v};
  detail::normalise(res.potentials.U, res.potentials.V);
  res.objective = coupling_objective(res.coupling, reward);
  res.iterations = sol.iterations;
  res.degenerate = sol.degenerate_optimum;
  detail::finish(res, mu.weights, nu.weights);
  return res;
}

/// Stable matching of mu and nu with goods chosen from Z. ReduceLift solves the
/// bipartite problem on sbar and lifts each pair to its selected good;
/// DirectLp runs the simplex on gamma_ijk with only X and Y marginals.
inline SolveResult solve_hybrid(const SurplusModel& s, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                std::span<const Point> Z, HybridMethod method) {
  detail::check_dims(s, mu, nu, Z);
  detail::check_balance(mu, nu);
  validate_measure(mu);
  validate_measure(nu);
  const SurplusTensor t(s, mu.points, nu.points, Z);

  SolveResult res;
  if (method == HybridMethod::ReduceLift) {
    const ReducedSurplus red = reduce(t, Z);
    const SolveResult bip = solve_bipartite(red.value, mu, nu);
    std::vector<CouplingEntry> lifted;
    bool tie_on_support = false;
    for (const auto& e : bip.coupling.entries()) {
      lifted.push_back({{e.i(), e.j(), red.zbar(e.i(), e.j())}, e.mass});
      tie_on_support = tie_on_support || red.tied(e.i(), e.j());
    }
    res.coupling = Coupling(3, {mu.size(), nu.size(), Z.size()}, std::move(lifted));
    res.potentials = bip.potentials;
    res.iterations = bip.iterations;
    res.degenerate = bip.degenerate || tie_on_support;
  } else {
    res = detail::solve_explicit(t, mu.weights, nu.weights, {});
  }
  res.method = std::string(to_string(method));
  res.objective = coupling_objective(res.coupling, s, mu.points, nu.points, Z);
  detail::finish(res, mu.weights, nu.weights);
  return res;
}

/// T(mu, nu, alpha): all three marginals prescribed.
inline SolveResult solve_tripartite_fixed_alpha(const SurplusModel& s, const DiscreteMeasure& mu,
                                                const DiscreteMeasure& nu, const DiscreteMeasure& alpha) {
  detail::check_dims(s, mu, nu, alpha.points);
  detail::check_balance(mu, nu);
  detail::check_balance(mu, alpha);
  validate_measure(mu);
  validate_measure(nu);
  validate_measure(alpha);
  const SurplusTensor t(s, mu.points, nu.points, alpha.points);
  SolveResult res = detail::solve_explicit(t, mu.weights, nu.weights, alpha.weights);
  res.method = "tripartite";
  res.objective = coupling_objective(res.coupling, s, mu.points, nu.points, alpha.points);
  detail::finish(res, mu.weights, nu.weights, alpha.weights);
  return res;
}

struct AlphaResult {
  SolveResult hybrid;           // direct LP over Gamma(mu, nu)
  DiscreteMeasure alpha;        // induced good distribution (Z-marginal)
  SolveResult fixed;            // tripartite solve at that alpha
  double consistency_gap = 0.0; // |hybrid.objective - fixed.objective|
};

/// Maximises T(mu, nu, alpha) over alpha by solving the free-Z problem and
/// confirming the induced alpha reproduces the optimum with alpha pinned.
inline AlphaResult max_over_alpha(const SurplusModel& s, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  std::span<const Point> Z) {
  AlphaResult out;
  out.hybrid = solve_hybrid(s, mu, nu, Z, HybridMethod::DirectLp);
  out.alpha = project(out.hybrid.coupling, Axis::Z, Z);
  // Rescale away rounding so the pinned problem sees exactly balanced masses.
  const double total = std::accumulate(out.alpha.weights.begin(), out.alpha.weights.end(), 0.0);
  const double target = std::accumulate(mu.weights.begin(), mu.weights.end(), 0.0);
  for (auto& w : out.alpha.weights) w *= target / total;
  out.fixed = solve_tripartite_fixed_alpha(s, mu, nu, out.alpha);
  out.consistency_gap = std::abs(out.hybrid.objective - out.fixed.objective);
  return out;
}

// ---------------------------------------------------------------------------
// Exhaustive oracles for equal-weight instances.

struct BruteForceResult {
  double objective = 0.0;
  std::vector<std::size_t> sigma;  // buyer i -> seller sigma[i]
  std::vector<std::size_t> tau;    // buyer i -> good tau[i]
};

inline constexpr std::size_t kBruteBipartiteMax = 7;
inline constexpr std::size_t kBruteTripartiteMax = 5;

namespace detail {

inline void require_equal_weights(const DiscreteMeasure& m, std::size_t n) {
  if (m.size() != n) throw Error(ErrorCode::NotEqualWeight, "brute force needs equally many points on each side");
  for (double w : m.weights)
    if (std::abs(w - 1.0 / static_cast<double>(n)) > 1e-12)
      throw Error(ErrorCode::NotEqualWeight, "brute force needs uniform weights");
}

}  // namespace detail

/// max over permutations sigma of (1/n) sum_i reward(i, sigma(i)).
inline BruteForceResult brute_force_bipartite(const Matrix& reward, const DiscreteMeasure& mu,
                                              const DiscreteMeasure& nu) {
  const std::size_t n = mu.size();
  if (n > kBruteBipartiteMax) throw Error(ErrorCode::TooLarge, "bipartite brute force limited to n <= 7");
  detail::require_equal_weights(mu, n);
  detail::require_equal_weights(nu, n);
  if (reward.rows() != n || reward.cols() != n) throw Error(ErrorCode::SizeMismatch, "reward matrix shape");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  BruteForceResult best;
  best.objective = -std::numeric_limits<double>::infinity();
  do {
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += reward(i, perm[i]);
    v /= static_cast<double>(n);
    if (v > best.objective) {
      best.objective = v;
      best.sigma = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  best.tau.assign(n, 0);
  return best;
}

/// Hybrid oracle: enumerate sigma, pick the best good for each matched pair.
inline BruteForceResult brute_force_hybrid(const SurplusModel& s, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                           std::span<const Point> Z) {
  const std::size_t n = mu.size();
  if (n > kBruteBipartiteMax) throw Error(ErrorCode::TooLarge, "hybrid brute force limited to n <= 7");
  detail::require_equal_weights(mu, n);
  detail::require_equal_weights(nu, n);
  Matrix best_pair(n, n, -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> best_k(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < Z.size(); ++k) {
        const double v = eval(s, mu.points[i], nu.points[j], Z[k]);
        if (v > best_pair(i, j)) {
          best_pair(i, j) = v;
          best_k[i * n + j] = k;
        }
      }
  BruteForceResult r = brute_force_bipartite(best_pair, mu, nu);
  for (std::size_t i = 0; i < n; ++i) r.tau[i] = best_k[i * n + r.sigma[i]];
  return r;
}

/// Three-dimensional assignment: enumerate pairs of permutations (sigma, tau).
/// This is the integral optimum; the LP over Gamma(mu, nu, alpha) can exceed
/// it because that polytope has fractional vertices.
inline BruteForceResult brute_force_tripartite(const SurplusModel& s, const DiscreteMeasure& mu,
                                               const DiscreteMeasure& nu, const DiscreteMeasure& alpha) {
  const std::size_t n = mu.size();
  if (n > kBruteTripartiteMax) throw Error(ErrorCode::TooLarge, "tripartite brute force limited to n <= 5");
  detail::require_equal_weights(mu, n);
  detail::require_equal_weights(nu, n);
  detail::require_equal_weights(alpha, n);
  const SurplusTensor t(s, mu.points, nu.points, alpha.points);
  std::vector<std::size_t> sigma(n), tau(n);
  std::iota(sigma.begin(), sigma.end(), std::size_t{0});
  BruteForceResult best;
  best.objective = -std::numeric_limits<double>::infinity();
  do {
    std::iota(tau.begin(), tau.end(), std::size_t{0});
    do {
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) v += t(i, sigma[i], tau[i]);
      v /= static_cast<double>(n);
      if (v > best.objective) {
        best.objective = v;
        best.sigma = sigma;
        best.tau = tau;
      }
    } while (std::next_permutation(tau.begin(), tau.end()));
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return best;
}

}  // namespace hedonic
