#pragma once

// Builders for the worked examples and the checks run against each one.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "hedonic/hedonic.hpp"
#include "hedonic/io.hpp"

namespace hedonic::reproduce {

using json = nlohmann::json;

inline constexpr std::string_view kExampleIds[] = {"counterexample",   "bilinear-tss",      "bilinear-tzss-family",
                                                   "supermodular-1d",  "strictly-hedonic",  "expcos-signature",
                                                   "hedonic-pointmass-alpha"};

struct Options {
  double a = 0.5;                 // bilinear-tzss-family parameter
  std::uint64_t seed = 20240601;  // random sample points
  double tol = kStabilityTol;
  double grad_tol = kGradTolRel;
};

struct Assertion {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Outcome {
  std::string id;
  std::vector<Assertion> assertions;
  json report = json::object();

  bool all_pass() const {
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
  }
  void check(std::string name, bool pass, std::string detail = {}) {
    assertions.push_back({std::move(name), pass, std::move(detail)});
  }
};

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared instances

/// One-dimensional grids with step 1/16: X = [0.5,1], Y = [0,0.5], Z = [0,1].
struct CounterexampleInstance {
  SurplusModel s;
  std::vector<Point> X, Y, Z;
  DiscreteMeasure mu, nu;
  Coupling plane;            // uniform on all (i,j) with z = x - y
  DualPotentials analytic;   // U = x^2/2, V = y^2/2
  Coupling comonotone;       // sigma(i) = i
  Coupling anticomonotone;   // sigma(i) = n-1-i
};

inline CounterexampleInstance counterexample_instance(double a = 0.5) {
  CounterexampleInstance c{make_counterexample(a),
                           grid_1d(0.5, 1.0, 9).points(),
                           grid_1d(0.0, 0.5, 9).points(),
                           grid_1d(0.0, 1.0, 17).points(),
                           {},
                           {},
                           {},
                           {},
                           {},
                           {}};
  c.mu = uniform_measure(c.X);
  c.nu = uniform_measure(c.Y);
  // x_i - y_j = (8 + i - j)/16, which is Z index 8 + i - j.
  std::vector<CouplingEntry> plane, co, anti;
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = 0; j < 9; ++j) plane.push_back({{i, j, 8 + i - j}, 1.0 / 81.0});
    co.push_back({{i, i, 8}, 1.0 / 9.0});
    anti.push_back({{i, 8 - i, 2 * i}, 1.0 / 9.0});
  }
  c.plane = Coupling(3, {9, 9, 17}, std::move(plane));
  c.comonotone = Coupling(3, {9, 9, 17}, std::move(co));
  c.anticomonotone = Coupling(3, {9, 9, 17}, std::move(anti));
  for (const auto& x : c.X) c.analytic.U.push_back(x[0] * x[0] / 2);
  for (const auto& y : c.Y) c.analytic.V.push_back(y[0] * y[0] / 2);
  return c;
}

/// Sum mu x^2/2 + sum nu y^2/2 on the counterexample grids.
inline double counterexample_value(const CounterexampleInstance& c) {
  double v = 0.0;
  for (std::size_t i = 0; i < c.X.size(); ++i) v += c.mu.weights[i] * c.analytic.U[i];
  for (std::size_t j = 0; j < c.Y.size(); ++j) v += c.nu.weights[j] * c.analytic.V[j];
  return v;
}

/// Equilibrium seller payoff for a = 1 on the same grids: the matching is
/// y = x - 1/2 with good z = 1/4, and V' = (x + y)/2 along it.
inline std::vector<double> counterexample_a1_dual(std::span<const Point> Y) {
  std::vector<double> V;
  for (const auto& y : Y) V.push_back(y[0] * y[0] / 2 + y[0] / 4);
  return V;
}

/// u = x z, v = yz - z^2/2 so the best good is z = x + y.
inline SurplusModel strictly_hedonic_example() {
  return SurplusModel(StrictlyHedonic{Matrix{{0.0, 0.0}, {0.0, 1.0}}, Matrix{{0.0, 0.0, -0.5}, {0.0, 1.0, 0.0}}});
}

inline std::vector<Point> random_points(std::mt19937_64& rng, std::size_t n, std::size_t d, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<Point> out(n, Point(d));
  for (auto& p : out)
    for (auto& v : p) v = dist(rng);
  return out;
}

// ---------------------------------------------------------------------------
// Examples

inline Outcome run_counterexample(const Options& opt) {
  Outcome out{"counterexample", {}, json::object()};
  const auto c = counterexample_instance(0.5);

  const auto stab = verify_stability(c.s, c.X, c.Y, c.Z, c.plane, c.analytic, opt.tol);
  out.check("plane coupling is stable with U=x^2/2, V=y^2/2", stab.stable && stab.max_support_residual <= 1e-12,
            "grid residual " + fmt(stab.max_grid_residual) + ", support residual " + fmt(stab.max_support_residual));
  check_marginals(c.plane, c.mu, c.nu, nullptr, 1e-12);
  out.check("plane coupling has the prescribed marginals", true);

  const auto purity = check_purity(c.plane);
  out.check("plane coupling is not pure", !purity.pure && !purity.buyer_seller_pure,
            "max y fan-out " + std::to_string(*std::max_element(purity.y_fanout.begin(), purity.y_fanout.end())));

  const auto prices = compute_prices(c.s, c.X, c.Y, c.Z, c.plane, c.analytic);
  double price_err = 0.0;
  for (const auto& r : prices.rows) price_err = std::max(price_err, std::abs(r.price_buyer - c.X[r.i][0] * c.X[r.i][0] / 2));
  out.check("prices on the support equal x^2/2", price_err <= 1e-10 && prices.max_discrepancy <= 1e-10,
            "max error " + fmt(price_err));

  const double co = coupling_objective(c.comonotone, c.s, c.X, c.Y, c.Z);
  const double anti = coupling_objective(c.anticomonotone, c.s, c.X, c.Y, c.Z);
  const bool both_stable = verify_stability(c.s, c.X, c.Y, c.Z, c.comonotone, c.analytic, opt.tol).stable &&
                           verify_stability(c.s, c.X, c.Y, c.Z, c.anticomonotone, c.analytic, opt.tol).stable;
  out.check("comonotone and anticomonotone lifts tie and are both stable",
            std::abs(co - anti) <= 1e-12 && both_stable && !(c.comonotone == c.anticomonotone),
            "objectives " + fmt(co) + " and " + fmt(anti));

  const auto res = solve_hybrid(c.s, c.mu, c.nu, c.Z, HybridMethod::ReduceLift);
  const double analytic = counterexample_value(c);
  out.check("solver optimum equals sum mu x^2/2 + sum nu y^2/2", std::abs(res.objective - analytic) <= 1e-9,
            "solver " + fmt(res.objective) + ", analytic " + fmt(analytic));
  out.check("solver flags a degenerate optimum", res.degenerate);

  const auto tz = check_tzss_bilinear(Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{-1.0}}, Matrix{{-0.5}});
  out.check("TzSS-bilinear fails with criterion 0", tz.verdict == Verdict::Fails && tz.criterion_value == 0.0);

  const Point x0{0.5};
  const auto audit = sample_splitting_sets(c.s, std::span<const Point>(&x0, 1), c.Y, c.Z, c.analytic.V, opt.tol,
                                           opt.grad_tol);
  out.check("splitting set at x=0.5 has a shared-gradient cluster",
            audit.report.verdict == Verdict::Fails && audit.samples[0].largest_cluster >= 3,
            "largest cluster " + std::to_string(audit.samples[0].largest_cluster));

  const auto sig = signature(c.s, {0.75}, {0.25}, {0.5});
  out.check("signature is (2,1,0) with bound 2",
            sig.lambda_plus == 2 && sig.lambda_minus == 1 && sig.lambda_zero == 0 && sig.dimension_bound == 2);
  const auto dim = support_dimension(c.s, c.X, c.Y, c.Z, c.plane, 0.2);
  out.check("plane support looks two-dimensional", dim.estimate == 2 && dim.bound.dimension_bound == 2,
            "mean local dimension " + fmt(dim.mean_local_dimension));

  out.report = {{"stability", io::to_json(stab)},     {"purity", io::to_json(purity)},
                {"prices", io::to_json(prices)},      {"tzss_bilinear", io::to_json(tz)},
                {"tzss_sampled", io::to_json(audit.report)}, {"signature", io::to_json(sig)},
                {"support_dimension", io::to_json(dim)},     {"solve", io::to_json(res)}};
  return out;
}

inline Outcome run_bilinear_tss(const Options& opt) {
  Outcome out{"bilinear-tss", {}, json::object()};
  const Matrix I = Matrix::identity(2);
  const auto tss = check_tss_bilinear(I, I, I);
  out.check("TSS holds for A=B=C=I", tss.verdict == Verdict::Holds, "min eigenvalue " + fmt(*tss.criterion_value));
  const auto tss_neg = check_tss_bilinear(I, I, -1.0 * I);
  out.check("TSS fails for C=-I", tss_neg.verdict == Verdict::Fails && tss_neg.witness.has_value());
  const auto tss_sing = check_tss_bilinear(Matrix(2, 2), I, I);
  out.check("TSS is inconclusive for singular A", tss_sing.verdict == Verdict::Inconclusive);

  // s = x.y + x.z + y.z - |z|^2: best good (x + y)/2 lies on the Z grid.
  const SurplusModel s = make_bilinear(I, I, I, -1.0 * I);
  const auto tz = check_tzss_bilinear(I, I, I, -1.0 * I);
  out.check("TzSS holds for the same blocks with D=-I", tz.verdict == Verdict::Holds);

  std::mt19937_64 rng(opt.seed);
  const auto X = random_points(rng, 6, 2, 0.0, 1.0);
  const auto Y = random_points(rng, 6, 2, 0.0, 1.0);
  const auto Z = GridSpec{{GridAxis{0.0, 1.0, 9}, GridAxis{0.0, 1.0, 9}}}.points();
  const auto mu = uniform_measure(X), nu = uniform_measure(Y);
  const auto rl = solve_hybrid(s, mu, nu, Z, HybridMethod::ReduceLift);
  const auto dl = solve_hybrid(s, mu, nu, Z, HybridMethod::DirectLp);
  out.check("reduce_lift and direct_lp agree", std::abs(rl.objective - dl.objective) <= 1e-9,
            fmt(rl.objective) + " vs " + fmt(dl.objective));
  const auto bf = brute_force_hybrid(s, mu, nu, Z);
  out.check("solver matches brute force", std::abs(rl.objective - bf.objective) <= 1e-9);
  const auto stab = verify_stability(s, X, Y, Z, rl.coupling, rl.potentials, opt.tol);
  out.check("solution is stable with zero gap", stab.stable && rl.gap <= 1e-9, "gap " + fmt(rl.gap));
  const auto purity = check_purity(rl.coupling);
  out.check("lifted vertex is pure (or the optimum is flagged degenerate)", purity.pure || rl.degenerate);
  out.report = {{"tss", io::to_json(tss)}, {"tzss", io::to_json(tz)},       {"stability", io::to_json(stab)},
                {"purity", io::to_json(purity)}, {"solve", io::to_json(rl)}};
  return out;
}

inline Outcome run_bilinear_tzss_family(const Options& opt) {
  Outcome out{"bilinear-tzss-family", {}, json::object()};
  const double a = opt.a;
  const auto c = counterexample_instance(a);
  const auto parts = *bilinear_parts(c.s);
  const auto tz = check_tzss_bilinear(parts.A, parts.B, parts.C, parts.D);
  const double expected = 1.0 - 2.0 * a;
  out.check("criterion equals 1 - 2a", tz.criterion_value && *tz.criterion_value == expected,
            "criterion " + fmt(tz.criterion_value.value_or(std::nan(""))) + ", expected " + fmt(expected));
  const Verdict want = a <= 0.0 ? Verdict::Fails : (expected == 0.0 ? Verdict::Fails : Verdict::Holds);
  out.check(std::string("TzSS verdict is ") + std::string(to_string(want)), tz.verdict == want);

  const auto rl = solve_hybrid(c.s, c.mu, c.nu, c.Z, HybridMethod::ReduceLift);
  const auto dl = solve_hybrid(c.s, c.mu, c.nu, c.Z, HybridMethod::DirectLp);
  out.check("reduce_lift and direct_lp agree", std::abs(rl.objective - dl.objective) <= 1e-9);
  const auto stab = verify_stability(c.s, c.X, c.Y, c.Z, rl.coupling, rl.potentials, opt.tol);
  out.check("solution is stable with zero gap", stab.stable && rl.gap <= 1e-9 && dl.gap <= 1e-9);
  out.report = {{"tzss_bilinear", io::to_json(tz)}, {"stability", io::to_json(stab)}, {"solve", io::to_json(rl)}};

  if (a == 0.5) {
    const Point x0{0.5};
    const auto audit = sample_splitting_sets(c.s, std::span<const Point>(&x0, 1), c.Y, c.Z, c.analytic.V, opt.tol,
                                             opt.grad_tol);
    out.check("sampled TzSS fails at x=0.5 with V=y^2/2",
              audit.report.verdict == Verdict::Fails && audit.samples[0].largest_cluster >= 3);
    out.report["tzss_sampled"] = io::to_json(audit.report);
  } else if (a == 1.0) {
    const auto V = counterexample_a1_dual(c.Y);
    const auto audit = sample_splitting_sets(c.s, c.X, c.Y, c.Z, V, opt.tol, opt.grad_tol);
    std::size_t largest = 0;
    for (const auto& smp : audit.samples) largest = std::max(largest, smp.largest_cluster);
    out.check("sampled TzSS holds with the equilibrium V", audit.report.verdict == Verdict::Holds && largest == 1);
    out.report["tzss_sampled"] = io::to_json(audit.report);
  }
  return out;
}

inline Outcome run_supermodular_1d(const Options& opt) {
  Outcome out{"supermodular-1d", {}, json::object()};
  const SurplusModel s = make_monomials({{1.0, 1, 1, 1}});
  const auto Z = grid_1d(0.0, 1.0, 5).points();

  std::mt19937_64 rng(opt.seed);
  const auto Xs = random_points(rng, 6, 1, 0.05, 1.0);
  const auto Ys = random_points(rng, 6, 1, 0.05, 1.0);
  const auto mu6 = uniform_measure(Xs), nu6 = uniform_measure(Ys);
  const auto res = solve_hybrid(s, mu6, nu6, Z, HybridMethod::ReduceLift);
  const auto bf = brute_force_hybrid(s, mu6, nu6, Z);
  out.check("solver matches brute force", std::abs(res.objective - bf.objective) <= 1e-9,
            fmt(res.objective) + " vs " + fmt(bf.objective));
  bool comonotone = true;
  for (const auto& e1 : res.coupling.entries())
    for (const auto& e2 : res.coupling.entries())
      if (Xs[e1.i()][0] < Xs[e2.i()][0] && Ys[e1.j()][0] > Ys[e2.j()][0]) comonotone = false;
  out.check("matching is comonotone", comonotone);

  const auto sig = signature(s, {1.0}, {1.0}, {1.0});
  const bool eig_ok = std::abs(sig.eigenvalues[0] + 1) <= 1e-10 && std::abs(sig.eigenvalues[1] + 1) <= 1e-10 &&
                      std::abs(sig.eigenvalues[2] - 2) <= 1e-10;
  out.check("signature at (1,1,1) is (1,2,0) with bound 1", eig_ok && sig.lambda_plus == 1 &&
                                                                 sig.lambda_minus == 2 && sig.dimension_bound == 1);
  const std::array<double, 3> pts[] = {{0.3, 0.7, 0.9}, {1.0, 1.0, 1.0}, {0.9, 0.2, 0.4}};
  const auto compat = check_compatibility_1d(s, pts);
  out.check("compatibility holds", compat.verdict == Verdict::Holds);

  // A longer pure matching: support on the curve (x, x^2, 1).
  std::vector<Point> X, Y;
  for (std::size_t i = 0; i < 16; ++i) {
    const double t = 0.25 + 0.05 * static_cast<double>(i);
    X.push_back({t});
    Y.push_back({t * t});
  }
  const auto big = solve_hybrid(s, uniform_measure(X), uniform_measure(Y), Z, HybridMethod::ReduceLift);
  const auto purity = check_purity(big.coupling);
  const auto dim = support_dimension(s, X, Y, Z, big.coupling, 0.12);
  out.check("16-point matching is pure", purity.pure);
  out.check("support looks one-dimensional, bound 1", dim.estimate == 1 && dim.bound.dimension_bound == 1,
            "mean local dimension " + fmt(dim.mean_local_dimension));
  out.report = {{"signature", io::to_json(sig)},   {"compatibility", io::to_json(compat)},
                {"purity", io::to_json(purity)},   {"support_dimension", io::to_json(dim)},
                {"solve", io::to_json(res)}};
  return out;
}

inline Outcome run_strictly_hedonic(const Options& opt) {
  Outcome out{"strictly-hedonic", {}, json::object()};
  const SurplusModel s = strictly_hedonic_example();
  const auto X = grid_1d(0.0625, 0.5, 8).points();
  const auto Y = grid_1d(0.0625, 0.5, 8).points();
  const auto Z = grid_1d(0.0, 1.25, 21).points();  // step 1/16, x + y is always interior
  const auto tw = check_strictly_hedonic(s, X, Y, Z, opt.grad_tol);
  out.check("u=xz, v=yz-z^2/2 is twisted with interior argmax", tw.verdict == Verdict::Holds);

  const SurplusModel even(StrictlyHedonic{Matrix{{0.0, 0.0, 0.0}, {0.0, 0.0, 1.0}}, Matrix{{0.0, 0.0, -0.5}, {0.0, 1.0, 0.0}}});
  const auto Zsym = grid_1d(-1.0, 1.0, 9).points();
  const auto tw_even = check_strictly_hedonic(even, X, Y, Zsym, opt.grad_tol);
  out.check("u=xz^2 on symmetric Z fails", tw_even.verdict == Verdict::Fails && tw_even.witness.has_value());

  const auto Zshort = grid_1d(0.0, 0.5, 9).points();
  const auto tw_edge = check_strictly_hedonic(s, X, Y, Zshort, opt.grad_tol);
  out.check("boundary argmax is inconclusive", tw_edge.verdict == Verdict::Inconclusive && tw_edge.witness.has_value());

  const auto mu = uniform_measure(X), nu = uniform_measure(Y);
  const auto res = solve_hybrid(s, mu, nu, Z, HybridMethod::ReduceLift);
  const auto stab = verify_stability(s, X, Y, Z, res.coupling, res.potentials, opt.tol);
  const auto purity = check_purity(res.coupling);
  out.check("solution is stable", stab.stable && res.gap <= 1e-9);
  out.check("solution is pure (or flagged degenerate)", purity.pure || res.degenerate);
  const auto prices = compute_prices(s, X, Y, Z, res.coupling, res.potentials);
  out.check("buyer and seller prices agree", prices.max_discrepancy <= 1e-8, fmt(prices.max_discrepancy));
  out.report = {{"twist", io::to_json(tw)},          {"twist_even", io::to_json(tw_even)},
                {"twist_boundary", io::to_json(tw_edge)}, {"stability", io::to_json(stab)},
                {"purity", io::to_json(purity)},     {"prices", io::to_json(prices)}};
  return out;
}

inline Outcome run_expcos_signature(const Options& opt) {
  Outcome out{"expcos-signature", {}, json::object()};
  const SurplusModel s = make_expcos();
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  json reports = json::array();
  bool all_240 = true, cross_ok = true, bound_ok = true;
  for (int n = 0; n < 10; ++n) {
    const Point x{dist(rng), dist(rng)}, y{dist(rng), dist(rng)}, z{dist(rng), dist(rng)};
    const auto r = signature(s, x, y, z);
    all_240 = all_240 && r.lambda_plus == 2 && r.lambda_minus == 4 && r.lambda_zero == 0;
    bound_ok = bound_ok && r.dimension_bound == 2;
    if (r.cross_check) cross_ok = cross_ok && r.cross_check->consistent;
    reports.push_back(io::to_json(r));
  }
  out.check("signature is (2,4,0) at 10 random points", all_240);
  out.check("dimension bound is 2", bound_ok);
  out.check("equal-dimension cross-check is consistent wherever it runs", cross_ok);

  double worst_pos = -std::numeric_limits<double>::infinity(), worst_eq = 0.0;
  for (int n = 0; n < 200; ++n) {
    const Point x{dist(rng), dist(rng)}, y{dist(rng), dist(rng)}, z{dist(rng), dist(rng)};
    worst_pos = std::max(worst_pos, eval(s, x, y, z));
    const double t = dist(rng), c = dist(rng);
    const double tp = 2.0 * std::numbers::pi;
    worst_eq = std::max(worst_eq, std::abs(eval(s, {c, t}, {c, t + tp}, {c, t - tp})));
  }
  out.check("s <= 0 on samples", worst_pos <= 1e-12, "max " + fmt(worst_pos));
  out.check("s = 0 on the equality set", worst_eq <= 1e-12, "max |s| " + fmt(worst_eq));
  out.report = {{"signatures", reports}};
  return out;
}

inline Outcome run_hedonic_pointmass_alpha(const Options& opt) {
  Outcome out{"hedonic-pointmass-alpha", {}, json::object()};
  const SurplusModel s = strictly_hedonic_example();
  std::mt19937_64 rng(opt.seed);
  const auto X = random_points(rng, 5, 1, 0.0, 0.5);
  const auto Y = random_points(rng, 5, 1, 0.0, 0.5);
  const auto mu = uniform_measure(X), nu = uniform_measure(Y);
  const auto Z = grid_1d(0.0, 1.0, 9).points();
  const auto best = max_over_alpha(s, mu, nu, Z);
  out.check("induced alpha reproduces the free optimum", best.consistency_gap <= 1e-9, fmt(best.consistency_gap));

  json runs = json::array();
  bool value_ok = true, flag_ok = true, below_ok = true;
  for (const auto& z0 : Z) {
    const auto r = solve_tripartite_fixed_alpha(s, mu, nu, point_mass(z0));
    double expected = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) expected += mu.weights[i] * eval_u(s, X[i], Y[0], z0);
    for (std::size_t j = 0; j < Y.size(); ++j) expected += nu.weights[j] * eval_v(s, X[0], Y[j], z0);
    value_ok = value_ok && std::abs(r.objective - expected) <= 1e-9;
    flag_ok = flag_ok && r.degenerate;
    below_ok = below_ok && r.objective <= best.hybrid.objective + 1e-9;
    runs.push_back({{"z0", z0[0]}, {"objective", r.objective}, {"expected", expected}, {"degenerate", r.degenerate}});
  }
  out.check("point-mass alpha value equals sum mu u(x,z0) + sum nu v(y,z0)", value_ok);
  out.check("point-mass alpha optimum is flagged degenerate", flag_ok);
  out.check("free-alpha optimum dominates every point mass", below_ok);
  out.report = {{"point_mass_runs", runs}, {"free_objective", best.hybrid.objective}};
  return out;
}

/// Throws ParseError for an unknown id.
inline Outcome run(std::string_view id, const Options& opt = {}) {
  if (id == "counterexample") return run_counterexample(opt);
  if (id == "bilinear-tss") return run_bilinear_tss(opt);
  if (id == "bilinear-tzss-family") return run_bilinear_tzss_family(opt);
  if (id == "supermodular-1d") return run_supermodular_1d(opt);
  if (id == "strictly-hedonic") return run_strictly_hedonic(opt);
  if (id == "expcos-signature") return run_expcos_signature(opt);
  if (id == "hedonic-pointmass-alpha") return run_hedonic_pointmass_alpha(opt);
  throw Error(ErrorCode::ParseError, "unknown example id '" + std::string(id) + "'");
}

}  // namespace hedonic::reproduce
