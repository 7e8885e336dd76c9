#include <gtest/gtest.h>

#include "hedonic/solver.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace hedonic;

namespace {

oracle::Fn3 as_fn(const SurplusModel& s) {
  return [s](double x, double y, double z) { return eval(s, {x}, {y}, {z}); };
}

double counterexample_optimum(double a) {
  const auto X = grid_1d(0.5, 1.0, 9).points(), Y = grid_1d(0.0, 0.5, 9).points();
  const auto Z = grid_1d(0.0, 1.0, 17).points();
  return solve_hybrid(make_counterexample(a), uniform_measure(X), uniform_measure(Y), Z, HybridMethod::DirectLp)
      .objective;
}

}  // namespace

TEST(Transportation, HandInstance) {
  // Rewards favour the anti-diagonal; masses force a split on row 0.
  const Matrix r{{1.0, 3.0}, {2.0, 0.0}};
  const std::vector<double> a{0.6, 0.4}, b{0.5, 0.5};
  const auto sol = lp::solve_transportation(r, a, b);
  EXPECT_NEAR(sol.flow[0], 0.1, 1e-15);
  EXPECT_NEAR(sol.flow[1], 0.5, 1e-15);
  EXPECT_NEAR(sol.flow[2], 0.4, 1e-15);
  EXPECT_NEAR(sol.flow[3], 0.0, 1e-15);
  EXPECT_LE(sol.max_reduced_cost, 1e-12);
  for (auto cell : sol.basis) EXPECT_NEAR(sol.u[cell / 2] + sol.v[cell % 2], r(cell / 2, cell % 2), 1e-14);
}

TEST(Bipartite, MatchesPermutationOracle) {
  std::mt19937_64 rng(100);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + trial % 6;
    std::vector<std::vector<double>> rr(n, std::vector<double>(n));
    Matrix r(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) r(i, j) = rr[i][j] = u(rng);
    std::vector<Point> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back({static_cast<double>(i)});
    const auto m = uniform_measure(pts);
    const auto res = solve_bipartite(r, m, m);
    EXPECT_NEAR(res.objective, oracle::assignment_value(rr), 1e-12);
    EXPECT_LE(res.gap, 1e-12);
    EXPECT_EQ(*std::min_element(res.potentials.U.begin(), res.potentials.U.end()), 0.0);
    EXPECT_NEAR(res.objective, brute_force_bipartite(r, m, m).objective, 1e-12);
  }
}

TEST(Bipartite, UnequalWeightsDualityAndFeasibility) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 2 + trial % 4, n = 2 + (trial / 4) % 5;
    std::vector<Point> xp, yp;
    std::vector<double> a(m), b(n);
    for (std::size_t i = 0; i < m; ++i) xp.push_back({static_cast<double>(i)}), a[i] = u(rng);
    for (std::size_t j = 0; j < n; ++j) yp.push_back({static_cast<double>(j)}), b[j] = u(rng);
    const double sa = std::accumulate(a.begin(), a.end(), 0.0), sb = std::accumulate(b.begin(), b.end(), 0.0);
    for (auto& w : a) w /= sa;
    for (auto& w : b) w /= sb;
    // Renormalise so both sum to exactly one in floating point.
    a.back() = 1.0 - std::accumulate(a.begin(), a.end() - 1, 0.0);
    b.back() = 1.0 - std::accumulate(b.begin(), b.end() - 1, 0.0);
    Matrix r(m, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) r(i, j) = u(rng);
    const DiscreteMeasure mu{xp, a}, nu{yp, b};
    const auto res = solve_bipartite(r, mu, nu);
    EXPECT_LE(res.gap, 1e-12);
    EXPECT_NO_THROW(check_marginals(res.coupling, mu, nu, nullptr, 1e-12));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        EXPECT_GE(res.potentials.U[i] + res.potentials.V[j], r(i, j) - 1e-12);
  }
}

TEST(Hybrid, BothMethodsMatchOracle) {
  std::mt19937_64 rng(2718);
  const std::vector<SurplusModel> families{make_counterexample(0.5), make_counterexample(1.0),
                                           make_monomials({{1.0, 1, 1, 1}, {-0.3, 0, 0, 2}}),
                                           make_bilinear(Matrix{{0.5}}, Matrix{{1.0}}, Matrix{{-2.0}}, Matrix{{-1.0}})};
  for (int trial = 0; trial < 40; ++trial) {
    const auto& s = families[trial % families.size()];
    const std::size_t n = 1 + trial % 6, nz = 1 + trial % 4;
    const auto X = testutil::random_points(rng, n, 1), Y = testutil::random_points(rng, n, 1);
    const auto Z = testutil::random_points(rng, nz, 1);
    const double expect = oracle::hybrid_value(as_fn(s), testutil::column(X), testutil::column(Y), testutil::column(Z));
    const auto mu = uniform_measure(X), nu = uniform_measure(Y);
    const auto rl = solve_hybrid(s, mu, nu, Z, HybridMethod::ReduceLift);
    const auto dl = solve_hybrid(s, mu, nu, Z, HybridMethod::DirectLp);
    EXPECT_NEAR(rl.objective, expect, 1e-12) << "trial " << trial;
    EXPECT_NEAR(dl.objective, expect, 1e-12) << "trial " << trial;
    EXPECT_LE(rl.gap, 1e-12);
    EXPECT_LE(dl.gap, 1e-12);
    EXPECT_EQ(rl.method, "reduce_lift");
    EXPECT_EQ(dl.method, "direct_lp");
    EXPECT_NO_THROW(check_marginals(dl.coupling, mu, nu, nullptr, 1e-12));
  }
}

TEST(Hybrid, MultiDimensionalMatchesBruteForce) {
  std::mt19937_64 rng(8);
  const Matrix I = Matrix::identity(2);
  const auto s = make_bilinear(I, I, Matrix{{0.5, 0.0}, {1.0, -1.0}}, -1.0 * I);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + trial % 4;
    const auto mu = uniform_measure(testutil::random_points(rng, n, 2));
    const auto nu = uniform_measure(testutil::random_points(rng, n, 2));
    const auto Z = testutil::random_points(rng, 5, 2);
    const auto bf = brute_force_hybrid(s, mu, nu, Z);
    EXPECT_NEAR(solve_hybrid(s, mu, nu, Z, HybridMethod::ReduceLift).objective, bf.objective, 1e-12);
    EXPECT_NEAR(solve_hybrid(s, mu, nu, Z, HybridMethod::DirectLp).objective, bf.objective, 1e-12);
  }
}

TEST(Hybrid, CounterexampleFrozenOptima) {
  // Values produced by the permutation oracle on the 9 x 9 x 17 grid.
  const auto X = grid_1d(0.5, 1.0, 9).points(), Y = grid_1d(0.0, 0.5, 9).points();
  const auto Z = grid_1d(0.0, 1.0, 17).points();
  EXPECT_NEAR(oracle::hybrid_value(as_fn(make_counterexample(0.5)), testutil::column(X), testutil::column(Y),
                                   testutil::column(Z)),
              1560.0 / 4608.0, 1e-15);
  EXPECT_NEAR(counterexample_optimum(0.5), 1560.0 / 4608.0, 1e-12);
  EXPECT_NEAR(counterexample_optimum(1.0), 2544.0 / 9216.0, 1e-12);
}

TEST(Hybrid, InputErrors) {
  const auto mu = uniform_measure({{0.0}, {1.0}});
  const auto nu3 = uniform_measure({{0.0}, {0.5}, {1.0}});
  const std::vector<Point> Z{{0.0}};
  const auto s = make_counterexample();
  DiscreteMeasure heavy = mu;
  heavy.weights = {0.75, 0.75};
  EXPECT_EQ(testutil::code_of([&] { solve_hybrid(s, heavy, mu, Z, HybridMethod::DirectLp); }),
            ErrorCode::InfeasibleMarginals);
  EXPECT_EQ(testutil::code_of([&] { solve_hybrid(s, mu, mu, {}, HybridMethod::DirectLp); }), ErrorCode::EmptyGrid);
  EXPECT_EQ(testutil::code_of([&] { solve_hybrid(make_expcos(), mu, mu, Z, HybridMethod::DirectLp); }),
            ErrorCode::DimensionMismatch);
  EXPECT_EQ(testutil::code_of([&] { brute_force_hybrid(s, mu, nu3, Z); }), ErrorCode::NotEqualWeight);
  std::vector<Point> many;
  for (int i = 0; i < 8; ++i) many.push_back({static_cast<double>(i)});
  const auto big = uniform_measure(many);
  EXPECT_EQ(testutil::code_of([&] { brute_force_hybrid(s, big, big, Z); }), ErrorCode::TooLarge);
}

TEST(Tripartite, LpBoundsTheIntegralOptimum) {
  std::mt19937_64 rng(55);
  const auto s = make_counterexample(0.5);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t n = 2 + trial % 3;
    const auto X = testutil::random_points(rng, n, 1), Y = testutil::random_points(rng, n, 1);
    const auto Z = testutil::random_points(rng, n, 1);
    const auto res = solve_tripartite_fixed_alpha(s, uniform_measure(X), uniform_measure(Y), uniform_measure(Z));
    const double integral =
        oracle::three_d_assignment(as_fn(s), testutil::column(X), testutil::column(Y), testutil::column(Z));
    EXPECT_GE(res.objective, integral - 1e-12);
    EXPECT_LE(res.gap, 1e-12);
    EXPECT_EQ(res.z_potential.size(), n);
    EXPECT_EQ(res.method, "tripartite");
  }
}

TEST(Tripartite, SupermodularProductIsComonotone) {
  // xyz on positive points: sorting all three sides together is optimal.
  std::mt19937_64 rng(6);
  const auto s = make_monomials({{1.0, 1, 1, 1}});
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + trial % 4;
    auto xs = testutil::column(testutil::random_points(rng, n, 1, 0.1, 1.0));
    auto ys = testutil::column(testutil::random_points(rng, n, 1, 0.1, 1.0));
    auto zs = testutil::column(testutil::random_points(rng, n, 1, 0.1, 1.0));
    std::vector<Point> X, Y, Z;
    for (std::size_t i = 0; i < n; ++i) X.push_back({xs[i]}), Y.push_back({ys[i]}), Z.push_back({zs[i]});
    const auto res = solve_tripartite_fixed_alpha(s, uniform_measure(X), uniform_measure(Y), uniform_measure(Z));
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    std::sort(zs.begin(), zs.end());
    double sorted = 0.0;
    for (std::size_t i = 0; i < n; ++i) sorted += xs[i] * ys[i] * zs[i];
    EXPECT_NEAR(res.objective, sorted / static_cast<double>(n), 1e-12);
    EXPECT_NEAR(res.objective, brute_force_tripartite(s, uniform_measure(X), uniform_measure(Y), uniform_measure(Z)).objective,
                1e-12);
  }
}

TEST(Tripartite, PointMassGood) {
  // With alpha = delta_{z0}, s = xyz reduces to a bipartite problem scaled by z0.
  const auto s = make_monomials({{1.0, 1, 1, 1}});
  const auto X = uniform_measure({{0.1}, {0.4}, {0.9}});
  const auto Y = uniform_measure({{0.8}, {0.2}, {0.5}});
  const DiscreteMeasure alpha{{{0.5}}, {1.0}};
  const auto res = solve_tripartite_fixed_alpha(s, X, Y, alpha);
  EXPECT_NEAR(res.objective, 0.5 * (0.1 * 0.2 + 0.4 * 0.5 + 0.9 * 0.8) / 3.0, 1e-14);
  EXPECT_LE(res.gap, 1e-12);
}

TEST(MaxOverAlpha, InducedAlphaReproducesTheOptimum) {
  std::mt19937_64 rng(91);
  for (int trial = 0; trial < 10; ++trial) {
    const auto mu = uniform_measure(testutil::random_points(rng, 4, 1, 0.5, 1.0));
    const auto nu = uniform_measure(testutil::random_points(rng, 4, 1, 0.0, 0.5));
    const auto Z = grid_1d(0.0, 1.0, 5).points();
    const auto r = max_over_alpha(make_counterexample(0.5), mu, nu, Z);
    EXPECT_LE(r.consistency_gap, 1e-9);
    EXPECT_NEAR(std::accumulate(r.alpha.weights.begin(), r.alpha.weights.end(), 0.0), 1.0, 1e-12);
  }
}
