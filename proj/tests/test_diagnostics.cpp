#include <gtest/gtest.h>

#include "hedonic/diagnostics.hpp"
#include "hedonic/solver.hpp"
#include "test_util.hpp"

using namespace hedonic;

namespace {

// Counterexample grid: x in [1/2, 1], y in [0, 1/2], z in [0, 1], all with step 1/16.
struct Grid {
  std::vector<Point> X = grid_1d(0.5, 1.0, 9).points();
  std::vector<Point> Y = grid_1d(0.0, 0.5, 9).points();
  std::vector<Point> Z = grid_1d(0.0, 1.0, 17).points();

  // Mass 1/81 on every (x, y, x - y).
  Coupling plane() const {
    std::vector<CouplingEntry> e;
    for (std::size_t i = 0; i < 9; ++i)
      for (std::size_t j = 0; j < 9; ++j) e.push_back({{i, j, 8 + i - j}, 1.0 / 81.0});
    return Coupling(3, {9, 9, 17}, e);
  }

  DualPotentials half_squares() const {
    DualPotentials p;
    for (const auto& x : X) p.U.push_back(0.5 * x[0] * x[0]);
    for (const auto& y : Y) p.V.push_back(0.5 * y[0] * y[0]);
    return p;
  }
};

}  // namespace

TEST(Stability, PlaneCouplingWithHalfSquares) {
  // s - x^2/2 - y^2/2 = -(x - y - z)^2 / 2 when a = 1/2.
  const Grid g;
  const auto rep = verify_stability(make_counterexample(0.5), g.X, g.Y, g.Z, g.plane(), g.half_squares());
  EXPECT_TRUE(rep.stable);
  EXPECT_LE(rep.max_support_residual, 1e-15);
  EXPECT_LE(rep.max_grid_residual, 1e-15);
}

TEST(Stability, DetectsABlockingTriple) {
  const Grid g;
  auto p = g.half_squares();
  p.U[4] -= 0.01;
  const auto rep = verify_stability(make_counterexample(0.5), g.X, g.Y, g.Z, g.plane(), p);
  EXPECT_FALSE(rep.stable);
  EXPECT_NEAR(rep.max_grid_residual, 0.01, 1e-14);
  EXPECT_EQ(rep.worst[0], 4u);
  EXPECT_EQ(rep.worst[2], 8 + 4 - rep.worst[1]);
  p.U.pop_back();
  EXPECT_EQ(testutil::code_of([&] { verify_stability(make_counterexample(), g.X, g.Y, g.Z, g.plane(), p); }),
            ErrorCode::SizeMismatch);
}

TEST(Stability, SolverOutputIsStable) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto X = testutil::random_points(rng, 5, 1), Y = testutil::random_points(rng, 5, 1);
    const auto Z = testutil::random_points(rng, 4, 1);
    const auto s = make_monomials({{1.0, 1, 1, 1}, {-1.0, 0, 0, 2}});
    for (auto m : {HybridMethod::ReduceLift, HybridMethod::DirectLp}) {
      const auto res = solve_hybrid(s, uniform_measure(X), uniform_measure(Y), Z, m);
      EXPECT_TRUE(verify_stability(s, X, Y, Z, res.coupling, res.potentials).stable);
    }
  }
}

TEST(Stability, BipartiteOverloadWithZPotential) {
  const Matrix r{{1.0, 0.0}, {0.0, 1.0}};
  const Coupling c(2, {2, 2, 1}, {{{0, 0, 0}, 0.5}, {{1, 1, 0}, 0.5}});
  EXPECT_TRUE(verify_stability(r, c, {{0.5, 0.5}, {0.5, 0.5}}).stable);
  EXPECT_FALSE(verify_stability(r, c, {{0.0, 0.0}, {0.5, 0.5}}).stable);

  // A constant W shifts U without changing stability.
  const std::vector<Point> X{{0.0}}, Y{{0.0}}, Z{{0.0}};
  const Coupling one(3, {1, 1, 1}, {{{0, 0, 0}, 1.0}});
  const auto s = make_bilinear(Matrix{{0.0}}, Matrix{{0.0}}, Matrix{{0.0}}, {}, {2.0});
  const std::vector<double> W{1.5};
  EXPECT_TRUE(verify_stability(s, X, Y, Z, one, {{0.5}, {0.0}}, kStabilityTol, W).stable);
  EXPECT_FALSE(verify_stability(s, X, Y, Z, one, {{0.5}, {0.0}}).stable);
}

TEST(Purity, FanOutAndMaps) {
  const Coupling pure(3, {2, 2, 2}, {{{0, 1, 0}, 0.5}, {{1, 0, 1}, 0.5}});
  const auto p = check_purity(pure);
  EXPECT_TRUE(p.pure);
  EXPECT_EQ(p.F_Y, (std::vector<long>{1, 0}));
  EXPECT_EQ(p.F_Z, (std::vector<long>{0, 1}));

  const Coupling split_good(3, {2, 2, 2}, {{{0, 1, 0}, 0.25}, {{0, 1, 1}, 0.25}, {{1, 0, 1}, 0.5}});
  const auto q = check_purity(split_good);
  EXPECT_TRUE(q.buyer_seller_pure);
  EXPECT_FALSE(q.buyer_good_pure);
  EXPECT_FALSE(q.pure);
  EXPECT_EQ(q.z_fanout, (std::vector<std::size_t>{2, 1}));
  EXPECT_EQ(q.F_Z[0], kNoMap);

  // Dust below the threshold is ignored.
  const Coupling dusty(3, {1, 2, 1}, {{{0, 0, 0}, 1.0}, {{0, 1, 0}, 1e-15}});
  EXPECT_TRUE(check_purity(dusty).pure);
  EXPECT_FALSE(check_purity(dusty, 0.0).pure);
}

TEST(Purity, PlaneCouplingIsNotPure) {
  const auto rep = check_purity(Grid{}.plane());
  EXPECT_FALSE(rep.pure);
  EXPECT_EQ(rep.yz_fanout, std::vector<std::size_t>(9, 9));
}

TEST(Prices, AgreeOnPlaneAndEqualHalfSquare) {
  const Grid g;
  const auto table = compute_prices(make_counterexample(0.5), g.X, g.Y, g.Z, g.plane(), g.half_squares());
  ASSERT_EQ(table.rows.size(), 81u);
  EXPECT_LE(table.max_discrepancy, 1e-15);
  for (const auto& r : table.rows) EXPECT_NEAR(r.price_buyer, 0.5 * g.X[r.i][0] * g.X[r.i][0], 1e-15);
  EXPECT_EQ(testutil::code_of([&] {
              compute_prices(make_bilinear(Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{1.0}}), g.X, g.Y, g.Z, g.plane(),
                             g.half_squares());
            }),
            ErrorCode::MissingUV);
}

TEST(Compatibility, SignOfTheCrossProduct) {
  std::vector<std::array<double, 3>> pts;
  for (double t : {0.1, 0.4, 0.9}) pts.push_back({t, 1.0 - t, 0.5 + t});
  const auto good = check_compatibility_1d(make_monomials({{1.0, 1, 1, 1}}), pts);
  EXPECT_EQ(good.verdict, Verdict::Holds);
  const auto bad = check_compatibility_1d(make_counterexample(), pts);
  EXPECT_EQ(bad.verdict, Verdict::Fails);
  ASSERT_TRUE(bad.witness.has_value());
  EXPECT_EQ(bad.witness->value, -1.0);
  EXPECT_EQ(testutil::code_of([&] { check_compatibility_1d(make_monomials({{1.0, 1, 1, 0}, {1.0, 1, 0, 1}}), pts); }),
            ErrorCode::DegenerateCross);
  EXPECT_EQ(testutil::code_of([&] { check_compatibility_1d(make_expcos(), pts); }), ErrorCode::DimensionMismatch);
}

TEST(TwistBilinear, TssVerdicts) {
  const Matrix I = Matrix::identity(2);
  const auto holds = check_tss_bilinear(I, I, I);
  EXPECT_EQ(holds.verdict, Verdict::Holds);
  EXPECT_NEAR(*holds.criterion_value, 2.0, 1e-14);
  EXPECT_EQ(check_tss_bilinear(I, I, -1.0 * I).verdict, Verdict::Fails);
  const auto sing = check_tss_bilinear(Matrix(2, 2), I, I);
  EXPECT_EQ(sing.verdict, Verdict::Inconclusive);
  EXPECT_EQ(to_string(sing.verdict), "inconclusive");
}

TEST(TwistBilinear, TzssCounterexampleFamily) {
  for (double a : {0.25, 0.5, 1.0, 2.0}) {
    const auto parts = *bilinear_parts(make_counterexample(a));
    const auto rep = check_tzss_bilinear(parts.A, parts.B, parts.C, parts.D);
    EXPECT_EQ(*rep.criterion_value, 1.0 - 2.0 * a) << a;
    EXPECT_EQ(rep.verdict, a == 0.5 ? Verdict::Fails : Verdict::Holds) << a;
  }
}

TEST(TwistBilinear, TzssStructuralFailures) {
  const Matrix I = Matrix::identity(2);
  const auto c_sing = check_tzss_bilinear(I, I, Matrix(2, 2), -1.0 * I);
  EXPECT_EQ(c_sing.verdict, Verdict::Fails);
  EXPECT_FALSE(c_sing.criterion_value.has_value());
  EXPECT_EQ(check_tzss_bilinear(I, I, I, Matrix(2, 2)).verdict, Verdict::Fails);
  EXPECT_EQ(check_tzss_bilinear(I, I, I, I).verdict, Verdict::Fails);
  // B = A (C')^{-1} (D + D') exactly: K = 0.
  EXPECT_EQ(check_tzss_bilinear(I, -2.0 * I, I, -1.0 * I).verdict, Verdict::Fails);
  EXPECT_EQ(check_tzss_bilinear(I, I, I, -1.0 * I).verdict, Verdict::Holds);
  EXPECT_EQ(testutil::code_of([&] { check_tzss_bilinear(I, I, I, Matrix(3, 3)); }), ErrorCode::ShapeMismatch);
}

TEST(TwistBilinear, PartsExtraction) {
  const auto b = bilinear_parts(make_bilinear(Matrix{{1.0}}, Matrix{{2.0}}, Matrix{{3.0}}));
  ASSERT_TRUE(b.has_value());
  EXPECT_EQ(b->D, Matrix(1, 1));
  EXPECT_FALSE(bilinear_parts(make_expcos()).has_value());
}

TEST(SplittingSets, DegenerateCounterexampleClustersAlongThePlane) {
  // At a = 1/2 every (y, x - y) is tight and D_x s = y + z = x for all of them.
  const Grid g;
  const auto V = g.half_squares().V;
  const std::vector<Point> xs{{0.5}, {0.75}};
  const auto audit = sample_splitting_sets(make_counterexample(0.5), xs, g.Y, g.Z, V);
  EXPECT_EQ(audit.report.verdict, Verdict::Fails);
  EXPECT_EQ(audit.samples[0].members.size(), 9u);
  EXPECT_EQ(audit.samples[0].largest_cluster, 9u);
  EXPECT_TRUE(audit.samples[0].maximality_ok);
  EXPECT_NEAR(audit.samples[1].level, 0.28125, 1e-15);
  ASSERT_TRUE(audit.report.witness.has_value());
  EXPECT_EQ(audit.report.witness->matrix.rows(), 9u);
}

TEST(SplittingSets, NonDegenerateMemberIsASingleton) {
  // a = 1 with V = y^2/2 + y/4: the only tight pair is y = x - 1/2, z = 1/4.
  const Grid g;
  std::vector<double> V;
  for (const auto& y : g.Y) V.push_back(0.5 * y[0] * y[0] + 0.25 * y[0]);
  const auto audit = sample_splitting_sets(make_counterexample(1.0), g.X, g.Y, g.Z, V);
  EXPECT_EQ(audit.report.verdict, Verdict::Holds);
  for (const auto& smp : audit.samples) {
    EXPECT_LE(smp.largest_cluster, 1u);
    EXPECT_EQ(smp.members.size(), 1u);
  }
}

TEST(SplittingSets, SuppliedLevelMustBeFeasible) {
  const Grid g;
  const auto V = g.half_squares().V;
  const std::vector<Point> xs{{0.5}};
  const std::vector<double> low{0.1};
  EXPECT_EQ(testutil::code_of([&] { sample_splitting_sets(make_counterexample(0.5), xs, g.Y, g.Z, V, 1e-8, 1e-6, low); }),
            ErrorCode::InfeasibleV);
  std::vector<double> bad = V;
  bad[0] = std::numeric_limits<double>::infinity();
  EXPECT_EQ(testutil::code_of([&] { sample_splitting_sets(make_counterexample(0.5), xs, g.Y, g.Z, bad); }),
            ErrorCode::InfeasibleV);
  // A slack level leaves the splitting set empty.
  const std::vector<double> high{1.0};
  const auto audit = sample_splitting_sets(make_counterexample(0.5), xs, g.Y, g.Z, V, 1e-8, 1e-6, high);
  EXPECT_TRUE(audit.samples[0].members.empty());
  EXPECT_EQ(audit.report.verdict, Verdict::Holds);
}

TEST(SplittingSets, SolverDualsAtAEqualsOneMergeNeighbouringGoods) {
  // The simplex returns one vertex of the dual face, and its V is flatter than
  // y^2/2 + y/4. The tight set then holds pairs (y_j, z + 1/16), (y_{j+1}, z)
  // whose D_x s = y + z coincide. These are grid artifacts; the analytic
  // equilibrium above gives singletons.
  const Grid g;
  const auto s = make_counterexample(1.0);
  const auto res = solve_hybrid(s, uniform_measure(g.X), uniform_measure(g.Y), g.Z, HybridMethod::DirectLp);
  ASSERT_TRUE(verify_stability(s, g.X, g.Y, g.Z, res.coupling, res.potentials).stable);
  const auto audit = sample_splitting_sets(s, g.X, g.Y, g.Z, res.potentials.V, kStabilityTol, kGradTolRel,
                                           res.potentials.U);
  EXPECT_EQ(audit.report.verdict, Verdict::Fails);
  std::size_t largest = 0;
  for (const auto& smp : audit.samples) {
    largest = std::max(largest, smp.largest_cluster);
    for (const auto& cl : smp.clusters) {
      if (cl.size() < 2) continue;
      ASSERT_EQ(cl.size(), 2u);
      const auto& a = smp.members[cl[0]];
      const auto& b = smp.members[cl[1]];
      const long dj = static_cast<long>(b.j) - static_cast<long>(a.j);
      const long dk = static_cast<long>(b.k) - static_cast<long>(a.k);
      EXPECT_EQ(std::abs(dj), 1) << "x=" << smp.x[0];
      EXPECT_EQ(dk, -dj) << "x=" << smp.x[0];
    }
  }
  EXPECT_EQ(largest, 2u);
}

TEST(StrictlyHedonic, Verdicts) {
  // u = xz, v = yz - z^2/2: best good is x + y.
  const auto s = SurplusModel(StrictlyHedonic{Matrix{{0.0, 0.0}, {0.0, 1.0}}, Matrix{{0.0, 0.0, -0.5}, {0.0, 1.0, 0.0}}});
  const auto X = grid_1d(0.0625, 0.5, 8).points();
  const auto wide = grid_1d(0.0, 1.25, 21).points();
  EXPECT_EQ(check_strictly_hedonic(s, X, X, wide).verdict, Verdict::Holds);
  const auto narrow = check_strictly_hedonic(s, X, X, grid_1d(0.0, 0.5, 9).points());
  EXPECT_EQ(narrow.verdict, Verdict::Inconclusive);
  ASSERT_TRUE(narrow.witness.has_value());

  // u = x z^2 takes equal x-slopes at z and -z.
  const auto sq = SurplusModel(StrictlyHedonic{Matrix{{0.0, 0.0, 0.0}, {0.0, 0.0, 1.0}}, Matrix{{0.0, 0.0, -0.5}, {0.0, 1.0, 0.0}}});
  EXPECT_EQ(check_strictly_hedonic(sq, X, X, grid_1d(-1.0, 1.0, 9).points()).verdict, Verdict::Fails);

  EXPECT_EQ(testutil::code_of([&] { check_strictly_hedonic(make_counterexample(), X, X, wide); }),
            ErrorCode::NotSeparable);
  EXPECT_EQ(testutil::code_of([&] { check_strictly_hedonic(make_monomials({{1.0, 0, 1, 1}}), X, X, wide); }),
            ErrorCode::MissingUV);
}

TEST(SupportDimension, PlaneAndCurve) {
  const Grid g;
  const auto plane = support_dimension(make_counterexample(0.5), g.X, g.Y, g.Z, g.plane(), 0.2);
  EXPECT_EQ(plane.estimate, 2u);
  EXPECT_EQ(plane.bound.dimension_bound, 2u);
  EXPECT_EQ(plane.support_points, 81u);

  std::vector<Point> X, Y, Z;
  std::vector<CouplingEntry> e;
  for (std::size_t i = 0; i < 16; ++i) {
    const double t = 0.25 + 0.05 * static_cast<double>(i);
    X.push_back({t});
    Y.push_back({t * t});
    Z.push_back({0.5 * t});
    e.push_back({{i, i, i}, 1.0 / 16.0});
  }
  const Coupling curve(3, {16, 16, 16}, e);
  const auto c = support_dimension(make_monomials({{1.0, 1, 1, 1}}), X, Y, Z, curve, 0.12);
  EXPECT_EQ(c.estimate, 1u);
  EXPECT_TRUE(c.heuristic);

  const Coupling few(3, {16, 16, 16}, {e.begin(), e.begin() + 5});
  EXPECT_EQ(testutil::code_of([&] { support_dimension(make_counterexample(), X, Y, Z, few, 0.1); }),
            ErrorCode::TooFewPoints);
  const Coupling single(3, {16, 16, 16}, {{{0, 0, 0}, 1.0}});
  EXPECT_EQ(support_dimension(make_counterexample(), X, Y, Z, single, 0.1).estimate, 0u);
}
