#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "hedonic/core_model.hpp"
#include "hedonic/surplus.hpp"

using namespace hedonic;

namespace {

ErrorCode code_of(const DiscreteMeasure& m) {
  try {
    validate_measure(m);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "measure unexpectedly valid";
  return ErrorCode::ParseError;
}

}  // namespace

TEST(ValidateMeasure, AcceptsUniformTwoPoint) {
  EXPECT_NO_THROW(validate_measure(DiscreteMeasure{{{0.0}, {1.0}}, {0.5, 0.5}}));
}

TEST(ValidateMeasure, ReportsTheViolatedInvariant) {
  EXPECT_EQ(code_of({{{0.0}, {1.0}}, {0.5, 0.6}}), ErrorCode::WeightSumMismatch);
  EXPECT_EQ(code_of({{{0.0}, {1.0}}, {-0.1, 1.1}}), ErrorCode::NegativeWeight);
  EXPECT_EQ(code_of({{{0.0}, {1.0, 2.0}}, {0.5, 0.5}}), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of({{{0.25}, {0.25}}, {0.5, 0.5}}), ErrorCode::DuplicatePoint);
  EXPECT_EQ(code_of({{}, {}}), ErrorCode::EmptyMeasure);
}

TEST(ValidateMeasure, SumToleranceIsTight) {
  EXPECT_NO_THROW(validate_measure(DiscreteMeasure{{{0.0}, {1.0}}, {0.5, 0.5 + 5e-13}}));
  EXPECT_THROW(validate_measure(DiscreteMeasure{{{0.0}, {1.0}}, {0.5, 0.5 + 1e-11}}), Error);
}

TEST(GridSpec, PointsAreAffineAndInRange) {
  const auto g = grid_1d(0.5, 1.0, 9);
  const auto pts = g.points();
  ASSERT_EQ(pts.size(), 9u);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_DOUBLE_EQ(pts[i][0], 0.5 + static_cast<double>(i) / 16.0);
  EXPECT_EQ(pts.back()[0], 1.0);

  const GridSpec two{{GridAxis{0, 1, 2}, GridAxis{0, 2, 3}}};
  const auto p2 = two.points();
  ASSERT_EQ(p2.size(), 6u);
  EXPECT_EQ(p2[1], (Point{0, 1}));  // last axis fastest
  EXPECT_EQ(p2[3], (Point{1, 0}));
  EXPECT_THROW((GridSpec{{GridAxis{1, 1, 3}}}.validate()), Error);
  EXPECT_NO_THROW((GridSpec{{GridAxis{1, 1, 1}}}.validate()));
}

TEST(Coupling, DropsZerosSortsAndRejectsDuplicates) {
  const Coupling c(3, {2, 2, 2}, {{{1, 1, 1}, 0.5}, {{0, 1, 0}, 0.0}, {{0, 0, 0}, 0.5}});
  ASSERT_EQ(c.support_size(), 2u);
  EXPECT_EQ(c.entries()[0].index, (std::array<std::size_t, 3>{0, 0, 0}));
  EXPECT_THROW(Coupling(3, {2, 2, 2}, {{{0, 0, 0}, 0.2}, {{0, 0, 0}, 0.3}}), Error);
  EXPECT_THROW(Coupling(3, {2, 2, 2}, {{{0, 2, 0}, 0.2}}), Error);
  EXPECT_THROW(Coupling(3, {2, 2, 2}, {{{0, 0, 0}, -0.2}}), Error);
  EXPECT_THROW(Coupling(4, {2, 2, 2}, {}), Error);
}

TEST(Project, DiagonalOntoXY) {
  const Coupling c(3, {2, 2, 2}, {{{0, 0, 0}, 0.5}, {{1, 1, 1}, 0.5}});
  const Coupling xy = project(c, Axis::X, Axis::Y);
  EXPECT_EQ(xy.arity(), 2);
  ASSERT_EQ(xy.support_size(), 2u);
  EXPECT_EQ(xy.entries()[0].i(), 0u);
  EXPECT_EQ(xy.entries()[1].j(), 1u);
  EXPECT_DOUBLE_EQ(xy.entries()[1].mass, 0.5);
}

TEST(Project, SymmetricOntoX) {
  const Coupling c(3, {2, 2, 2},
                   {{{0, 0, 0}, 0.25}, {{0, 1, 1}, 0.25}, {{1, 0, 1}, 0.25}, {{1, 1, 0}, 0.25}});
  const std::vector<Point> X{{0.0}, {1.0}};
  const auto m = project(c, Axis::X, X);
  EXPECT_EQ(m.weights, (std::vector<double>{0.5, 0.5}));
  EXPECT_THROW(project(c, Axis::X, Axis::X), Error);
  EXPECT_THROW(project(project(c, Axis::X, Axis::Y), Axis::X, Axis::Y), Error);
}

TEST(Project, RandomCouplingsPreserveMass) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<CouplingEntry> e;
    double total = 0;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 4; ++j)
        for (std::size_t k = 0; k < 2; ++k)
          if (u(rng) < 0.5) {
            const double m = u(rng);
            total += m;
            e.push_back({{i, j, k}, m});
          }
    const Coupling c(3, {3, 4, 2}, e);
    // Independent summation of the X marginal.
    std::vector<double> mx(3, 0.0);
    for (const auto& x : e) mx[x.index[0]] += x.mass;
    const auto got = marginal(c, Axis::X);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(got[i], mx[i], 1e-12);
    EXPECT_NEAR(project(c, Axis::Y, Axis::Z).total_mass(), total, 1e-12);
  }
}

TEST(CheckMarginals, FlagsMismatch) {
  const DiscreteMeasure mu{{{0.0}, {1.0}}, {0.5, 0.5}};
  const Coupling good(3, {2, 2, 1}, {{{0, 1, 0}, 0.5}, {{1, 0, 0}, 0.5}});
  EXPECT_NO_THROW(check_marginals(good, mu, mu, nullptr, 1e-12));
  const Coupling bad(3, {2, 2, 1}, {{{0, 1, 0}, 0.6}, {{1, 0, 0}, 0.4}});
  EXPECT_THROW(check_marginals(bad, mu, mu, nullptr, 1e-12), Error);
}

TEST(CouplingObjective, ConstantsAndPermutationInvariance) {
  const std::vector<Point> X{{0.5}, {1.0}}, Y{{0.0}, {0.5}}, Z{{0.0}, {0.5}};
  const SurplusModel zero = make_bilinear(Matrix{{0.0}}, Matrix{{0.0}}, Matrix{{0.0}});
  const SurplusModel one = make_bilinear(Matrix{{0.0}}, Matrix{{0.0}}, Matrix{{0.0}}, {}, {1.0});
  const Coupling c(3, {2, 2, 2}, {{{0, 0, 1}, 0.25}, {{1, 1, 0}, 0.5}, {{0, 1, 1}, 0.25}});
  EXPECT_EQ(coupling_objective(c, zero, X, Y, Z), 0.0);
  EXPECT_DOUBLE_EQ(coupling_objective(c, one, X, Y, Z), 1.0);
  const Coupling shuffled(3, {2, 2, 2}, {{{0, 1, 1}, 0.25}, {{1, 1, 0}, 0.5}, {{0, 0, 1}, 0.25}});
  const SurplusModel ce = make_counterexample();
  EXPECT_EQ(coupling_objective(c, ce, X, Y, Z), coupling_objective(shuffled, ce, X, Y, Z));
}

TEST(CouplingObjective, CounterexamplePlaneEqualsSecondMoments) {
  // Support on x = y + z: s - x^2/2 - y^2/2 vanishes there.
  const std::vector<Point> X{{0.5}, {1.0}}, Y{{0.0}, {0.5}}, Z{{0.0}, {0.5}, {1.0}};
  const Coupling c(3, {2, 2, 3}, {{{0, 0, 1}, 0.25}, {{0, 1, 0}, 0.25}, {{1, 0, 2}, 0.25}, {{1, 1, 1}, 0.25}});
  const double expected = 0.5 * (0.125 + 0.5) + 0.5 * (0.0 + 0.125);
  EXPECT_DOUBLE_EQ(coupling_objective(c, make_counterexample(), X, Y, Z), expected);
}
