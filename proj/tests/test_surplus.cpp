#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hedonic/surplus.hpp"
#include "oracles.hpp"

using namespace hedonic;

namespace {

std::vector<std::pair<std::string, SurplusModel>> analytic_families() {
  std::vector<std::pair<std::string, SurplusModel>> out;
  out.emplace_back("bilinear", make_bilinear(Matrix{{1.0, -0.5}, {0.3, 2.0}}, Matrix{{0.7, 0.1}, {-1.2, 0.4}},
                                             Matrix{{0.2, 0.9}, {1.1, -0.3}}, Matrix{{-1.0, 0.2}, {0.0, -0.8}},
                                             {0.0, 0.5, -0.25}, {1.0, 0.0, 0.0, 0.1}, {0.0, -1.0}));
  out.emplace_back("counterexample", make_counterexample(0.5));
  out.emplace_back("expcos", make_expcos());
  out.emplace_back("supermodular1d", make_monomials({{1.0, 1, 1, 1}, {-0.5, 0, 0, 2}, {0.3, 2, 1, 0}}));
  out.emplace_back("strictly_hedonic",
                   SurplusModel(StrictlyHedonic{Matrix{{0.0, 0.0, 0.1}, {0.0, 1.0, 0.0}, {0.2, 0.0, 0.0}},
                                                Matrix{{0.0, 0.0, -0.5}, {0.0, 1.0, 0.0}}}));
  out.emplace_back("split", make_split(make_monomials({{1.0, 1, 0, 1}}), make_monomials({{1.0, 0, 1, 1}, {-0.5, 0, 0, 2}})));
  return out;
}

Point random_point(std::mt19937_64& rng, std::size_t d) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Point p(d);
  for (auto& v : p) v = u(rng);
  return p;
}

}  // namespace

TEST(Eval, HandArithmetic) {
  EXPECT_DOUBLE_EQ(eval(make_counterexample(0.5), {1.0}, {0.5}, {0.5}), 0.625);
  EXPECT_EQ(eval(make_bilinear(Matrix{{0.0}}, Matrix{{0.0}}, Matrix{{0.0}}, Matrix{{0.0}}), {0.3}, {-2.0}, {7.0}), 0.0);
  EXPECT_EQ(eval(make_expcos(), {0, 0}, {0, 0}, {0, 0}), 0.0);
  const auto sh = SurplusModel(StrictlyHedonic{Matrix{{0.0, 0.0}, {0.0, 1.0}}, Matrix{{0.0, 0.0, -0.5}, {0.0, 1.0, 0.0}}});
  EXPECT_DOUBLE_EQ(eval(sh, {0.5}, {0.25}, {0.75}), 0.5 * 0.75 + 0.25 * 0.75 - 0.5 * 0.75 * 0.75);
}

TEST(Eval, SplitFamiliesAddExactly) {
  std::mt19937_64 rng(3);
  for (const auto& [name, s] : analytic_families()) {
    if (!s.has_uv()) {
      EXPECT_THROW(eval_u(s, random_point(rng, s.dims().x), random_point(rng, s.dims().y), random_point(rng, s.dims().z)),
                   Error)
          << name;
      continue;
    }
    for (int n = 0; n < 20; ++n) {
      const auto x = random_point(rng, 1), y = random_point(rng, 1), z = random_point(rng, 1);
      EXPECT_EQ(eval(s, x, y, z), eval_u(s, x, y, z) + eval_v(s, x, y, z)) << name;
    }
  }
}

TEST(Eval, DimensionMismatch) {
  EXPECT_THROW(eval(make_expcos(), {0.0}, {0.0, 0.0}, {0.0, 0.0}), Error);
  EXPECT_THROW(make_bilinear(Matrix{{1.0}}, Matrix{{1.0, 2.0}}, Matrix{{1.0}}), Error);
}

TEST(Gradient, AnalyticExamples) {
  EXPECT_DOUBLE_EQ(grad_x(make_counterexample(), {0.7}, {0.25}, {0.25})[0], 0.5);
  const auto zero = make_bilinear(Matrix(2, 2), Matrix(2, 2), Matrix(2, 2));
  EXPECT_EQ(grad_x(zero, {1, 2}, {3, 4}, {5, 6}), (Point{0, 0}));
  const auto bil = make_bilinear(Matrix::identity(2), Matrix::identity(2), Matrix(2, 2));
  EXPECT_EQ(grad_x(bil, {0.3, 0.4}, {1, 0}, {1, 0}), (Point{2, 0}));
}

TEST(Gradient, MatchesCentralDifferencesOnRandomPoints) {
  std::mt19937_64 rng(2024);
  for (const auto& [name, s] : analytic_families()) {
    const Dims d = s.dims();
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
      const Point x = random_point(rng, d.x), y = random_point(rng, d.y), z = random_point(rng, d.z);
      const Point gx = grad_x(s, x, y, z), gy = grad_y(s, x, y, z), gz = grad_z(s, x, y, z);
      for (std::size_t a = 0; a < d.x; ++a)
        worst = std::max(worst, std::abs(gx[a] - oracle::central_diff([&](const Point& p) { return eval(s, p, y, z); }, x, a)));
      for (std::size_t a = 0; a < d.y; ++a)
        worst = std::max(worst, std::abs(gy[a] - oracle::central_diff([&](const Point& p) { return eval(s, x, p, z); }, y, a)));
      for (std::size_t a = 0; a < d.z; ++a)
        worst = std::max(worst, std::abs(gz[a] - oracle::central_diff([&](const Point& p) { return eval(s, x, y, p); }, z, a)));
    }
    EXPECT_LE(worst, 1e-6) << name;
  }
}

TEST(Hessian, MatchesDifferencedGradients) {
  std::mt19937_64 rng(77);
  for (const auto& [name, s] : analytic_families()) {
    const Dims d = s.dims();
    for (int n = 0; n < 20; ++n) {
      const Point x = random_point(rng, d.x), y = random_point(rng, d.y), z = random_point(rng, d.z);
      const auto h = hessian_blocks(s, x, y, z);
      for (std::size_t b = 0; b < d.y; ++b)
        for (std::size_t a = 0; a < d.x; ++a)
          EXPECT_NEAR(h.xy(a, b), oracle::central_diff([&](const Point& p) { return grad_x(s, x, p, z)[a]; }, y, b), 1e-6)
              << name;
      for (std::size_t c = 0; c < d.z; ++c) {
        for (std::size_t a = 0; a < d.x; ++a)
          EXPECT_NEAR(h.xz(a, c), oracle::central_diff([&](const Point& p) { return grad_x(s, x, y, p)[a]; }, z, c), 1e-6)
              << name;
        for (std::size_t b = 0; b < d.y; ++b)
          EXPECT_NEAR(h.yz(b, c), oracle::central_diff([&](const Point& p) { return grad_y(s, x, y, p)[b]; }, z, c), 1e-6)
              << name;
      }
    }
  }
}

TEST(Hessian, ClosedForms) {
  const auto A = Matrix{{1.0, 2.0}, {3.0, 4.0}};
  const auto h = hessian_blocks(make_bilinear(A, Matrix::identity(2), Matrix(2, 2)), {0, 0}, {0, 0}, {0, 0});
  EXPECT_EQ(h.xy, A);
  const auto hc = hessian_blocks(make_counterexample(0.3), {0.1}, {0.2}, {0.3});
  EXPECT_EQ(hc.xy(0, 0), 1.0);
  EXPECT_EQ(hc.xz(0, 0), 1.0);
  EXPECT_EQ(hc.yz(0, 0), -1.0);
  const auto hm = hessian_blocks(make_monomials({{1.0, 1, 1, 1}}), {1.0}, {1.0}, {1.0});
  EXPECT_EQ(hm.xy(0, 0), 1.0);
  EXPECT_EQ(hm.xz(0, 0), 1.0);
  EXPECT_EQ(hm.yz(0, 0), 1.0);
}

TEST(AssembleG, PlacementAndSymmetry) {
  const Matrix g = assemble_G({Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{-1.0}}});
  EXPECT_EQ(g, (Matrix{{0, 1, 1}, {1, 0, -1}, {1, -1, 0}}));
  EXPECT_TRUE(assemble_G({Matrix(1, 2), Matrix(1, 3), Matrix(2, 3)}).is_zero());
  EXPECT_THROW(assemble_G({Matrix(1, 2), Matrix(2, 3), Matrix(2, 3)}), Error);

  std::mt19937_64 rng(9);
  const auto s = make_expcos();
  const Matrix ge = assemble_G(hessian_blocks(s, random_point(rng, 2), random_point(rng, 2), random_point(rng, 2)));
  ASSERT_EQ(ge.rows(), 6u);
  EXPECT_EQ(ge, ge.transpose());
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(ge(2 * b + r, 2 * b + c), 0.0);
}

TEST(Signature, CounterexampleAnyParameter) {
  for (double a : {0.25, 0.5, 1.0}) {
    const auto r = signature(make_counterexample(a), {0.7}, {0.2}, {0.4});
    EXPECT_NEAR(r.eigenvalues[0], -2.0, 1e-10);
    EXPECT_NEAR(r.eigenvalues[1], 1.0, 1e-10);
    EXPECT_NEAR(r.eigenvalues[2], 1.0, 1e-10);
    EXPECT_EQ(r.lambda_plus, 2u);
    EXPECT_EQ(r.lambda_minus, 1u);
    EXPECT_EQ(r.lambda_zero, 0u);
    EXPECT_EQ(r.dimension_bound, 2u);
    ASSERT_TRUE(r.cross_check.has_value());
    EXPECT_NEAR(r.cross_check->M(0, 0), -2.0, 1e-12);  // (-1)(1)(1) twice
    EXPECT_TRUE(r.cross_check->consistent);
  }
}

TEST(Signature, XyzAtOnes) {
  const auto r = signature(make_monomials({{1.0, 1, 1, 1}}), {1.0}, {1.0}, {1.0});
  const double g[3][3] = {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
  const auto expected = oracle::sym3_eigenvalues(g);
  for (int n = 0; n < 3; ++n) EXPECT_NEAR(r.eigenvalues[n], expected[n], 1e-10);
  EXPECT_NEAR(r.eigenvalues[2], 2.0, 1e-10);
  EXPECT_EQ(r.lambda_plus, 1u);
  EXPECT_EQ(r.lambda_minus, 2u);
  EXPECT_EQ(r.dimension_bound, 1u);
  ASSERT_TRUE(r.cross_check.has_value());
  EXPECT_TRUE(r.cross_check->consistent);
}

TEST(Signature, ExpCosEverywhere) {
  std::mt19937_64 rng(41);
  for (int n = 0; n < 25; ++n) {
    const auto r = signature(make_expcos(), random_point(rng, 2), random_point(rng, 2), random_point(rng, 2));
    EXPECT_EQ(r.lambda_plus, 2u);
    EXPECT_EQ(r.lambda_minus, 4u);
    EXPECT_EQ(r.lambda_zero, 0u);
    EXPECT_EQ(r.dimension_bound, 2u);
    EXPECT_EQ(r.lambda_plus + r.lambda_minus + r.lambda_zero, 6u);
    EXPECT_LE(r.eigen_residual, 1e-10);
    if (r.cross_check) {
      EXPECT_TRUE(r.cross_check->consistent);
      EXPECT_EQ(r.cross_check->r_minus, 0u);
      EXPECT_EQ(r.cross_check->r_plus, 2u);
    }
  }
}

TEST(Signature, SingularBlockSkipsCrossCheck) {
  const auto s = make_bilinear(Matrix(2, 2), Matrix::identity(2), Matrix::identity(2));
  const auto r = signature(s, {0, 0}, {0, 0}, {0, 0});
  EXPECT_FALSE(r.cross_check.has_value());
  EXPECT_EQ(r.cross_check_status, "SingularBlock");
  EXPECT_EQ(r.lambda_plus + r.lambda_minus + r.lambda_zero, 6u);
}

TEST(ExpCos, NonPositiveWithEqualityOnDiagonalSet) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const auto s = make_expcos();
  for (int n = 0; n < 500; ++n) {
    EXPECT_LE(eval(s, {u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}), 1e-12);
    const double c = u(rng), t = u(rng);
    const double h = 2.0 * std::numbers::pi * static_cast<double>(n % 3);
    EXPECT_LE(std::abs(eval(s, {c, t}, {c, t + h}, {c, t - h})), 1e-12);
  }
}

TEST(Tabulated, MultilinearAndBounded) {
  // s = x + 2y + 3z sampled on a coarse grid is reproduced exactly inside.
  const GridSpec g = grid_1d(0.0, 1.0, 3);
  std::vector<double> vals;
  for (double x : {0.0, 0.5, 1.0})
    for (double y : {0.0, 0.5, 1.0})
      for (double z : {0.0, 0.5, 1.0}) vals.push_back(x + 2 * y + 3 * z);
  const SurplusModel s(Tabulated{g, g, g, vals});
  EXPECT_NEAR(eval(s, {0.3}, {0.7}, {0.1}), 0.3 + 1.4 + 0.3, 1e-14);
  EXPECT_NEAR(grad_z(s, {0.3}, {0.7}, {0.5})[0], 3.0, 1e-12);
  EXPECT_NEAR(grad_x(s, {0.0}, {0.7}, {0.5})[0], 1.0, 1e-12);  // one-sided at the edge
  EXPECT_NEAR(hessian_blocks(s, {0.5}, {0.5}, {0.5}).xy(0, 0), 0.0, 1e-12);
  EXPECT_THROW(eval(s, {1.1}, {0.5}, {0.5}), Error);
  EXPECT_THROW(SurplusModel(Tabulated{g, g, g, {1.0}}), Error);
}
