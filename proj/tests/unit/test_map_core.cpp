#include <gtest/gtest.h>

#include <plbif/family_io.hpp>
#include <plbif/map_family.hpp>
#include <plbif/roots.hpp>

#include <filesystem>
#include <random>

#include "families.hpp"
#include "oracles.hpp"

using namespace plbif;
using testfam::p1;
using testfam::p2;

namespace {

std::vector<Complex> critical_points_of(const MapInstance& f) {
  std::vector<Complex> out;
  for (const auto& c : f.critical_points().components)
    for (int m = 0; m < c.multiplicity; ++m) out.push_back(c.point[0]);
  std::sort(out.begin(), out.end(), [](Complex a, Complex b) { return canonical_less(a, b); });
  return out;
}

}  // namespace

TEST(MapCore, EvalExamples) {
  const auto q = testfam::quadratic();
  EXPECT_EQ(q.eval(p1(0.0), Point{3.0})[0], Complex(9.0));
  EXPECT_EQ(q.eval(p1(-1.0), Point{0.0})[0], Complex(-1.0));
  const auto prod = testfam::product(2, 3);
  const Point w = prod.eval(p2(0.0, 0.0), Point{2.0, 1.0});
  EXPECT_EQ(w[0], Complex(4.0));
  EXPECT_EQ(w[1], Complex(1.0));
}

TEST(MapCore, JacobianExamples) {
  const auto q = testfam::quadratic();
  const CMatrix j = q.jacobian(p1(0.3), Point{3.0});
  EXPECT_EQ(j.size(), 1);
  EXPECT_EQ(j(0, 0), Complex(6.0));

  const CMatrix jp = testfam::product(2, 3).jacobian(p2(0.0, 0.0), Point{1.0, 2.0});
  EXPECT_EQ(jp(0, 0), Complex(2.0));
  EXPECT_EQ(jp(1, 1), Complex(12.0));
  EXPECT_EQ(jp(0, 1), Complex(0.0));
  EXPECT_EQ(jp(1, 0), Complex(0.0));

  const CMatrix js = testfam::skew_zw().jacobian(p1(0.0), Point{2.0, 5.0});
  EXPECT_EQ(js(0, 0), Complex(4.0));
  EXPECT_EQ(js(0, 1), Complex(0.0));
  EXPECT_EQ(js(1, 0), Complex(5.0));
  EXPECT_EQ(js(1, 1), Complex(2.0));
}

TEST(MapCore, CriticalPointExamples) {
  auto quad = critical_points_of(testfam::quadratic().at(p1({0.2, 0.1})));
  ASSERT_EQ(quad.size(), 1u);
  EXPECT_LT(std::abs(quad[0]), 1e-12);

  const auto cubic = testfam::unicritical(3).at(p1(0.5)).critical_points();
  ASSERT_EQ(cubic.components.size(), 1u);
  EXPECT_EQ(cubic.components[0].multiplicity, 2);
  EXPECT_LT(std::abs(cubic.components[0].point[0]), 1e-12);

  auto two = critical_points_of(testfam::cubic_two_critical().at(p1({0.4, -0.2})));
  const auto ref = oracle::companion_roots({-3.0, 0.0, 3.0});
  ASSERT_EQ(two.size(), 2u);
  for (int i = 0; i < 2; ++i) EXPECT_LT(std::abs(two[i] - ref[i]), 1e-12);
  EXPECT_LT(std::abs(two[0] + 1.0), 1e-12);
  EXPECT_LT(std::abs(two[1] - 1.0), 1e-12);
}

TEST(MapCore, FilledJuliaExamples) {
  const auto q = testfam::quadratic();
  const auto in = q.in_filled_julia(p1(0.0), Point{0.5}, 100);
  EXPECT_TRUE(in.inside);
  EXPECT_EQ(in.escape_time, -1);

  const auto tight = MapFamily::unicritical(2, ParamBox{0, 0, 0, 0});
  ASSERT_DOUBLE_EQ(tight.escape_radius(), 2.0);
  const auto out = tight.in_filled_julia(p1(0.0), Point{2.0}, 10);
  EXPECT_FALSE(out.inside);
  EXPECT_EQ(out.escape_time, 1);

  // 0.26 lies just right of the cusp at 1/4, so the critical orbit escapes slowly.
  EXPECT_EQ(q.in_filled_julia(p1(0.26), Point{0.0}, 500).inside, oracle::in_mandelbrot(0.26, 10000));
  EXPECT_FALSE(q.in_filled_julia(p1(0.26), Point{0.0}, 500).inside);
  EXPECT_TRUE(q.in_filled_julia(p1(0.25), Point{0.0}, 500).inside);
  EXPECT_TRUE(oracle::in_mandelbrot(0.25, 10000));
  EXPECT_THROW((void)q.in_filled_julia(p1(0.0), Point{0.0}, 0), ValidationError);
}

TEST(MapCore, OutsideDomainThrows) {
  const auto q = testfam::quadratic();
  EXPECT_THROW((void)q.at(p1(5.0)), DomainError);
  EXPECT_THROW((void)q.eval(p1({0.0, -4.5}), Point{0.0}), DomainError);
  EXPECT_NO_THROW((void)q.at(p1({4.0, -4.0})));
}

TEST(MapCore, ProductDegreeIsProductOfComponents) {
  EXPECT_EQ(testfam::product(2, 3).degree(), 6);
  EXPECT_EQ(testfam::product(3, 3).degree(), 9);
  EXPECT_EQ(testfam::skew_quadratic().degree(), 4);
  EXPECT_THROW((void)MapFamily::general({CoeffPoly::parameter(0)}, 1, {ParamBox{-1, 1, -1, 1}}), ValidationError);
}

// Closed-form Jacobians of the second iterate compared with the chain rule.
TEST(MapCore, ChainRuleOnSecondIterate) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  auto rel = [](Complex a, Complex b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };

  const auto cubic = testfam::cubic_two_critical();
  const auto skew = testfam::skew_quadratic();
  for (int t = 0; t < 100; ++t) {
    const Complex s{u(rng), u(rng)};
    const Complex z{u(rng), u(rng)};
    const MapInstance f = cubic.at(p1(s));
    const Point fz = f.eval(Point{z});
    const Complex chain = (f.jacobian(fz) * f.jacobian(Point{z}))(0, 0);
    const Complex y = z * z * z - 3.0 * z + s;
    const Complex exact = (3.0 * y * y - 3.0) * (3.0 * z * z - 3.0);
    EXPECT_LT(rel(chain, exact), 1e-12);

    const Complex ss{0.5 * u(rng) - 0.25, 0.5 * u(rng)};
    const Complex z1{u(rng), u(rng)}, z2{u(rng), u(rng)};
    const MapInstance g = skew.at(p1(ss));
    const Point a{z1, z2};
    const CMatrix j2 = g.jacobian(g.eval(a)) * g.jacobian(a);
    const Complex y1 = z1 * z1 + ss, y2 = z2 * z2 + 0.5 * z1;
    EXPECT_LT(rel(j2(0, 0), 2.0 * y1 * 2.0 * z1), 1e-12);
    EXPECT_LT(rel(j2(0, 1), 0.0), 1e-12);
    EXPECT_LT(rel(j2(1, 0), 2.0 * y2 * 0.5 + 0.5 * 2.0 * z1), 1e-12);
    EXPECT_LT(rel(j2(1, 1), 2.0 * y2 * 2.0 * z2), 1e-12);
  }
}

TEST(MapCore, CriticalCountIsDegreeMinusOne) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int d = 2; d <= 5; ++d) {
    const auto fam = testfam::unicritical(d);
    for (int t = 0; t < 10; ++t) {
      const auto f = fam.at(p1({u(rng), u(rng)}));
      EXPECT_EQ(f.critical_points().total_multiplicity(), static_cast<std::size_t>(d - 1));
    }
  }
  const auto cubic = testfam::cubic_two_critical();
  for (int t = 0; t < 10; ++t) {
    const auto f = cubic.at(p1({u(rng), u(rng)}));
    const auto crit = f.critical_points();
    EXPECT_EQ(crit.total_multiplicity(), 2u);
    for (const auto& c : crit.components) EXPECT_LT(std::abs(f.jacobian_det(c.point)), 1e-10);
  }
}

TEST(MapCore, ShippedFamiliesCertifyEscapeRadius) {
  for (const auto& entry : std::filesystem::directory_iterator(PLBIF_TEST_FAMILY_DIR)) {
    if (entry.path().extension() != ".fam") continue;
    SCOPED_TRACE(entry.path().string());
    const MapFamily fam = load_family(entry.path().string());
    const auto cert = fam.certify_escape_radius();
    EXPECT_TRUE(cert.ok) << "worst ratio " << cert.worst_ratio;
    EXPECT_GT(cert.worst_ratio, 1.0);
    EXPECT_GE(fam.degree(), 2);
  }
}

TEST(MapCore, ProductCriticalSetIsCoordinateHyperplanes) {
  const auto f = testfam::product(2, 3).at(p2(0.1, 0.2));
  const auto crit = f.critical_points();
  EXPECT_EQ(crit.total_multiplicity(), 3u);
  for (const auto& c : crit.components) EXPECT_GE(c.axis, 0);
  EXPECT_NEAR(crit.distance(Point{0.0, 0.5}), 0.0, 1e-12);
  EXPECT_NEAR(crit.distance(Point{0.3, 0.4}), 0.3, 1e-12);
}
