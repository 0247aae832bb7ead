#include <gtest/gtest.h>

#include <plbif/preimage.hpp>

#include <algorithm>
#include <cmath>

#include "families.hpp"
#include "oracles.hpp"

using namespace plbif;
using testfam::p1;
using testfam::p2;

namespace {

std::vector<Complex> first_coords(const AtomCloud& cloud) {
  std::vector<Complex> out;
  for (const auto& p : cloud.points()) out.push_back(p[0]);
  return out;
}

// Greedy matching of two multisets; returns the worst displacement.
double multiset_distance(std::vector<Complex> a, std::vector<Complex> b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (const Complex x : a) {
    auto it = std::min_element(b.begin(), b.end(),
                               [x](Complex u, Complex v) { return std::abs(u - x) < std::abs(v - x); });
    worst = std::max(worst, std::abs(*it - x));
    b.erase(it);
  }
  return worst;
}

Point iterate(const MapInstance& f, Point z, int n) {
  for (int i = 0; i < n; ++i) z = f.eval(z);
  return z;
}

}  // namespace

TEST(Preimage, FiberOfSquare) {
  const auto f = testfam::quadratic().at(p1(0.0));
  const auto fib = fiber(f, Point{4.0});
  ASSERT_EQ(fib.roots.size(), 2u);
  EXPECT_LT(std::abs(fib.roots[0][0] + 2.0), 1e-12);
  EXPECT_LT(std::abs(fib.roots[1][0] - 2.0), 1e-12);
  for (double r : fib.residuals) EXPECT_LE(r, 1e-10 * 4.0);
}

TEST(Preimage, CriticalValueHasDoubleRoot) {
  const auto fib = fiber(testfam::quadratic().at(p1(0.0)), Point{0.0});
  ASSERT_EQ(fib.roots.size(), 2u);
  EXPECT_EQ(fib.roots[0][0], fib.roots[1][0]);
  EXPECT_LT(std::abs(fib.roots[0][0]), 1e-8);
}

TEST(Preimage, CubicFiberMatchesCompanionRoots) {
  const auto f = testfam::cubic_two_critical().at(p1(0.0));
  const auto fib = fiber(f, Point{0.0});
  const auto ref = oracle::companion_roots({0.0, -3.0, 0.0, 1.0});
  ASSERT_EQ(fib.roots.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_LT(std::abs(fib.roots[static_cast<std::size_t>(i)][0] - ref[static_cast<std::size_t>(i)]), 1e-12);
  EXPECT_LT(std::abs(fib.roots[0][0] + std::sqrt(3.0)), 1e-12);
  EXPECT_LT(std::abs(fib.roots[1][0]), 1e-12);
  EXPECT_LT(std::abs(fib.roots[2][0] - std::sqrt(3.0)), 1e-12);
}

TEST(Preimage, RandomFibersMatchCompanionRoots) {
  const auto fam = testfam::cubic_two_critical();
  for (int t = 0; t < 20; ++t) {
    const Complex s{std::cos(t * 1.3), std::sin(t * 0.7)};
    const Complex z{0.5 * std::sin(t * 2.1), 0.5 * std::cos(t * 0.9)};
    const auto fib = fiber(fam.at(p1(s)), Point{z});
    std::vector<Complex> got;
    for (const auto& r : fib.roots) got.push_back(r[0]);
    EXPECT_LT(multiset_distance(got, oracle::companion_roots({s - z, -3.0, 0.0, 1.0})), 1e-10);
  }
}

TEST(Preimage, FiberOutsideVThrows) {
  const auto f = testfam::quadratic().at(p1(0.0));
  EXPECT_THROW((void)fiber(f, Point{100.0}), DomainError);
}

TEST(Preimage, ProductAndSkewFibers) {
  const auto prod = testfam::product(2, 3).at(p2(0.1, {0.0, 0.2}));
  const Point z{0.3, {0.1, -0.4}};
  const auto fp = fiber(prod, z);
  ASSERT_EQ(fp.roots.size(), 6u);
  for (const auto& w : fp.roots) EXPECT_LT(max_distance(prod.eval(w), z), 1e-12);

  const auto skew = testfam::skew_quadratic().at(p1(-0.3));
  const Point y{0.2, {-0.1, 0.3}};
  const auto fs = fiber(skew, y);
  ASSERT_EQ(fs.roots.size(), 4u);
  for (const auto& w : fs.roots) EXPECT_LT(max_distance(skew.eval(w), y), 1e-12);
}

TEST(Preimage, TreeExamples) {
  const auto f = testfam::quadratic().at(p1(0.0));
  const AtomCloud t2 = pullback_tree(f, Point{2.0}, 2);
  ASSERT_EQ(t2.size(), 4u);
  std::vector<Complex> ref;
  for (int j = 0; j < 4; ++j) ref.push_back(std::pow(2.0, 0.25) * std::pow(Complex(0.0, 1.0), j));
  EXPECT_LT(multiset_distance(first_coords(t2), ref), 1e-12);
  for (double w : t2.weights()) EXPECT_EQ(w, 0.25);

  const AtomCloud t3 = pullback_tree(f, Point{1.0}, 3);
  ASSERT_EQ(t3.size(), 8u);
  ref.clear();
  for (int j = 0; j < 8; ++j) ref.push_back(std::polar(1.0, 2.0 * kPi * j / 8.0));
  EXPECT_LT(multiset_distance(first_coords(t3), ref), 1e-12);
  for (double w : t3.weights()) EXPECT_EQ(w, 0.125);

  const auto g = testfam::quadratic().at(p1(-1.0));
  const AtomCloud b = pullback_tree(g, Point{0.0}, 2);
  const auto quartic = oracle::companion_roots({0.0, 0.0, -2.0, 0.0, 1.0});
  EXPECT_LT(multiset_distance(first_coords(b), quartic), 1e-7);
  EXPECT_LT(multiset_distance(first_coords(b), {0.0, 0.0, std::sqrt(2.0), -std::sqrt(2.0)}), 1e-7);
}

TEST(Preimage, TreeBudget) {
  const auto f = testfam::quadratic().at(p1(0.0));
  TreeOptions options;
  options.node_budget = 1000;
  EXPECT_THROW((void)pullback_tree(f, Point{2.0}, 10, options), BudgetError);
  EXPECT_NO_THROW((void)pullback_tree(f, Point{2.0}, 9, options));
  EXPECT_EQ(tree_size(2, 10), 1024u);
  EXPECT_EQ(tree_size(3, 4), 81u);
  EXPECT_EQ(tree_size(2, 200), std::numeric_limits<std::size_t>::max());
}

TEST(Preimage, WalkExamples) {
  const auto f = testfam::quadratic().at(p1(0.0));
  const AtomCloud one = inverse_walk(f, Point{1.0}, 10, 1, 42);
  ASSERT_EQ(one.size(), 1u);
  const Complex w = one.point(0)[0];
  EXPECT_NEAR(std::abs(w), 1.0, 1e-12);
  EXPECT_LT(std::abs(std::pow(w, 1024) - 1.0), 1e-9);

  const auto skew = testfam::skew_quadratic().at(p1(-0.2));
  const Point z0{0.3, 0.1};
  const AtomCloud zero = inverse_walk(skew, z0, 0, 16, 3);
  ASSERT_EQ(zero.size(), 16u);
  for (const auto& p : zero.points()) EXPECT_EQ(p, z0);

  const AtomCloud many = inverse_walk(f, Point{2.0}, 20, 5000, 9);
  double mean = 0.0;
  for (std::size_t i = 0; i < many.size(); ++i) mean += many.weight(i) * std::log(std::abs(many.point(i)[0]));
  EXPECT_NEAR(mean, std::ldexp(std::log(2.0), -20), 1e-15);
}

TEST(Preimage, WalkIsReproducibleAndSeedDependent) {
  const auto f = testfam::quadratic().at(p1({-0.12, 0.75}));
  const AtomCloud a = inverse_walk(f, Point{1.5}, 12, 200, 5);
  const AtomCloud b = inverse_walk(f, Point{1.5}, 12, 200, 5);
  const AtomCloud c = inverse_walk(f, Point{1.5}, 12, 200, 6);
  EXPECT_EQ(a.points(), b.points());
  EXPECT_NE(a.points(), c.points());
}

TEST(Preimage, TreeAtomsMapBackToBase) {
  const Point z0{{0.4, 0.3}};
  for (const Complex c : {Complex(0.0), Complex(-1.0), Complex(-0.12, 0.75), Complex(0.3, 0.5)}) {
    const auto f = testfam::quadratic().at(p1(c));
    for (int n : {3, 6, 9}) {
      const AtomCloud tree = pullback_tree(f, z0, n);
      for (const auto& w : tree.points()) {
        EXPECT_LE(max_distance(iterate(f, w, n), z0), n * 1e-10 * 10);
        EXPECT_TRUE(f.in_V(w));
        EXPECT_TRUE(f.in_V(f.eval(w)));
      }
    }
  }
}

TEST(Preimage, TreeComposition) {
  const auto f = testfam::quadratic().at(p1({-0.5, 0.4}));
  const Point z0{1.1};
  for (int a = 1; a <= 3; ++a) {
    for (int b = 1; a + b <= 6; ++b) {
      const AtomCloud full = pullback_tree(f, z0, a + b);
      std::vector<Complex> composed;
      const AtomCloud outer = pullback_tree(f, z0, b);
      for (const auto& mid : outer.points()) {
        const AtomCloud inner = pullback_tree(f, mid, a);
        for (const auto& w : inner.points()) composed.push_back(w[0]);
      }
      EXPECT_LT(multiset_distance(first_coords(full), composed), 1e-9) << a << "+" << b;
    }
  }
}

TEST(Preimage, TreeWeightsAreNormalized) {
  const auto f = testfam::product(2, 3).at(p2(-0.2, 0.1));
  const AtomCloud tree = pullback_tree(f, Point{0.5, 0.5}, 4);
  EXPECT_EQ(tree.size(), 1296u);
  EXPECT_NO_THROW(tree.validate(f.escape_radius()));
}
