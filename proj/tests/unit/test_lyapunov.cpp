#include <gtest/gtest.h>

#include <plbif/family_io.hpp>
#include <plbif/lyapunov.hpp>

#include <cmath>
#include <filesystem>
#include <random>

#include "families.hpp"
#include "oracles.hpp"

using namespace plbif;
using testfam::p1;
using testfam::p2;

namespace {

const double kLog2 = std::log(2.0);
const double kLog3 = std::log(3.0);

CloudOptions periodic() {
  CloudOptions o;
  o.method = CloudMethod::periodic;
  return o;
}

ExponentEstimate make_estimate(std::vector<double> chi) {
  ExponentEstimate e;
  double acc = 0.0;
  for (double c : chi) e.L.push_back(acc += c);
  e.std_error.assign(chi.size(), 0.0);
  return e;
}

}  // namespace

TEST(Lyapunov, PsiOnUnitCircle) {
  const auto f = testfam::quadratic().at(p1(0.0));
  // Rounding off the circle doubles each step, so the error budget grows like 2^n eps.
  for (int n : {1, 5, 20})
    for (double t : {0.1, 1.0, 2.5})
      EXPECT_NEAR(psi_pn(f, Point{std::polar(1.0, t)}, n, 1), kLog2, 1e-13 + std::ldexp(1e-15, n));
}

TEST(Lyapunov, PsiOnProductTorus) {
  const auto f = testfam::product(2, 3).at(p2(0.0, 0.0));
  const Point z{std::polar(1.0, 0.3), std::polar(1.0, 1.9)};
  for (int n : {1, 4, 10}) {
    EXPECT_NEAR(psi_pn(f, z, n, 2), std::log(6.0), 1e-12);
    EXPECT_NEAR(psi_pn(f, z, n, 1), kLog3, 1e-12);
  }
}

TEST(Lyapunov, PsiEscapeAndCritical) {
  const auto f = testfam::quadratic().at(p1(0.0));
  EXPECT_THROW((void)psi_pn(f, Point{5.0}, 10, 1), EscapeError);
  EXPECT_EQ(psi_pn(f, Point{0.0}, 3, 1), -INFINITY);
}

TEST(Lyapunov, FrameStaysOrthonormal) {
  const auto f = testfam::skew_quadratic().at(p1(-0.4));
  OrthoFrame frame = OrthoFrame::random(2, 2, 99);
  Point z{{0.3, 0.2}, {-0.4, 0.1}};
  for (int i = 0; i < 30 && f.in_V(z); ++i) {
    frame.push(f.jacobian(z));
    EXPECT_LT(frame.orthonormality_error(), 1e-10);
    z = f.eval(z);
  }
  EXPECT_TRUE(std::isfinite(frame.log_volume()));
}

TEST(Lyapunov, SpatialSumsExamples) {
  const auto sq = testfam::quadratic().at(p1(0.0));
  const AtomCloud circle = equilibrium_cloud(sq, 10);
  const auto s = partial_sums_spatial(sq, circle, 1, 4);
  EXPECT_NEAR(s.phi_n, kLog2, 1e-6);
  EXPECT_NEAR(s.phi_2n, kLog2, 1e-6);

  const auto prod = testfam::product(2, 2).at(p2(0.0, 0.0));
  const auto t = partial_sums_spatial(prod, equilibrium_cloud(prod, 4, periodic()), 2, 4);
  EXPECT_NEAR(t.phi_n, 2.0 * kLog2, 1e-3);

  const auto out = testfam::quadratic().at(p1(3.0));
  const auto u = partial_sums_spatial(out, equilibrium_cloud(out, 10, periodic()), 1, 8);
  EXPECT_NEAR(u.phi_2n, oracle::chi_quadratic(3.0), 1e-2);
}

TEST(Lyapunov, OrbitEstimatorExamples) {
  const auto sq = testfam::quadratic().at(p1(0.0));
  // Orbits on the circle are chaotic; 20 steps keep the rounding drift near 2^20 eps.
  const auto o = partial_sums_orbit(sq, equilibrium_cloud(sq, 8), 1, 20, 0, 64);
  EXPECT_NEAR(o.value, kLog2, 1e-9);
  EXPECT_EQ(o.discarded, 0u);

  const auto basilica = testfam::quadratic().at(p1(-1.0));
  const AtomCloud cloud = equilibrium_cloud(basilica, 12, periodic());
  // Numerical orbits fall off J into a basin after about 50 expanding steps.
  const auto orbit = partial_sums_orbit(basilica, cloud, 1, 32, 0, 512);
  const IntegralResult spatial = sum_via_jacobian(basilica, cloud);
  std::vector<double> v;
  for (const auto& z : cloud.points()) v.push_back(std::log(std::abs(basilica.jacobian_det(z))));
  const SampleStats st = sample_stats(cloud, v);
  EXPECT_NEAR(orbit.value, spatial.value, 2.0 * std::hypot(orbit.std_error, st.std_error));

  const Complex a = oracle::cardioid_point(0.5), b(-1.0);
  const auto prod = testfam::product(2, 2).at(p2(a, b));
  const AtomCloud pc = equilibrium_cloud(prod, 6, periodic());
  const auto po = partial_sums_orbit(prod, pc, 2, 6, 0, pc.size());
  const auto fa = testfam::quadratic().at(p1(a));
  const auto fb = testfam::quadratic().at(p1(b));
  const double chi_a = sum_via_jacobian(fa, equilibrium_cloud(fa, 6, periodic())).value;
  const double chi_b = sum_via_jacobian(fb, equilibrium_cloud(fb, 6, periodic())).value;
  EXPECT_NEAR(po.value, chi_a + chi_b, 2.0 * po.std_error + 1e-9);
}

TEST(Lyapunov, JacobianIntegralExamples) {
  const auto sq = testfam::quadratic().at(p1(0.0));
  EXPECT_NEAR(sum_via_jacobian(sq, equilibrium_cloud(sq, 12)).value, kLog2, 1e-12);
  const auto prod = testfam::product(2, 3).at(p2(0.0, 0.0));
  EXPECT_NEAR(sum_via_jacobian(prod, equilibrium_cloud(prod, 5, periodic())).value, kLog2 + kLog3, 1e-9);
  const auto out = testfam::quadratic().at(p1(3.0));
  EXPECT_NEAR(sum_via_jacobian(out, equilibrium_cloud(out, 12)).value, oracle::chi_quadratic(3.0), 1e-2);
}

TEST(Lyapunov, TruncatedSumExamples) {
  EXPECT_NEAR(truncated_sum(make_estimate({kLog2}), 1, 0.0), kLog2, 1e-15);
  EXPECT_NEAR(truncated_sum(make_estimate({kLog2, -1.0}), 2, 0.0), kLog2, 1e-15);
  EXPECT_NEAR(truncated_sum(make_estimate({kLog3, kLog2}), 2, 1.0), kLog3 + 1.0, 1e-15);
  EXPECT_NEAR(truncated_sum(make_estimate({kLog3, kLog2}), 2, -INFINITY), kLog3 + kLog2, 1e-15);
  EXPECT_THROW((void)truncated_sum(make_estimate({kLog2}), 2, 0.0), ValidationError);
}

TEST(Lyapunov, CriticalPotentialIdentity) {
  const auto sq = testfam::quadratic().at(p1(0.0));
  EXPECT_NEAR(critical_potential(sq, equilibrium_cloud(sq, 12), 0).value, 0.0, 1e-12);

  for (const Complex c : {Complex(-1.0), Complex(-0.12, 0.75), Complex(0.3, -0.2), Complex(3.0)}) {
    const auto f = testfam::quadratic().at(p1(c));
    const AtomCloud cloud = equilibrium_cloud(f, 12);
    EXPECT_NEAR(kLog2 + critical_potential(f, cloud, 0).value, sum_via_jacobian(f, cloud).value, 1e-6);
  }
  const auto out = testfam::quadratic().at(p1(3.0));
  EXPECT_NEAR(critical_potential(out, equilibrium_cloud(out, 12), 0).value, oracle::green_at_zero(3.0), 1e-2);

  const auto cubic = testfam::cubic_two_critical().at(p1({0.3, 0.2}));
  const AtomCloud cc = equilibrium_cloud(cubic, 8);
  ASSERT_EQ(critical_points_1d(cubic).size(), 2u);
  const double lam = critical_potential(cubic, cc, 0).value + critical_potential(cubic, cc, 1).value;
  EXPECT_NEAR(lam + kLog3, sum_via_jacobian(cubic, cc).value, 1e-6);
}

TEST(Lyapunov, DecreasingDyadicSubsequence) {
  struct Case {
    MapFamily family;
    Param s;
    int p;
    int depth;
  };
  std::vector<Case> cases{
      {testfam::quadratic(), p1(-1.0), 1, 10},
      {testfam::quadratic(), p1({-0.12, 0.75}), 1, 10},
      {testfam::cubic_two_critical(), p1({0.2, 0.1}), 1, 6},
      {testfam::product(2, 3), p2(-1.0, {0.1, 0.1}), 1, 4},
      {testfam::product(2, 3), p2(-1.0, {0.1, 0.1}), 2, 4},
  };
  for (const auto& c : cases) {
    const MapInstance f = c.family.at(c.s);
    const AtomCloud cloud = equilibrium_cloud(f, c.depth, periodic());
    for (int n : {1, 2, 4, 8}) {
      const auto sums = partial_sums_spatial(f, cloud, c.p, n);
      EXPECT_LE(sums.phi_2n, sums.phi_n + 1e-6) << to_string(c.family.kind()) << " p=" << c.p << " n=" << n;
    }
  }
}

TEST(Lyapunov, Submultiplicativity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  const auto prod = testfam::product(2, 3).at(p2(-0.2, {0.1, 0.2}));
  const auto skew = testfam::skew_quadratic().at(p1(-0.3));
  for (const MapInstance* f : {&prod, &skew}) {
    for (int t = 0; t < 20; ++t) {
      Point z{{u(rng), u(rng)}, {u(rng), u(rng)}};
      for (int p = 1; p <= 2; ++p) {
        const int n = 3, m = 4;
        Point fn = z;
        for (int i = 0; i < n; ++i) fn = f->eval(fn);
        const double lhs = psi_pn(*f, z, m + n, p) * (m + n);
        const double rhs = psi_pn(*f, z, n, p) * n + psi_pn(*f, fn, m, p) * m;
        EXPECT_LE(lhs, rhs + 1e-9) << "p=" << p;
      }
    }
  }
}

TEST(Lyapunov, EstimatesAreOrderedAndBounded) {
  std::vector<std::pair<MapFamily, Param>> cases{
      {testfam::quadratic(), p1(0.0)},
      {testfam::quadratic(), p1(-1.0)},
      {testfam::quadratic(), p1({0.3, 0.5})},
      {testfam::product(2, 3), p2(-1.0, 0.0)},
      {testfam::product(2, 3), p2({0.25, 0.1}, {-0.3, 0.4})},
      {testfam::skew_quadratic(), p1(-0.5)},
  };
  for (const auto& [fam, s] : cases) {
    const MapInstance f = fam.at(s);
    const int depth = f.degree() > 2 ? 5 : 10;
    const AtomCloud cloud = equilibrium_cloud(f, depth);
    const ExponentEstimate e = estimate_exponents(f, cloud);
    EXPECT_TRUE(e.ordered()) << to_string(fam.kind());
    EXPECT_TRUE(e.satisfies_degree_bound(f.degree())) << to_string(fam.kind());
  }
}

TEST(Lyapunov, ProductAdditivityWithPeriodicClouds) {
  const Complex a = oracle::cardioid_point(std::polar(0.6, 1.0));
  const Complex b = oracle::cubic_attracting_parameter(std::polar(0.5, 2.0));
  const int N = 6;
  const auto prod = testfam::product(2, 3).at(p2(a, b));
  const AtomCloud cloud = equilibrium_cloud(prod, N, periodic());
  const ExponentEstimate e = estimate_exponents(prod, cloud);
  const auto fa = testfam::quadratic().at(p1(a));
  const auto fb = testfam::unicritical(3).at(p1(b));
  const double chi_a = sum_via_jacobian(fa, equilibrium_cloud(fa, N, periodic())).value;
  const double chi_b = sum_via_jacobian(fb, equilibrium_cloud(fb, N, periodic())).value;
  EXPECT_NEAR(e.L[1], chi_a + chi_b, 1e-9);
  EXPECT_NEAR(e.L[0], std::max(chi_a, chi_b), 2.0 * e.std_error[0] + 1e-6);
}

TEST(Lyapunov, ShippedFamiliesSatisfyInvariants) {
  for (const auto& entry : std::filesystem::directory_iterator(PLBIF_TEST_FAMILY_DIR)) {
    if (entry.path().extension() != ".fam") continue;
    SCOPED_TRACE(entry.path().string());
    const MapFamily fam = load_family(entry.path().string());
    for (const Param& s : fam.domain_samples(2)) {
      const MapInstance f = fam.at(s);
      int depth = 1;
      while (tree_size(f.degree(), depth + 1) <= 4096) ++depth;
      const AtomCloud cloud = equilibrium_cloud(f, depth);
      const ExponentEstimate e = estimate_exponents(f, cloud);
      EXPECT_TRUE(e.ordered());
      EXPECT_TRUE(e.satisfies_degree_bound(f.degree()));
    }
  }
}
