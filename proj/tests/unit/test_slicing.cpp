#include <gtest/gtest.h>

#include <plbif/slicing.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "families.hpp"

using namespace plbif;
using testfam::p1;

namespace {

AtomCloud dirac(Point z) { return AtomCloud::uniform(z.dim(), {z}); }

const GridSpec kGrid = GridSpec::plane(-0.6, 0.2, -0.4, 0.4, 9, 9);

double gaussian(const Param& s) { return std::exp(-std::norm(s[0] + 0.2) / 0.05); }

}  // namespace

TEST(Slicing, DepthZeroReproducesBase) {
  const auto cur = build_current(testfam::quadratic(), kGrid, dirac(Point{2.0}), 0);
  ASSERT_EQ(cur.slices.size(), kGrid.size());
  for (const auto& s : cur.slices) {
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s.point(0)[0], Complex(2.0));
    EXPECT_EQ(s.weight(0), 1.0);
  }
}

TEST(Slicing, SliceAtOriginNearCircle) {
  const auto cur = build_current(testfam::quadratic(), GridSpec::plane(0, 0, 0, 0, 1, 1), dirac(Point{2.0}), 8);
  ASSERT_EQ(cur.slices[0].size(), 256u);
  for (const auto& z : cur.slices[0].points()) EXPECT_NEAR(std::abs(z[0]), std::pow(2.0, 1.0 / 256), 1e-12);
}

TEST(Slicing, MassIsConstantAcrossNodes) {
  const GridSpec line = GridSpec::plane(-1.5, 0.25, 0, 0, 41, 1);
  const auto cur = build_current(testfam::quadratic(), line, dirac(Point{2.0}), 8);
  ASSERT_EQ(cur.slices.size(), 41u);
  for (const auto& s : cur.slices) EXPECT_NEAR(s.total_weight(), 1.0, 1e-12);
  EXPECT_LE(cur.mass_spread(), 1e-12);

  AtomCloud net(1);
  net.add(Point{2.0}, 0.25);
  net.add(Point{{0.0, 2.5}}, 0.5);
  net.add(Point{-3.0}, 0.25);
  const auto cn = build_current(testfam::quadratic(), kGrid, net, 5);
  for (const auto& s : cn.slices) EXPECT_EQ(s.size(), 96u);
  EXPECT_LE(cn.mass_spread(), 1e-12);
}

TEST(Slicing, AtomsStayHorizontal) {
  const auto fam = testfam::quadratic();
  const auto cur = build_current(fam, kGrid, dirac(Point{3.0}), 8);
  const double margin = 0.5 * fam.escape_radius();
  EXPECT_LE(cur.max_atom_norm(), fam.escape_radius() - margin);
  EXPECT_THROW((void)build_current(fam, kGrid, dirac(Point{100.0}), 2), DomainError);
}

TEST(Slicing, FormulaWithConstantTestFunction) {
  const auto cur = build_current(testfam::quadratic(), kGrid, dirac(Point{2.0}), 6);
  const auto r = slice_formula_check(cur, [](const Param&, const Point&) { return 1.0; }, gaussian);
  double expected = 0.0;
  for (std::size_t i = 0; i < kGrid.size(); ++i) expected += gaussian(kGrid.param(i)) * kGrid.cell_measure();
  EXPECT_NEAR(r.lhs, expected, 1e-12);
  EXPECT_NEAR(r.rhs, expected, 1e-12);
}

TEST(Slicing, FormulaWithNodeIndicator) {
  const auto cur = build_current(testfam::quadratic(), kGrid, dirac(Point{2.0}), 6);
  const std::size_t node = 40;
  const Param target = kGrid.param(node);
  auto indicator = [&](const Param& s) { return max_distance(s, target) < 1e-12 ? 1.0 : 0.0; };
  auto psi = [](const Param&, const Point& z) { return z.squared_norm(); };
  const auto r = slice_formula_check(cur, psi, indicator);
  const double cloud = integrate(cur.slices[node], [](const Point& z) { return z.squared_norm(); }).value;
  EXPECT_NEAR(r.lhs, cloud * kGrid.cell_measure(), 1e-14);
  EXPECT_LE(r.relative_residual(), 1e-10);
}

TEST(Slicing, FormulaHoldsForLibrary) {
  const auto cur = build_current(testfam::quadratic(), kGrid, dirac(Point{{1.5, 0.5}}), 8);
  for (const auto& obs : test_function_library()) {
    const auto r = slice_formula_check(cur, [&](const Param&, const Point& z) { return obs.fn(z); }, gaussian);
    EXPECT_LE(r.relative_residual(), 1e-10) << obs.name;
  }
  const auto mixed =
      slice_formula_check(cur, [](const Param& s, const Point& z) { return std::norm(z[0] - s[0]); }, gaussian);
  EXPECT_LE(mixed.relative_residual(), 1e-10);
}

TEST(Slicing, RefinementIsCauchy) {
  auto psi = [](const Param&, const Point& z) { return z.squared_norm(); };
  std::vector<double> lhs;
  for (int n : {4, 6, 8})
    lhs.push_back(slice_formula_check(build_current(testfam::quadratic(), kGrid, dirac(Point{2.0}), n), psi, gaussian).lhs);
  EXPECT_LT(std::abs(lhs[2] - lhs[1]), std::abs(lhs[1] - lhs[0]));
}

TEST(Slicing, PshSliceFields) {
  const auto cur = build_current(testfam::quadratic(), kGrid, dirac(Point{2.0}), 8);
  const auto sq = slice_psh_field(cur, [](const Param&, const Point& z) { return z.squared_norm(); });
  EXPECT_TRUE(sq.submean.violations.empty());
  EXPECT_GT(sq.submean.checked, 0u);

  const auto re = slice_psh_field(cur, [](const Param&, const Point& z) { return z[0].real(); });
  EXPECT_TRUE(re.submean.violations.empty());
  const auto neg = slice_psh_field(cur, [](const Param&, const Point& z) { return -z[0].real(); });
  EXPECT_TRUE(neg.submean.violations.empty());

  const auto one = slice_psh_field(cur, [](const Param&, const Point&) { return 1.0; });
  EXPECT_TRUE(one.submean.violations.empty());
  for (double v : one.field.values) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Slicing, EquilibriumCurrentAtOrigin) {
  CurrentCheckOptions o;
  o.reference_base = Point{3.0};
  const auto rep = equilibrium_current_check(testfam::quadratic(), GridSpec::plane(0, 0, 0, 0, 1, 1), {6, 8, 10}, o);
  ASSERT_EQ(rep.gaps.size(), 1u);
  EXPECT_LE(rep.gaps[0].back(), 5e-3);
  EXPECT_TRUE(rep.all_monotone);
}

TEST(Slicing, EquilibriumCurrentMonotoneInStableRegion) {
  const auto rep = equilibrium_current_check(testfam::quadratic(), GridSpec::plane(-0.1, 0.1, -0.1, 0.1, 3, 3),
                                             {6, 8, 10});
  for (const auto& g : rep.gaps) EXPECT_LT(g.back(), 0.5 * g.front());
  EXPECT_TRUE(rep.all_monotone);
}

TEST(Slicing, ConstantObservableHasNoGap) {
  CurrentCheckOptions o;
  o.observables = {{"one", [](const Point&) { return 1.0; }}};
  const auto rep = equilibrium_current_check(testfam::quadratic(), kGrid, {4, 6}, o);
  for (const auto& g : rep.gaps)
    for (double x : g) EXPECT_NEAR(x, 0.0, 1e-12);
  EXPECT_THROW((void)equilibrium_current_check(testfam::quadratic(), kGrid, {6, 4}), ValidationError);
}

TEST(Slicing, BasePointIndependence) {
  const auto fam = testfam::quadratic();
  const auto a = build_current(fam, kGrid, dirac(Point{2.0}), 10);
  const auto b = build_current(fam, kGrid, dirac(Point{{-1.0, 2.5}}), 10);
  for (const auto& obs : test_function_library()) {
    for (std::size_t i = 0; i < kGrid.size(); ++i) {
      const double va = integrate(a.slices[i], obs.fn).value;
      const double vb = integrate(b.slices[i], obs.fn).value;
      EXPECT_NEAR(va, vb, 1e-2) << obs.name << " node " << i;
    }
  }
}

TEST(Slicing, ArchiveWritesCloudsAndManifest) {
  const auto dir = std::filesystem::temp_directory_path() / "plbif_slice_archive_test";
  std::filesystem::remove_all(dir);
  const GridSpec g = GridSpec::plane(-0.2, 0.2, 0, 0, 3, 1);
  build_current(testfam::quadratic(), g, dirac(Point{2.0}), 3).write_archive(dir.string());
  for (int i = 0; i < 3; ++i) EXPECT_TRUE(std::filesystem::exists(dir / ("node_" + std::to_string(i) + ".csv")));
  std::ifstream in(dir / "manifest.txt");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_NE(text.find("depth=3"), std::string::npos);
  EXPECT_NE(text.find("grid="), std::string::npos);
  EXPECT_NE(text.find("seed="), std::string::npos);
  const AtomCloud back = AtomCloud::read_csv((dir / "node_1.csv").string());
  EXPECT_EQ(back.size(), 8u);
  std::filesystem::remove_all(dir);
}
