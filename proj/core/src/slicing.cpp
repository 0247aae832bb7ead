#include "plbif/slicing.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "plbif/parallel.hpp"

namespace plbif {

double HorizontalCurrentSamples::mass_spread() const {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < slices.size(); ++i) {
    if (status[i] != NodeStatus::ok) continue;
    const double m = slices[i].total_weight();
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  return hi >= lo ? hi - lo : 0.0;
}

double HorizontalCurrentSamples::max_atom_norm() const {
  double m = 0.0;
  for (std::size_t i = 0; i < slices.size(); ++i)
    if (status[i] == NodeStatus::ok) m = std::max(m, slices[i].max_norm());
  return m;
}

void HorizontalCurrentSamples::write_archive(const std::string& directory) const {
  std::filesystem::create_directories(directory);
  for (std::size_t i = 0; i < slices.size(); ++i)
    if (status[i] == NodeStatus::ok) slices[i].write_csv(fmt::format("{}/node_{}.csv", directory, i));
  std::ofstream manifest(directory + "/manifest.txt", std::ios::binary);
  manifest << "grid=" << grid.describe() << '\n';
  manifest << "nodes=" << slices.size() << '\n';
  manifest << "depth=" << depth << '\n';
  manifest << "base_atoms=" << base.size() << '\n';
  for (std::size_t a = 0; a < base.size(); ++a)
    manifest << fmt::format("base_{}={};{:.17g}\n", a, format_point(base.point(a).span()), base.weight(a));
  manifest << "seed=" << base.metadata().seed << '\n';
  for (std::size_t i = 0; i < slices.size(); ++i)
    manifest << fmt::format("node_{}={};{}\n", i, format_point(grid.param(i).span()), to_string(status[i]));
}

HorizontalCurrentSamples build_current(const MapFamily& family, const GridSpec& grid, const AtomCloud& theta, int n,
                                       const TreeOptions& options) {
  check_grid_in_domain(family, grid);
  if (theta.empty()) throw ValidationError("build_current: empty base measure");
  for (const auto& z : theta.points())
    if (z.dim() != family.fiber_dim() || z.max_norm() > family.escape_radius())
      throw DomainError("build_current: base atom " + format_point(z.span()) + " is not in V");
  HorizontalCurrentSamples current;
  current.grid = grid;
  current.depth = n;
  current.base = theta;
  current.slices.assign(grid.size(), AtomCloud(family.fiber_dim()));
  current.status.assign(grid.size(), NodeStatus::ok);
  parallel_for(grid.size(), [&](std::size_t i) {
    try {
      const MapInstance f = family.at(grid.param(i));
      AtomCloud slice(family.fiber_dim());
      for (std::size_t a = 0; a < theta.size(); ++a) {
        const AtomCloud tree = pullback_tree(f, theta.point(a), n, options);
        slice.reserve(slice.size() + tree.size());
        for (std::size_t t = 0; t < tree.size(); ++t) slice.add(tree.point(t), tree.weight(t) * theta.weight(a));
      }
      slice.metadata().depth = n;
      slice.metadata().method = "slice";
      slice.metadata().parameter = grid.param(i);
      current.slices[i] = std::move(slice);
    } catch (const Error&) {
      current.status[i] = NodeStatus::failed;
    }
  });
  return current;
}

SliceFormulaResult slice_formula_check(const HorizontalCurrentSamples& current, const SliceFunction& psi,
                                       const ParamWeight& omega) {
  const double cell = current.grid.cell_measure();
  const std::size_t nodes = current.slices.size();
  // lhs: inner slice integrals first.
  std::vector<double> per_node(nodes, 0.0);
  parallel_for(nodes, [&](std::size_t i) {
    if (current.status[i] != NodeStatus::ok) return;
    const Param s = current.grid.param(i);
    const double w = omega(s);
    if (w == 0.0) return;
    const auto& slice = current.slices[i];
    std::vector<double> v(slice.size());
    for (std::size_t a = 0; a < slice.size(); ++a) v[a] = slice.weight(a) * psi(s, slice.point(a));
    per_node[i] = w * cell * pairwise_sum(v.data(), v.size());
  });
  SliceFormulaResult result;
  result.lhs = pairwise_sum(per_node.data(), per_node.size());
  // rhs: one flat sum over (node, atom) with the product weight per term.
  std::vector<double> flat;
  for (std::size_t i = 0; i < nodes; ++i) {
    if (current.status[i] != NodeStatus::ok) continue;
    const Param s = current.grid.param(i);
    const double w = omega(s);
    const auto& slice = current.slices[i];
    for (std::size_t a = 0; a < slice.size(); ++a) flat.push_back(w * cell * slice.weight(a) * psi(s, slice.point(a)));
  }
  result.rhs = pairwise_sum(flat.data(), flat.size());
  result.residual = std::abs(result.lhs - result.rhs);
  for (double& t : flat) t = std::abs(t);
  result.scale = pairwise_sum(flat.data(), flat.size());
  return result;
}

SlicePshResult slice_psh_field(const HorizontalCurrentSamples& current, const SliceFunction& psi, double epsilon) {
  SlicePshResult out;
  out.field.grid = current.grid;
  out.field.quantity = "slice_integral";
  out.field.values.assign(current.slices.size(), std::nan(""));
  out.field.status = current.status;
  parallel_for(current.slices.size(), [&](std::size_t i) {
    if (current.status[i] != NodeStatus::ok) return;
    const Param s = current.grid.param(i);
    try {
      out.field.values[i] = integrate(current.slices[i], [&](const Point& z) { return psi(s, z); }).value;
    } catch (const Error&) {
      out.field.status[i] = NodeStatus::failed;
    }
  });
  if (current.grid.m() == 1) out.submean = submean_check(out.field, epsilon);
  return out;
}

std::vector<NamedObservable> test_function_library() {
  std::vector<NamedObservable> lib{
      {"one", [](const Point&) { return 1.0; }},
      {"re_z", [](const Point& z) { return z[0].real(); }},
      {"im_z", [](const Point& z) { return z[0].imag(); }},
      {"abs2_z", [](const Point& z) { return z.squared_norm(); }},
      {"log_eps_abs2_z", [](const Point& z) { return std::log(1e-6 + z.squared_norm()); }},
  };
  const Complex anchors[3] = {{0.5, 0.0}, {-0.3, 0.7}, {0.0, -1.2}};
  for (int j = 0; j < 3; ++j) {
    const Complex a = anchors[j];
    lib.push_back({fmt::format("abs2_z_minus_a{}", j), [a](const Point& z) { return std::norm(z[0] - a); }});
  }
  return lib;
}

EquilibriumCurrentReport equilibrium_current_check(const MapFamily& family, const GridSpec& grid,
                                                   const std::vector<int>& depths,
                                                   const CurrentCheckOptions& options) {
  if (depths.empty()) throw ValidationError("equilibrium_current_check: no depths");
  for (std::size_t i = 1; i < depths.size(); ++i)
    if (depths[i] <= depths[i - 1]) throw ValidationError("equilibrium_current_check: depths must increase");
  check_grid_in_domain(family, grid);
  std::vector<NamedObservable> observables = options.observables;
  if (observables.empty()) {
    for (auto& o : test_function_library())
      if (o.name == "abs2_z" || o.name == "re_z" || o.name == "im_z" || o.name == "log_eps_abs2_z")
        observables.push_back(o);
  }
  const int k = family.fiber_dim();
  const Point base = options.base ? *options.base : family.generic_base_point();
  Point ref_base(k);
  if (options.reference_base) {
    ref_base = *options.reference_base;
  } else {
    for (int i = 0; i < k; ++i) ref_base[i] = std::min(3.0, 0.9 * family.escape_radius());
  }
  const int ref_depth = options.reference_depth > 0 ? options.reference_depth : depths.back();

  EquilibriumCurrentReport report;
  report.depths = depths;
  report.gaps.assign(grid.size(), std::vector<double>(depths.size(), 0.0));
  report.monotone.assign(grid.size(), 1);
  parallel_for(grid.size(), [&](std::size_t i) {
    const MapInstance f = family.at(grid.param(i));
    CloudOptions ref_options;
    ref_options.base = ref_base;
    const AtomCloud reference = equilibrium_cloud(f, ref_depth, ref_options);
    std::vector<double> ref_values;
    for (const auto& o : observables) ref_values.push_back(integrate(reference, o.fn).value);
    for (std::size_t d = 0; d < depths.size(); ++d) {
      const AtomCloud slice = pullback_tree(f, base, depths[d]);
      double gap = 0.0;
      for (std::size_t o = 0; o < observables.size(); ++o)
        gap = std::max(gap, std::abs(integrate(slice, observables[o].fn).value - ref_values[o]));
      report.gaps[i][d] = gap;
      if (d > 0 && gap > report.gaps[i][d - 1] + options.monotone_tol) report.monotone[i] = 0;
    }
  });
  report.all_monotone = std::all_of(report.monotone.begin(), report.monotone.end(), [](char m) { return m != 0; });
  return report;
}

}  // namespace plbif
