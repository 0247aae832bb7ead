#pragma once

#include <functional>
#include <string>
#include <vector>

#include "plbif/atom_cloud.hpp"
#include "plbif/bifurcation.hpp"
#include "plbif/equilibrium.hpp"
#include "plbif/field.hpp"
#include "plbif/map_family.hpp"

namespace plbif {

/// A horizontal current over the parameter lattice stored slice by slice:
/// node cloud = d_t^{-n} (f_s^n)^* theta for a shared base measure theta.
struct HorizontalCurrentSamples {
  GridSpec grid;
  std::vector<AtomCloud> slices;
  std::vector<NodeStatus> status;
  int depth = 0;
  AtomCloud base;

  /// max - min of slice masses over ok nodes.
  double mass_spread() const;
  /// Largest atom max-norm over all slices.
  double max_atom_norm() const;

  /// One cloud CSV per node (node_<index>.csv) plus manifest.txt.
  void write_archive(const std::string& directory) const;
};

/// theta as a cloud: a point mass or a finite weighted net in V.
HorizontalCurrentSamples build_current(const MapFamily& family, const GridSpec& grid, const AtomCloud& theta, int n,
                                       const TreeOptions& options = {});

using SliceFunction = std::function<double(const Param&, const Point&)>;
using ParamWeight = std::function<double(const Param&)>;

struct SliceFormulaResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  /// Sum of |term| over all (node, atom) terms: the rounding scale of both sums.
  double scale = 0.0;
  double relative_residual() const { return scale > 0.0 ? residual / scale : residual; }
};

/// lhs: sum over nodes of Omega(s) h^{2m} times the slice integral of psi(s, .);
/// rhs: the same double sum accumulated atom by atom over (node, atom) pairs.
SliceFormulaResult slice_formula_check(const HorizontalCurrentSamples& current, const SliceFunction& psi,
                                       const ParamWeight& omega);

struct SlicePshResult {
  ScalarField field;
  SubmeanReport submean;
};

SlicePshResult slice_psh_field(const HorizontalCurrentSamples& current, const SliceFunction& psi,
                               double epsilon = 5e-3);

struct NamedObservable {
  std::string name;
  Observable fn;
};

/// 1, Re z, Im z, |z|^2, log(eps + |z|^2) with eps = 1e-6, and |z - a|^2 for
/// three fixed a. z is the first coordinate; |z|^2 uses every coordinate.
std::vector<NamedObservable> test_function_library();

struct EquilibriumCurrentReport {
  std::vector<int> depths;
  /// gaps[node][depth index]: max over observables of |slice - reference|.
  std::vector<std::vector<double>> gaps;
  std::vector<char> monotone;
  bool all_monotone = true;
};

struct CurrentCheckOptions {
  /// Slice base point; defaults to the family's generic point.
  std::optional<Point> base;
  /// Base of the independent reference cloud; defaults to 3 on every coordinate.
  std::optional<Point> reference_base;
  int reference_depth = 0;
  std::vector<NamedObservable> observables;
  /// A gap may grow by at most this much between depths and stay monotone.
  double monotone_tol = 1e-3;
};

/// Distance between depth-n slices and an independent equilibrium cloud with
/// another base point, per node and depth, over the observable set
/// {|z|^2, Re z, Im z, log(eps + |z|^2)}.
EquilibriumCurrentReport equilibrium_current_check(const MapFamily& family, const GridSpec& grid,
                                                   const std::vector<int>& depths,
                                                   const CurrentCheckOptions& options = {});

}  // namespace plbif
