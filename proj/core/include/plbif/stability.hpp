#pragma once

#include <string>
#include <vector>

#include "plbif/atom_cloud.hpp"
#include "plbif/cycles.hpp"
#include "plbif/equilibrium.hpp"
#include "plbif/field.hpp"
#include "plbif/map_family.hpp"

namespace plbif {

enum class OrbitClass { attracting, repelling, indifferent };
std::string to_string(OrbitClass c);

struct PeriodicOrbit {
  int period = 1;
  /// Orbit points starting from the canonically smallest one.
  std::vector<Point> points;
  Complex multiplier = 0.0;
  OrbitClass classification = OrbitClass::indifferent;
  /// max over points of |f^N(p) - p|.
  double residual = 0.0;
  /// Multiplicity of the first point as a root of f^N(z) = z.
  int multiplicity = 1;
};

OrbitClass classify_multiplier(double modulus, double tol = 1e-6);

struct PeriodicPointsResult {
  std::vector<PeriodicOrbit> orbits;
  /// Points of exact period N counted with multiplicity: expected vs found.
  std::size_t expected_points = 0;
  std::size_t found_points = 0;
  std::string warning;
};

struct PeriodicOptions {
  CycleRootOptions roots;
  double tol_multiplier = 1e-6;
};

/// All cycles of exact period N of a one-dimensional map, each listed once.
PeriodicPointsResult periodic_points(const MapInstance& f, int period, const PeriodicOptions& options = {});

/// Rebuilds the orbit of a period-N point: points, multiplier, class, residual.
PeriodicOrbit make_orbit(const MapInstance& f, Complex z, int period, double tol_multiplier = 1e-6);

struct TrackedNode {
  Param parameter;
  PeriodicOrbit orbit;
  int halvings = 0;
};

struct TrackedBranch {
  std::vector<TrackedNode> nodes;
  /// Path index where tracking halted, -1 if it ran to the end.
  int flagged_node = -1;
  /// "classification" or "divergence".
  std::string reason;
};

/// Newton continuation of a periodic point along a parameter path with up to
/// 10 step halvings per segment. Halts at the first node whose classification
/// differs from the start, or where Newton diverges.
TrackedBranch track_periodic(const MapFamily& family, const std::vector<Param>& path, const PeriodicOrbit& orbit);

/// mu_{s,n}: the pullback tree of depth n rooted at a repelling orbit point.
AtomCloud periodic_measure(const MapInstance& f, const PeriodicOrbit& base, int n, const TreeOptions& options = {});

/// Bucket index over coordinate 0 answering max-norm nearest neighbor queries.
class SpatialIndex {
 public:
  explicit SpatialIndex(const AtomCloud& cloud);
  /// Distance to the nearest atom farther than `exclude_below`.
  double nearest(const Point& q, double exclude_below = -1.0) const;

 private:
  const AtomCloud* cloud_;
  double x0_ = 0.0, y0_ = 0.0, cell_ = 1.0;
  int nx_ = 1, ny_ = 1;
  std::vector<std::uint32_t> start_;
  std::vector<std::uint32_t> items_;
};

/// Hausdorff distance between the atom supports (max-norm).
double hausdorff(const AtomCloud& a, const AtomCloud& b);
/// max over a of the distance to the nearest atom of b.
double directed_hausdorff(const AtomCloud& a, const AtomCloud& b);
/// Mean distance from each atom to its nearest distinct atom.
double mean_atom_spacing(const AtomCloud& cloud);

struct StabilityOptions {
  CloudOptions cloud;
  /// Hausdorff jump threshold as a multiple of the median.
  double hausdorff_factor = 3.0;
  /// Critical point counts as in J within this multiple of the atom spacing.
  double julia_spacing_factor = 2.0;
  /// Attracting cycles of period up to this are counted per node (k = 1).
  int attracting_period_max = 2;
};

struct StabilityScanResult {
  /// 1 where there is unstable evidence, 0 otherwise.
  ScalarField verdict;
  std::vector<double> hausdorff_max;
  /// Bit j set when critical point j lies within epsilon_J of the cloud.
  std::vector<unsigned> critical_in_julia;
  std::vector<int> attracting_cycles;
  double hausdorff_median = 0.0;
};

StabilityScanResult stability_scan(const MapFamily& family, const GridSpec& grid, int depth,
                                   const StabilityOptions& options = {});

struct HarmonicReport {
  double masked_mass = 0.0;
  double global_mass = 0.0;
  double ratio = 0.0;
  std::size_t nodes = 0;
};

/// Sum of |five-point Laplacian| h_x h_y over masked interior nodes, relative
/// to the same sum over the whole field (or to `reference_mass` when positive).
HarmonicReport harmonic_check(const ScalarField& field, const std::vector<char>& mask, double reference_mass = 0.0);

}  // namespace plbif
