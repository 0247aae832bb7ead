#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "plbif/atom_cloud.hpp"
#include "plbif/cycles.hpp"
#include "plbif/map_family.hpp"
#include "plbif/preimage.hpp"

namespace plbif {

/// Real observable on C^k. May return -inf (logarithmic observables).
using Observable = std::function<double(const Point&)>;
using ComplexObservable = std::function<Complex(const Point&)>;

enum class CloudMethod {
  /// Exact pullback of the base point.
  tree,
  /// Random backward walks.
  walk,
  /// Uniform measure on the non-attracting points of period dividing `depth`; exactly f-invariant.
  periodic
};

std::string to_string(CloudMethod method);
CloudMethod parse_cloud_method(const std::string& text);

struct GuardOptions {
  double epsilon = 1e-6;
  int iterates = 50;
};

struct GuardResult {
  bool pass = true;
  /// Forward image of a critical point that came within epsilon of z0.
  Point hit;
  int iterate = 0;
  double distance = 0.0;
};

/// Fails iff z0 is within epsilon of one of the first `iterates` forward images
/// of a critical point (the postcritical set contains the exceptional set).
GuardResult exceptional_guard(const MapInstance& f, const Point& z0, const GuardOptions& options = {});

struct CloudOptions {
  CloudMethod method = CloudMethod::tree;
  /// Base point of the pullback. Defaults to a repelling fixed point that
  /// passes the exceptional guard, else the family's generic point.
  std::optional<Point> base;
  std::size_t walkers = 4096;
  std::uint64_t seed = 0;
  /// Average over depths depth-w+1..depth when > 1.
  int cesaro_window = 1;
  std::size_t node_budget = std::size_t{1} << 20;
  bool guard = true;
  GuardOptions guard_options;
  FiberOptions fiber;
  CycleRootOptions cycles;
};

/// Cesaro window used when averaging is requested without an explicit width.
inline constexpr int kDefaultCesaroWindow = 4;

/// Approximation of the equilibrium measure mu_s.
AtomCloud equilibrium_cloud(const MapInstance& f, int depth, const CloudOptions& options = {});
AtomCloud equilibrium_cloud(const MapFamily& family, const Param& s, int depth, const CloudOptions& options = {});

/// Repelling fixed point passing the guard, else the generic point.
Point default_base_point(const MapInstance& f, const GuardOptions& guard = {});

struct IntegralResult {
  double value = 0.0;
  /// Weight and count of atoms where the observable was -inf.
  double excluded_weight = 0.0;
  std::size_t excluded_count = 0;
};

/// Maximum fraction of total weight allowed at -inf.
inline constexpr double kMaxExcludedWeight = 1e-3;

/// Weighted sum over atoms. Atoms at -inf are excluded and the rest
/// renormalized; more than 0.1% of the weight there throws IntegrabilityError.
IntegralResult integrate(const AtomCloud& cloud, const Observable& phi);
Complex integrate_complex(const AtomCloud& cloud, const ComplexObservable& phi);

/// Per-atom values with the same -inf policy applied to their mean and
/// standard error (std / sqrt(N) of the unweighted sample).
struct SampleStats {
  double mean = 0.0;
  double std_error = 0.0;
  double excluded_weight = 0.0;
};
SampleStats sample_stats(const AtomCloud& cloud, std::span<const double> values);

/// (L^n phi)(z) = d_t^{-n} sum over f^n(w) = z of phi(w).
double pushforward(const MapInstance& f, const Observable& phi, int n, const Point& z,
                   const TreeOptions& options = {});

struct LatticeSpec {
  /// Polydisc radius of the lattice; <= 0 means 0.9 R, shrunk to 1.25x the hull that survives the horizon.
  double radius = 0.0;
  /// Per-coordinate polar net; 0 picks 64x64 for k = 1 and 8x8 otherwise.
  int radial = 0;
  int angular = 0;
  /// Keep points that do not escape within this many steps (0 keeps all).
  int horizon = 5;
};

std::vector<Point> lattice_points(const MapInstance& f, const LatticeSpec& spec);

struct SupResult {
  double value = 0.0;
  Point argmax;
  std::size_t lattice_size = 0;
};

/// max over the lattice of L^n phi; ties go to the canonically smallest point.
SupResult operator_sup(const MapInstance& f, const Observable& phi, int n, const LatticeSpec& spec = {},
                       const TreeOptions& options = {});

struct ConvergenceReport {
  std::string observable;
  double reference = 0.0;
  int reference_depth = 0;
  std::vector<double> sups;
  std::vector<double> gaps;
  /// Fitted geometric rate c0 of the gaps, when defined.
  double rate = 0.0;
  bool rate_defined = false;
  double fit_residual = 0.0;
  bool monotone = true;
  bool nonnegative = true;
  bool geometric = false;
};

struct ConvergenceOptions {
  LatticeSpec lattice;
  TreeOptions tree;
  /// First n included in the rate fit.
  int fit_from = 1;
  double tol_quad = 1e-6;
  std::optional<Point> reference_base;
};

ConvergenceReport convergence_report(const MapInstance& f, const Observable& phi, int n_max,
                                     const std::string& description = "", const ConvergenceOptions& options = {});

struct InvarianceResidual {
  /// |cloud(phi o f) - cloud(phi)|
  double forward = 0.0;
  /// |cloud(L phi) - cloud(phi)|
  double pullback = 0.0;
};

InvarianceResidual invariance_residual(const MapInstance& f, const AtomCloud& cloud, const Observable& phi);

/// sum_i w_i log|w - z_i| (k = 1).
IntegralResult potential_1d(const AtomCloud& cloud, Complex w);

}  // namespace plbif
