#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plbif/atom_cloud.hpp"
#include "plbif/equilibrium.hpp"
#include "plbif/map_family.hpp"

namespace plbif {

/// p orthonormal tangent vectors at a moving base point together with the
/// accumulated log-volume of their images.
class OrthoFrame {
 public:
  OrthoFrame(int dim, int p);
  /// The first p coordinate axes listed in `axes`.
  static OrthoFrame axes(int dim, std::span<const int> axes);
  /// Complex Gaussian vectors orthonormalized.
  static OrthoFrame random(int dim, int p, std::uint64_t seed);

  int dim() const { return dim_; }
  int p() const { return p_; }
  const Point& vector(int j) const { return v_[static_cast<std::size_t>(j)]; }
  double log_volume() const { return log_volume_; }

  /// Applies the Jacobian, re-orthonormalizes and adds log of the p scale
  /// factors. A vanishing factor sends the log-volume to -inf.
  void push(const CMatrix& jac);
  /// max |<e_i, e_j> - delta_ij|.
  double orthonormality_error() const;

 private:
  double orthonormalize();
  int dim_;
  int p_;
  std::array<Point, kMaxFiberDim> v_;
  double log_volume_ = 0.0;
};

struct PsiOptions {
  int random_frames = 8;
  std::uint64_t seed = 0x5eed;
};

/// (1/n) log ||wedge^p Df^n(z)||, estimated as the largest QR log-volume over
/// random frames and every coordinate-axis p-frame. For k = 1 and for p = k
/// the exact sums of log|f'| and log|det Df| are used. Throws EscapeError if
/// the orbit leaves V; returns -inf when a critical point is hit.
double psi_pn(const MapInstance& f, const Point& z, int n, int p, const PsiOptions& options = {});

struct SpatialSums {
  double phi_n = 0.0;
  double phi_2n = 0.0;
  double std_error_n = 0.0;
  double std_error_2n = 0.0;
  double excluded_weight = 0.0;
};

/// phi_{p,n} = integral of psi_{p,n} against the cloud, with phi_{p,2n}.
SpatialSums partial_sums_spatial(const MapInstance& f, const AtomCloud& cloud, int p, int n,
                                 const PsiOptions& options = {});
SpatialSums partial_sums_spatial(const MapFamily& family, const Param& s, int p, int depth, int n,
                                 const CloudOptions& cloud_options = {}, const PsiOptions& options = {});

struct OrbitEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t used = 0;
  std::size_t discarded = 0;
};

/// Time average of the log-volume along orbits starting at up to `starts`
/// atoms of the cloud (evenly strided), after `burn_in` steps.
OrbitEstimate partial_sums_orbit(const MapInstance& f, const AtomCloud& cloud, int p, int orbit_length, int burn_in,
                                 std::size_t starts, const PsiOptions& options = {});

/// L_k = integral of log|det Df| against the cloud.
IntegralResult sum_via_jacobian(const MapInstance& f, const AtomCloud& cloud);

struct ExponentEstimate {
  Param parameter;
  /// L[p-1] = L_p for p = 1..k.
  std::vector<double> L;
  std::vector<double> std_error;
  int depth = 0;
  int orbit_length = 0;
  std::string method;
  /// |spatial - orbit| for L_1 when both estimators ran.
  double spread = 0.0;

  int k() const { return static_cast<int>(L.size()); }
  /// chi_p = L_p - L_{p-1}.
  std::vector<double> chi() const;
  bool ordered(double tol = 1e-3) const;
  bool satisfies_degree_bound(int degree, double tol = 1e-3) const;
};

struct EstimateOptions {
  int n = 8;
  /// Orbit estimator for the spread (0 disables it).
  int orbit_length = 0;
  int burn_in = 0;
  std::size_t orbit_starts = 256;
  PsiOptions psi;
};

/// All L_p: L_k from the Jacobian integral, L_p (p < k) from phi_{p,2n}.
ExponentEstimate estimate_exponents(const MapInstance& f, const AtomCloud& cloud, const EstimateOptions& options = {});

/// max over j of L_j + (p - j) lambda with L_0 = 0; lambda = -inf gives L_p.
double truncated_sum(const ExponentEstimate& estimate, int p, double lambda);

/// Potential of the cloud at the j-th critical point (k = 1, canonical order,
/// distinct critical points).
IntegralResult critical_potential(const MapInstance& f, const AtomCloud& cloud, int j);

/// Distinct critical points of a one-dimensional map with multiplicities.
std::vector<std::pair<Complex, int>> critical_points_1d(const MapInstance& f);

}  // namespace plbif
