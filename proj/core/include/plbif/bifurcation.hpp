#pragma once

#include <optional>
#include <vector>

#include "plbif/equilibrium.hpp"
#include "plbif/field.hpp"
#include "plbif/lyapunov.hpp"
#include "plbif/map_family.hpp"

namespace plbif {

struct ScanConfig {
  /// Which partial sum L_p; 0 means p = k (Jacobian integral).
  int p = 0;
  int depth = 10;
  /// Cloud settings; an unset base uses the family's s-independent generic point.
  CloudOptions cloud;
  /// Cocycle length for p < k.
  int n = 8;
  PsiOptions psi;
  /// Fraction of non-ok nodes that turns into an error.
  double max_failed_fraction = 0.05;
};

/// Throws DomainError when a node lies outside the family's parameter domain.
void check_grid_in_domain(const MapFamily& family, const GridSpec& grid);

/// L_p at every node. Nodes that fail are marked, never interpolated.
ScalarField scan(const MapFamily& family, const GridSpec& grid, const ScanConfig& config = {});

/// Normalized dd^c by the five-point Laplacian: cell mass Delta u h_x h_y / (2 pi),
/// so that log|s| has unit mass. Negative cells are clipped and accounted.
CurrentField ddc(const ScalarField& field);

struct SupportResult {
  /// Indices into CurrentField::cells.
  std::vector<std::size_t> cells;
  double threshold = 0.0;
  /// Sizes of the 8-connected components, largest first.
  std::vector<std::size_t> components;
};

/// Cells with mass above tau times the largest cell mass, or tau times
/// `reference_max` when it is positive.
SupportResult support(const CurrentField& current, double tau = 1e-3, double reference_max = 0.0);

/// Experimental density for the self-intersection of dd^c on two parameters:
/// (8/pi^2) det of the discrete complex Hessian times the cell volume, clipped.
CurrentField hessian_det(const ScalarField& field);

/// Per node: distance from the critical set to the atoms of the equilibrium cloud.
ScalarField critical_gap_scan(const MapFamily& family, const GridSpec& grid, int depth, const CloudOptions& cloud = {});

struct SubmeanViolation {
  std::size_t node = 0;
  double residual = 0.0;
};

struct SubmeanReport {
  std::vector<SubmeanViolation> violations;
  double max_residual = -std::numeric_limits<double>::infinity();
  std::size_t checked = 0;
};

/// value minus the mean of the 8-neighbor ring at interior nodes; residuals
/// above epsilon are violations of the discrete sub-mean-value property.
SubmeanReport submean_check(const ScalarField& field, double epsilon = 5e-3);

/// Five-point Laplacian at an interior node of a one-parameter field, or NaN
/// when the stencil touches a non-ok node.
double five_point_laplacian(const ScalarField& field, int i, int j);

}  // namespace plbif
