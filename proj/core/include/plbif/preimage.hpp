#pragma once

#include <cstdint>
#include <vector>

#include "plbif/atom_cloud.hpp"
#include "plbif/map_family.hpp"
#include "plbif/roots.hpp"

namespace plbif {

struct FiberOptions {
  RootOptions roots;
  /// Each preimage w must satisfy |f(w) - z| <= tol_root * max(1, |z|).
  double tol_root = 1e-10;
};

/// The d_t preimages of one point, repeated per multiplicity.
struct PreimageFiber {
  Point base;
  std::vector<Point> roots;
  std::vector<double> residuals;
};

/// All solutions of f(w) = z in canonical order. Throws DomainError when z is
/// outside V and ConvergenceError when a root misses the residual tolerance.
PreimageFiber fiber(const MapInstance& f, const Point& z, const FiberOptions& options = {});
PreimageFiber fiber(const MapFamily& family, const Param& s, const Point& z, const FiberOptions& options = {});

/// Same roots without the residual bookkeeping, written to `out` (size d_t).
void fiber_roots(const MapInstance& f, const Point& z, std::span<Point> out, const FiberOptions& options = {});

struct TreeOptions {
  std::size_t node_budget = std::size_t{1} << 20;
  FiberOptions fiber;
};

/// The exact measure d_t^{-n} (f^n)^* delta_{z0}: d_t^n atoms of equal weight.
/// Atoms of one parent are contiguous and in canonical order. Throws
/// BudgetError when d_t^n exceeds the node budget.
AtomCloud pullback_tree(const MapInstance& f, const Point& z0, int n, const TreeOptions& options = {});

/// Monte Carlo estimator of the same measure: each walker takes n backward
/// steps, picking a branch uniformly among the d_t preimages. Walker i draws
/// from a generator seeded by (seed, i), so output is independent of threads.
AtomCloud inverse_walk(const MapInstance& f, const Point& z0, int n, std::size_t walkers, std::uint64_t seed,
                       const FiberOptions& options = {});

/// d_t^n with overflow saturation.
std::size_t tree_size(int degree, int n);

}  // namespace plbif
