#pragma once

#include <string>
#include <vector>

#include "plbif/map_family.hpp"

namespace plbif {

struct CycleRootOptions {
  /// Above this many roots, switch from simultaneous iteration to Newton
  /// from preimage-tree seeds.
  std::size_t simultaneous_limit = 4096;
  std::size_t root_budget = std::size_t{1} << 16;
  int max_sweeps = 400;
  /// Converged when the Newton step |g/g'| is below this (relative).
  double step_tol = 1e-13;
  double merge_tol = 1e-8;
};

struct CycleRoots {
  /// Solutions of g^N(z) = z, repeated per multiplicity, canonical order.
  std::vector<Complex> roots;
  std::size_t expected = 0;
  int sweeps = 0;
  bool converged = false;
  std::string warning;
};

/// All d^N solutions of g^N(z) = z for the one-variable polynomial g given
/// by ascending coefficients. The composed polynomial is never expanded:
/// g^N and its derivative are evaluated by iteration, with a scaled ratio once
/// the orbit overflows.
CycleRoots cycle_roots(std::span<const Complex> coeffs, int period, const CycleRootOptions& options = {});

/// Newton correction (g^N(z) - z) / ((g^N)'(z) - 1) by orbit iteration.
Complex cycle_newton_ratio(std::span<const Complex> coeffs, std::span<const Complex> deriv, int period, Complex z);

}  // namespace plbif
