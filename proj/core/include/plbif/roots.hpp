#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "plbif/types.hpp"

namespace plbif {

struct RootOptions {
  int max_iters = 200;
  /// Roots closer than this are merged and the merged root repeated.
  double cluster_tol = 1e-8;
  /// Phase offset of the initial circle of guesses.
  double phase_offset = 0.4;
  int polish_steps = 4;
};

struct RootResult {
  /// Each root repeated per multiplicity, canonical order.
  std::vector<Complex> roots;
  /// |p(root)| per entry.
  std::vector<double> residuals;
  int iterations = 0;
  bool converged = false;
};

/// All roots of sum_j coeffs[j] z^j (ascending, leading coefficient nonzero)
/// by Aberth-Ehrlich with Newton polish. Binomials c_d z^d + c_0 are solved in
/// closed form. Never throws on non-convergence; callers check `converged`
/// and residuals against their own tolerance.
RootResult polynomial_roots(std::span<const Complex> coeffs, const RootOptions& options = {});

/// Roots of the binomial c_d z^d + c_0 in closed form, canonical order.
std::vector<Complex> binomial_roots(Complex leading, Complex constant, int degree);

/// Merges points closer than `tol` (single linkage) into their mean, keeping
/// one entry per input so multiplicities are preserved.
void merge_clusters(std::span<Complex> roots, double tol);

struct RootCluster {
  Complex center;
  int multiplicity = 1;
};

/// Distinct values of an already merged root list with their counts.
std::vector<RootCluster> group_roots(std::span<const Complex> roots, double tol);

/// Lexicographic (Re, Im) order after rounding to 1e-12; stable for ties.
bool canonical_less(Complex a, Complex b);
bool canonical_less(std::span<const Complex> a, std::span<const Complex> b);
void canonical_sort(std::span<Complex> values);

/// Simultaneous Aberth-Ehrlich sweeps over `z` driven by a Newton-correction
/// functor `ratio(z) -> p(z)/p'(z)`. With `jacobi` every correction in a sweep
/// uses the previous positions, which makes the sweep order irrelevant.
/// Returns the number of sweeps performed; `done` marks converged roots.
/// With `keep_done`, entries already marked in `done` stay fixed and only
/// repel the others (deflation against known roots).
template <class Ratio>
int aberth_sweeps(std::span<Complex> z, Ratio&& ratio, int max_iters, double tol, bool jacobi,
                  std::vector<char>& done, bool keep_done = false) {
  const std::size_t n = z.size();
  if (!keep_done || done.size() != n) done.assign(n, 0);
  std::vector<Complex> previous;
  std::vector<Complex> corrections(n);
  int iter = 0;
  for (; iter < max_iters; ++iter) {
    if (jacobi) previous.assign(z.begin(), z.end());
    const std::span<const Complex> ref = jacobi ? std::span<const Complex>(previous) : z;
    std::size_t pending = 0;
    for (std::size_t i = 0; i < n; ++i) {
      corrections[i] = 0.0;
      if (done[i]) continue;
      const Complex w = ratio(ref[i]);
      if (w == Complex{}) {
        done[i] = 1;
        continue;
      }
      Complex repulsion = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const Complex diff = ref[i] - ref[j];
        if (diff != Complex{}) repulsion += 1.0 / diff;
      }
      Complex corr = w / (1.0 - w * repulsion);
      if (!std::isfinite(corr.real()) || !std::isfinite(corr.imag())) {
        // Critical point of p or coincident guesses: nudge deterministically.
        corr = Complex(1e-7 * (1.0 + std::abs(ref[i])), 1e-7 * static_cast<double>(i % 7 + 1));
      }
      corrections[i] = corr;
      if (!jacobi) z[i] -= corr;
      if (std::abs(corr) <= tol * std::max(1.0, std::abs(ref[i]))) done[i] = 1;
      else ++pending;
    }
    if (jacobi)
      for (std::size_t i = 0; i < n; ++i) z[i] = previous[i] - corrections[i];
    if (pending == 0) {
      ++iter;
      break;
    }
  }
  return iter;
}

}  // namespace plbif
