#include "plbif/cycles.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "plbif/parallel.hpp"
#include "plbif/polynomial.hpp"
#include "plbif/preimage.hpp"
#include "plbif/roots.hpp"

namespace plbif {

Complex cycle_newton_ratio(std::span<const Complex> coeffs, std::span<const Complex> deriv, int period, Complex z) {
  constexpr double kOverflow = 1e30;
  const double d = static_cast<double>(coeffs.size() - 1);
  Complex u = z;
  Complex du = 1.0;
  for (int j = 0; j < period; ++j) {
    if (std::abs(u) > kOverflow) {
      // g^m(u) ~ u^(d^m) dominates, so the ratio is u / (d^m u').
      return u / (std::pow(d, period - j) * du);
    }
    du *= horner(deriv, u);
    u = horner(coeffs, u);
  }
  const Complex g = u - z;
  if (g == Complex{}) return 0.0;
  return g / (du - 1.0);
}

namespace {

std::vector<Complex> tree_seeds(std::span<const Complex> coeffs, int period) {
  double max_coeff = 0.0;
  for (std::size_t j = 0; j + 1 < coeffs.size(); ++j) max_coeff = std::max(max_coeff, std::abs(coeffs[j]));
  std::vector<Complex> level{std::polar(1.0 + max_coeff, 0.7)};
  std::vector<Complex> shifted(coeffs.begin(), coeffs.end());
  for (int n = 0; n < period; ++n) {
    std::vector<Complex> next;
    next.reserve(level.size() * (coeffs.size() - 1));
    for (const Complex w : level) {
      shifted[0] = coeffs[0] - w;
      const auto r = polynomial_roots(shifted);
      next.insert(next.end(), r.roots.begin(), r.roots.end());
    }
    level.swap(next);
  }
  return level;
}

}  // namespace

CycleRoots cycle_roots(std::span<const Complex> coeffs, int period, const CycleRootOptions& options) {
  if (period < 1) throw ValidationError("cycle_roots: period must be >= 1");
  std::size_t size = coeffs.size();
  while (size > 1 && coeffs[size - 1] == Complex{}) --size;
  if (size < 3) throw ValidationError("cycle_roots: map degree must be >= 2");
  const std::span<const Complex> c = coeffs.first(size);
  std::vector<Complex> deriv;
  for (std::size_t j = 1; j < size; ++j) deriv.push_back(static_cast<double>(j) * c[j]);

  CycleRoots out;
  out.expected = tree_size(static_cast<int>(size) - 1, period);
  if (out.expected > options.root_budget)
    throw BudgetError(fmt::format("cycle_roots: {} roots exceed the root budget {}", out.expected, options.root_budget));

  auto ratio = [&](Complex z) { return cycle_newton_ratio(c, deriv, period, z); };
  std::vector<Complex> z = tree_seeds(c, period);

  if (out.expected <= options.simultaneous_limit) {
    std::vector<char> done;
    out.sweeps = aberth_sweeps(std::span<Complex>(z), ratio, options.max_sweeps, options.step_tol, true, done);
    out.converged = std::all_of(done.begin(), done.end(), [](char v) { return v != 0; });
    parallel_for(z.size(), [&](std::size_t i) {
      for (int step = 0; step < 4; ++step) {
        const Complex r = ratio(z[i]);
        if (!(std::abs(r) > options.step_tol * std::max(1.0, std::abs(z[i]))) || !std::isfinite(std::abs(r))) break;
        z[i] -= r;
      }
    });
    merge_clusters(z, options.merge_tol);
  } else {
    const std::vector<Complex> seeds = z;
    std::vector<char> ok(z.size(), 0);
    parallel_for(z.size(), [&](std::size_t i) {
      for (int step = 0; step < 60; ++step) {
        const Complex r = ratio(z[i]);
        if (!std::isfinite(std::abs(r))) return;
        z[i] -= r;
        if (std::abs(r) <= options.step_tol * std::max(1.0, std::abs(z[i]))) {
          ok[i] = 1;
          return;
        }
      }
    });
    // Keep one seed per converged root; the rest restart from their seeds.
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < z.size(); ++i)
      if (ok[i]) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return canonical_less(z[a], z[b]); });
    std::vector<Complex> all;
    for (std::size_t idx : order) {
      bool dup = false;
      for (std::size_t j = all.size(); j-- > 0;) {
        if (std::abs(all[j].real() - z[idx].real()) > options.merge_tol) break;
        if (std::abs(all[j] - z[idx]) < options.merge_tol) {
          dup = true;
          break;
        }
      }
      if (dup) ok[idx] = 0;
      else all.push_back(z[idx]);
    }
    const std::size_t found = all.size();
    for (std::size_t i = 0; i < z.size() && all.size() < out.expected; ++i)
      if (!ok[i]) all.push_back(seeds[i] * Complex(1.0, 1e-3));
    if (all.size() > found) {
      // Aberth sweeps over the missing roots only, repelled by the known ones.
      std::vector<char> done(all.size(), 0);
      std::fill(done.begin(), done.begin() + static_cast<std::ptrdiff_t>(found), 1);
      aberth_sweeps(std::span<Complex>(all), ratio, options.max_sweeps, options.step_tol, true, done, true);
      out.converged = std::all_of(done.begin(), done.end(), [](char v) { return v != 0; });
    } else {
      out.converged = found == out.expected;
    }
    z.swap(all);
    if (!out.converged)
      out.warning = fmt::format("cycle_roots: {} of {} roots did not converge", out.expected - found, out.expected);
  }
  canonical_sort(z);
  out.roots = std::move(z);
  return out;
}

}  // namespace plbif
