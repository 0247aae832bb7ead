#include "plbif/preimage.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <random>

#include "plbif/parallel.hpp"

namespace plbif {

namespace {

std::vector<Complex> solve_shifted(std::span<const Complex> coeffs, Complex z, const FiberOptions& options,
                                   double& worst) {
  std::vector<Complex> c(coeffs.begin(), coeffs.end());
  c[0] -= z;
  auto result = polynomial_roots(c, options.roots);
  const double tol = options.tol_root * std::max(1.0, std::abs(z));
  for (double r : result.residuals) worst = std::max(worst, r / tol);
  return std::move(result.roots);
}

void check_in_V(const MapInstance& f, const Point& z) {
  if (!(z.max_norm() <= f.escape_radius() * (1.0 + 1e-12)))
    throw DomainError(fmt::format("fiber: point {} lies outside V (radius {})", format_point(z.span()),
                                  f.escape_radius()));
}

// Fills out[0..d_t) and returns the worst residual relative to tolerance.
double solve_fiber(const MapInstance& f, const Point& z, std::span<Point> out, const FiberOptions& options) {
  const int k = f.dim();
  double worst = 0.0;
  if (f.kind() == FamilyKind::skew) {
    const auto base_roots = solve_shifted(f.coefficients(0), z[0], options, worst);
    std::size_t slot = 0;
    for (const Complex w1 : base_roots) {
      auto q = f.fiber_coefficients(w1);
      const auto fiber_roots = solve_shifted(q, z[1], options, worst);
      for (const Complex w2 : fiber_roots) out[slot++] = Point{w1, w2};
    }
    std::sort(out.begin(), out.end(),
              [](const Point& a, const Point& b) { return canonical_less(a.span(), b.span()); });
    return worst;
  }
  // Coordinate-wise: the Cartesian product of sorted coordinate fibers is
  // already in lexicographic order.
  std::array<std::vector<Complex>, kMaxFiberDim> per;
  for (int i = 0; i < k; ++i) per[static_cast<std::size_t>(i)] = solve_shifted(f.coefficients(i), z[i], options, worst);
  std::size_t total = out.size();
  for (std::size_t idx = 0; idx < total; ++idx) {
    Point w(k);
    std::size_t rest = idx;
    for (int i = k - 1; i >= 0; --i) {
      const auto& list = per[static_cast<std::size_t>(i)];
      w[i] = list[rest % list.size()];
      rest /= list.size();
    }
    out[idx] = w;
  }
  return worst;
}

}  // namespace

std::size_t tree_size(int degree, int n) {
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) {
    if (total > std::numeric_limits<std::size_t>::max() / static_cast<std::size_t>(degree))
      return std::numeric_limits<std::size_t>::max();
    total *= static_cast<std::size_t>(degree);
  }
  return total;
}

void fiber_roots(const MapInstance& f, const Point& z, std::span<Point> out, const FiberOptions& options) {
  check_in_V(f, z);
  const double worst = solve_fiber(f, z, out, options);
  if (worst > 1.0)
    throw ConvergenceError(fmt::format("fiber over {}: root residual {:.3g} times the tolerance", format_point(z.span()), worst),
                           worst * options.tol_root * std::max(1.0, z.max_norm()));
}

PreimageFiber fiber(const MapInstance& f, const Point& z, const FiberOptions& options) {
  PreimageFiber result;
  result.base = z;
  result.roots.resize(static_cast<std::size_t>(f.degree()));
  fiber_roots(f, z, result.roots, options);
  for (const auto& w : result.roots) result.residuals.push_back(max_distance(f.eval(w), z));
  return result;
}

PreimageFiber fiber(const MapFamily& family, const Param& s, const Point& z, const FiberOptions& options) {
  return fiber(family.at(s), z, options);
}

AtomCloud pullback_tree(const MapInstance& f, const Point& z0, int n, const TreeOptions& options) {
  if (n < 0) throw ValidationError("pullback_tree: depth must be >= 0");
  const std::size_t d = static_cast<std::size_t>(f.degree());
  const std::size_t total = tree_size(f.degree(), n);
  if (total > options.node_budget)
    throw BudgetError(fmt::format("pullback_tree: {}^{} atoms exceed the node budget {}; use inverse_walk instead",
                                  d, n, options.node_budget));
  check_in_V(f, z0);
  std::vector<Point> level{z0};
  std::vector<Point> next;
  for (int depth = 0; depth < n; ++depth) {
    next.assign(level.size() * d, Point(f.dim()));
    parallel_for(level.size(), [&](std::size_t i) {
      fiber_roots(f, level[i], std::span<Point>(next).subspan(i * d, d), options.fiber);
    });
    level.swap(next);
  }
  AtomCloud cloud = AtomCloud::uniform(f.dim(), std::move(level));
  cloud.metadata().depth = n;
  cloud.metadata().method = "tree";
  cloud.metadata().base = z0;
  cloud.metadata().parameter = f.parameter();
  return cloud;
}

AtomCloud inverse_walk(const MapInstance& f, const Point& z0, int n, std::size_t walkers, std::uint64_t seed,
                       const FiberOptions& options) {
  if (walkers < 1) throw ValidationError("inverse_walk: walkers must be >= 1");
  if (n < 0) throw ValidationError("inverse_walk: depth must be >= 0");
  check_in_V(f, z0);
  const std::size_t d = static_cast<std::size_t>(f.degree());
  std::vector<Point> atoms(walkers, z0);
  std::vector<char> ok(walkers, 1);
  parallel_for(walkers, [&](std::size_t w) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(w >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> pick(0, d - 1);
    std::vector<Point> branches(d);
    Point z = z0;
    try {
      for (int step = 0; step < n; ++step) {
        fiber_roots(f, z, branches, options);
        z = branches[pick(rng)];
      }
      atoms[w] = z;
    } catch (const NumericalError&) {
      ok[w] = 0;
    }
  });
  std::vector<Point> kept;
  kept.reserve(walkers);
  for (std::size_t w = 0; w < walkers; ++w)
    if (ok[w]) kept.push_back(atoms[w]);
  const std::size_t failed = walkers - kept.size();
  if (failed * 100 > walkers)
    throw NumericalError(fmt::format("inverse_walk: {} of {} walkers failed", failed, walkers));
  AtomCloud cloud = AtomCloud::uniform(f.dim(), std::move(kept));
  cloud.metadata().depth = n;
  cloud.metadata().method = "walk";
  cloud.metadata().base = z0;
  cloud.metadata().seed = seed;
  cloud.metadata().parameter = f.parameter();
  if (failed) cloud.metadata().extra["failed_walkers"] = std::to_string(failed);
  return cloud;
}

}  // namespace plbif
