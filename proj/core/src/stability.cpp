#include "plbif/stability.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "plbif/bifurcation.hpp"
#include "plbif/parallel.hpp"
#include "plbif/polynomial.hpp"
#include "plbif/roots.hpp"

namespace plbif {

std::string to_string(OrbitClass c) {
  switch (c) {
    case OrbitClass::attracting: return "attracting";
    case OrbitClass::repelling: return "repelling";
    case OrbitClass::indifferent: return "indifferent";
  }
  return "indifferent";
}

OrbitClass classify_multiplier(double modulus, double tol) {
  if (modulus > 1.0 + tol) return OrbitClass::repelling;
  if (modulus < 1.0 - tol) return OrbitClass::attracting;
  return OrbitClass::indifferent;
}

namespace {

void require_1d(const MapInstance& f, const char* what) {
  if (f.dim() != 1) throw ValidationError(std::string(what) + " needs a one-dimensional family");
}

int mobius(int n) {
  int result = 1;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    n /= p;
    if (n % p == 0) return 0;
    result = -result;
  }
  if (n > 1) result = -result;
  return result;
}

std::size_t exact_period_count(int degree, int period) {
  long double total = 0.0;
  for (int q = 1; q <= period; ++q)
    if (period % q == 0) total += mobius(period / q) * std::pow(static_cast<long double>(degree), q);
  return static_cast<std::size_t>(std::llround(total));
}

// Newton on f^N(z) - z; returns false when the iteration leaves V or stalls.
bool newton_cycle(const MapInstance& f, int period, Complex& z, int max_iters = 60) {
  const auto c = f.coefficients(0);
  std::vector<Complex> d;
  for (std::size_t j = 1; j < c.size(); ++j) d.push_back(static_cast<double>(j) * c[j]);
  for (int it = 0; it < max_iters; ++it) {
    const Complex step = cycle_newton_ratio(c, d, period, z);
    if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return false;
    z -= step;
    if (std::abs(z) > f.escape_radius()) return false;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) break;
  }
  Complex u = z;
  for (int j = 0; j < period; ++j) u = horner(c, u);
  return std::abs(u - z) <= 1e-10 * std::max(1.0, std::abs(z));
}

}  // namespace

PeriodicOrbit make_orbit(const MapInstance& f, Complex z, int period, double tol_multiplier) {
  require_1d(f, "make_orbit");
  const auto c = f.coefficients(0);
  PeriodicOrbit orbit;
  orbit.period = period;
  std::vector<Complex> pts;
  Complex w = z;
  for (int j = 0; j < period; ++j) {
    pts.push_back(w);
    w = horner(c, w);
  }
  const auto first = std::min_element(pts.begin(), pts.end(), [](Complex a, Complex b) { return canonical_less(a, b); });
  std::rotate(pts.begin(), first, pts.end());
  orbit.multiplier = 1.0;
  for (const Complex p : pts) {
    orbit.points.push_back(Point{p});
    orbit.multiplier *= f.coordinate_derivative(0, p);
    Complex u = p;
    for (int j = 0; j < period; ++j) u = horner(c, u);
    orbit.residual = std::max(orbit.residual, std::abs(u - p));
  }
  orbit.classification = classify_multiplier(std::abs(orbit.multiplier), tol_multiplier);
  return orbit;
}

PeriodicPointsResult periodic_points(const MapInstance& f, int period, const PeriodicOptions& options) {
  require_1d(f, "periodic_points");
  if (period < 1) throw ValidationError("periodic_points: period must be >= 1");
  const auto roots = cycle_roots(f.coefficients(0), period, options.roots);
  const auto distinct = group_roots(roots.roots, options.roots.merge_tol);
  const auto c = f.coefficients(0);
  PeriodicPointsResult result;
  result.expected_points = exact_period_count(f.degree(), period);
  std::vector<char> used(distinct.size(), 0);
  auto nearest = [&](Complex z) {
    std::size_t best = 0;
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < distinct.size(); ++i) {
      const double d = std::abs(distinct[i].center - z);
      if (d < dist) {
        dist = d;
        best = i;
      }
    }
    return std::make_pair(best, dist);
  };
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    if (used[i]) continue;
    used[i] = 1;
    Complex z = distinct[i].center;
    if (distinct[i].multiplicity == 1) newton_cycle(f, period, z);
    const double tol = 1e-7 * std::max(1.0, std::abs(z));
    int minimal = period;
    Complex w = z;
    for (int j = 1; j < period; ++j) {
      w = horner(c, w);
      if (std::abs(w - z) <= tol) {
        minimal = j;
        break;
      }
    }
    // Mark the rest of the orbit.
    w = z;
    for (int j = 1; j < minimal; ++j) {
      w = horner(c, w);
      const auto [idx, dist] = nearest(w);
      if (dist <= 1e-6 * std::max(1.0, std::abs(w))) used[idx] = 1;
    }
    if (minimal < period) continue;
    PeriodicOrbit orbit = make_orbit(f, z, period, options.tol_multiplier);
    orbit.multiplicity = distinct[i].multiplicity;
    result.found_points += static_cast<std::size_t>(period) * static_cast<std::size_t>(orbit.multiplicity);
    result.orbits.push_back(std::move(orbit));
  }
  std::sort(result.orbits.begin(), result.orbits.end(), [](const PeriodicOrbit& a, const PeriodicOrbit& b) {
    return canonical_less(a.points.front().span(), b.points.front().span());
  });
  if (result.found_points != result.expected_points)
    result.warning = fmt::format("period {}: found {} points with multiplicity, expected {}", period,
                                 result.found_points, result.expected_points);
  if (!roots.warning.empty()) result.warning += (result.warning.empty() ? "" : "; ") + roots.warning;
  return result;
}

TrackedBranch track_periodic(const MapFamily& family, const std::vector<Param>& path, const PeriodicOrbit& orbit) {
  if (orbit.points.empty()) throw ValidationError("track_periodic: empty orbit");
  TrackedBranch branch;
  if (path.empty()) return branch;
  const int period = orbit.period;
  const OrbitClass start_class = orbit.classification;
  Complex z = orbit.points.front()[0];
  Param previous = path.front();

  // Continue from (s_from, z) to s_to, halving the step on failure.
  int halvings = 0;
  std::function<bool(const Param&, Complex&, const Param&, int)> advance =
      [&](const Param& s_from, Complex& w, const Param& s_to, int depth) -> bool {
    Complex trial = w;
    if (newton_cycle(family.at(s_to), period, trial)) {
      w = trial;
      return true;
    }
    if (depth >= 10) return false;
    ++halvings;
    Param mid(s_from.dim());
    for (int j = 0; j < s_from.dim(); ++j) mid[j] = 0.5 * (s_from[j] + s_to[j]);
    Complex half = w;
    if (!advance(s_from, half, mid, depth + 1)) return false;
    if (!advance(mid, half, s_to, depth + 1)) return false;
    w = half;
    return true;
  };

  for (std::size_t i = 0; i < path.size(); ++i) {
    halvings = 0;
    Complex next = z;
    const bool ok = advance(i == 0 ? path.front() : previous, next, path[i], 0);
    if (!ok) {
      branch.flagged_node = static_cast<int>(i);
      branch.reason = "divergence";
      return branch;
    }
    const MapInstance f = family.at(path[i]);
    TrackedNode node;
    node.parameter = path[i];
    node.orbit = make_orbit(f, next, period);
    // Keep the tracked point first rather than the canonical rotation.
    while (std::abs(node.orbit.points.front()[0] - next) > 1e-9 * std::max(1.0, std::abs(next)))
      std::rotate(node.orbit.points.begin(), node.orbit.points.begin() + 1, node.orbit.points.end());
    node.halvings = halvings;
    const OrbitClass cls = node.orbit.classification;
    branch.nodes.push_back(std::move(node));
    z = next;
    previous = path[i];
    if (cls != start_class) {
      branch.flagged_node = static_cast<int>(i);
      branch.reason = "classification";
      return branch;
    }
  }
  return branch;
}

AtomCloud periodic_measure(const MapInstance& f, const PeriodicOrbit& base, int n, const TreeOptions& options) {
  if (base.points.empty()) throw ValidationError("periodic_measure: empty base orbit");
  if (base.classification != OrbitClass::repelling)
    throw ValidationError("periodic_measure: base orbit is " + to_string(base.classification) + ", not repelling");
  AtomCloud cloud = pullback_tree(f, base.points.front(), n, options);
  cloud.metadata().method = "periodic_measure";
  cloud.metadata().extra["period"] = std::to_string(base.period);
  return cloud;
}

SpatialIndex::SpatialIndex(const AtomCloud& cloud) : cloud_(&cloud) {
  if (cloud.empty()) throw ValidationError("spatial index over an empty cloud");
  double x1 = -std::numeric_limits<double>::infinity(), y1 = x1;
  x0_ = y0_ = std::numeric_limits<double>::infinity();
  for (const auto& p : cloud.points()) {
    x0_ = std::min(x0_, p[0].real());
    y0_ = std::min(y0_, p[0].imag());
    x1 = std::max(x1, p[0].real());
    y1 = std::max(y1, p[0].imag());
  }
  const double extent = std::max({x1 - x0_, y1 - y0_, 1e-12});
  const double per_side = std::max(1.0, std::sqrt(static_cast<double>(cloud.size())));
  cell_ = extent / per_side;
  nx_ = std::max(1, static_cast<int>(std::floor((x1 - x0_) / cell_)) + 1);
  ny_ = std::max(1, static_cast<int>(std::floor((y1 - y0_) / cell_)) + 1);
  std::vector<std::uint32_t> count(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
  std::vector<std::uint32_t> bucket(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.point(i)[0];
    const int cx = std::min(nx_ - 1, static_cast<int>((p.real() - x0_) / cell_));
    const int cy = std::min(ny_ - 1, static_cast<int>((p.imag() - y0_) / cell_));
    bucket[i] = static_cast<std::uint32_t>(cy * nx_ + cx);
    ++count[bucket[i] + 1];
  }
  start_.assign(count.size(), 0);
  for (std::size_t b = 1; b < count.size(); ++b) start_[b] = start_[b - 1] + count[b];
  items_.resize(cloud.size());
  std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
  for (std::size_t i = 0; i < cloud.size(); ++i) items_[fill[bucket[i]]++] = static_cast<std::uint32_t>(i);
}

double SpatialIndex::nearest(const Point& q, double exclude_below) const {
  const int cx = std::clamp(static_cast<int>(std::floor((q[0].real() - x0_) / cell_)), 0, nx_ - 1);
  const int cy = std::clamp(static_cast<int>(std::floor((q[0].imag() - y0_) / cell_)), 0, ny_ - 1);
  double best = std::numeric_limits<double>::infinity();
  const int max_ring = std::max(nx_, ny_);
  for (int r = 0; r <= max_ring; ++r) {
    for (int y = cy - r; y <= cy + r; ++y) {
      if (y < 0 || y >= ny_) continue;
      const bool edge_row = y == cy - r || y == cy + r;
      for (int x = cx - r; x <= cx + r; x += edge_row ? 1 : 2 * r) {
        if (x >= 0 && x < nx_) {
          const std::size_t b = static_cast<std::size_t>(y) * nx_ + x;
          for (std::uint32_t k = start_[b]; k < start_[b + 1]; ++k) {
            const double d = max_distance(cloud_->point(items_[k]), q);
            if (d > exclude_below && d < best) best = d;
          }
        }
        if (r == 0) break;
      }
    }
    if (best <= r * cell_) break;
  }
  return best;
}

double directed_hausdorff(const AtomCloud& a, const AtomCloud& b) {
  if (a.empty() || b.empty()) throw ValidationError("hausdorff: empty cloud");
  const SpatialIndex index(b);
  std::vector<double> d(a.size());
  parallel_for(a.size(), [&](std::size_t i) { d[i] = index.nearest(a.point(i)); });
  return *std::max_element(d.begin(), d.end());
}

double hausdorff(const AtomCloud& a, const AtomCloud& b) {
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

double mean_atom_spacing(const AtomCloud& cloud) {
  const SpatialIndex index(cloud);
  std::vector<double> d(cloud.size());
  parallel_for(cloud.size(), [&](std::size_t i) {
    const double v = index.nearest(cloud.point(i), 1e-12);
    d[i] = std::isfinite(v) ? v : 0.0;
  });
  return pairwise_sum(d.data(), d.size()) / static_cast<double>(d.size());
}

StabilityScanResult stability_scan(const MapFamily& family, const GridSpec& grid, int depth,
                                   const StabilityOptions& options) {
  if (grid.m() != 1) throw ValidationError("stability_scan needs one complex parameter");
  check_grid_in_domain(family, grid);
  CloudOptions cloud_options = options.cloud;
  if (!cloud_options.base && cloud_options.method != CloudMethod::periodic)
    cloud_options.base = family.generic_base_point();
  const std::size_t n = grid.size();
  const bool one_dim = family.fiber_dim() == 1;

  StabilityScanResult result;
  result.verdict.grid = grid;
  result.verdict.quantity = "unstable_evidence";
  result.verdict.values.assign(n, 0.0);
  result.verdict.status.assign(n, NodeStatus::ok);
  result.hausdorff_max.assign(n, 0.0);
  result.critical_in_julia.assign(n, 0);
  result.attracting_cycles.assign(n, 0);

  std::vector<AtomCloud> clouds(n);
  parallel_for(n, [&](std::size_t i) {
    try {
      const MapInstance f = family.at(grid.param(i));
      clouds[i] = equilibrium_cloud(f, depth, cloud_options);
      if (!one_dim) return;
      const double eps = options.julia_spacing_factor * mean_atom_spacing(clouds[i]);
      const SpatialIndex index(clouds[i]);
      const auto crit = f.critical_points().components;
      for (std::size_t j = 0; j < crit.size() && j < 32; ++j)
        if (index.nearest(crit[j].point) <= eps) result.critical_in_julia[i] |= 1u << j;
      int attracting = 0;
      for (int period = 1; period <= options.attracting_period_max; ++period)
        for (const auto& orbit : periodic_points(f, period).orbits)
          attracting += orbit.classification == OrbitClass::attracting;
      result.attracting_cycles[i] = attracting;
    } catch (const EscapeError&) {
      result.verdict.status[i] = NodeStatus::escaped;
    } catch (const Error&) {
      result.verdict.status[i] = NodeStatus::failed;
    }
  });

  const int nx = grid.count(0), ny = grid.count(1);
  auto neighbors = [&](std::size_t i) {
    std::vector<std::size_t> out;
    const int x = static_cast<int>(i % static_cast<std::size_t>(nx)), y = static_cast<int>(i / static_cast<std::size_t>(nx));
    const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
    for (int d = 0; d < 4; ++d) {
      const int a = x + dx[d], b = y + dy[d];
      if (a < 0 || b < 0 || a >= nx || b >= ny) continue;
      const std::size_t j = static_cast<std::size_t>(b) * nx + a;
      if (result.verdict.ok(j)) out.push_back(j);
    }
    return out;
  };
  parallel_for(n, [&](std::size_t i) {
    if (!result.verdict.ok(i)) return;
    double h = 0.0;
    for (std::size_t j : neighbors(i)) h = std::max(h, hausdorff(clouds[i], clouds[j]));
    result.hausdorff_max[i] = h;
  });
  std::vector<double> ok_h;
  for (std::size_t i = 0; i < n; ++i)
    if (result.verdict.ok(i) && !neighbors(i).empty()) ok_h.push_back(result.hausdorff_max[i]);
  if (!ok_h.empty()) {
    std::nth_element(ok_h.begin(), ok_h.begin() + static_cast<long>(ok_h.size() / 2), ok_h.end());
    result.hausdorff_median = ok_h[ok_h.size() / 2];
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!result.verdict.ok(i)) {
      result.verdict.values[i] = std::nan("");
      continue;
    }
    bool unstable = result.hausdorff_median > 0.0 &&
                    result.hausdorff_max[i] > options.hausdorff_factor * result.hausdorff_median;
    for (std::size_t j : neighbors(i)) {
      if (result.critical_in_julia[i] != result.critical_in_julia[j]) unstable = true;
      if (result.attracting_cycles[i] != result.attracting_cycles[j]) unstable = true;
    }
    result.verdict.values[i] = unstable ? 1.0 : 0.0;
  }
  std::vector<double> crit_col(n), attr_col(n);
  for (std::size_t i = 0; i < n; ++i) {
    crit_col[i] = result.critical_in_julia[i];
    attr_col[i] = result.attracting_cycles[i];
  }
  result.verdict.extra_columns = {{"hausdorff_max", result.hausdorff_max},
                                  {"critical_in_julia", crit_col},
                                  {"attracting_cycles", attr_col}};
  return result;
}

HarmonicReport harmonic_check(const ScalarField& field, const std::vector<char>& mask, double reference_mass) {
  if (field.grid.m() != 1) throw ValidationError("harmonic_check needs a one-parameter field");
  if (mask.size() != field.size()) throw ValidationError("harmonic_check: mask size differs from the field");
  HarmonicReport report;
  const int nx = field.grid.count(0), ny = field.grid.count(1);
  const double area = field.grid.spacing(0) * field.grid.spacing(1);
  for (int j = 1; j + 1 < ny; ++j)
    for (int i = 1; i + 1 < nx; ++i) {
      const double lap = five_point_laplacian(field, i, j);
      if (std::isnan(lap)) continue;
      const double m = std::abs(lap) * area;
      report.global_mass += m;
      if (mask[static_cast<std::size_t>(j) * nx + i]) {
        report.masked_mass += m;
        ++report.nodes;
      }
    }
  const double denom = reference_mass > 0.0 ? reference_mass : report.global_mass;
  report.ratio = denom > 0.0 ? report.masked_mass / denom : 0.0;
  return report;
}

}  // namespace plbif
