#include "plbif/bifurcation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "plbif/parallel.hpp"

namespace plbif {

void check_grid_in_domain(const MapFamily& family, const GridSpec& grid) {
  if (grid.m() != family.param_dim())
    throw ValidationError(fmt::format("grid has {} parameters, family has {}", grid.m(), family.param_dim()));
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!family.contains(grid.param(i)))
      throw DomainError(fmt::format("grid node {} ({}) lies outside the parameter domain", i,
                                    format_point(grid.param(i).span())));
}

namespace {

ScalarField make_field(const GridSpec& grid, const std::string& quantity) {
  ScalarField field;
  field.grid = grid;
  field.quantity = quantity;
  field.values.assign(grid.size(), std::nan(""));
  field.status.assign(grid.size(), NodeStatus::ok);
  return field;
}

void check_failures(const ScalarField& field, double max_fraction, const char* what) {
  const std::size_t failed = field.failed_count();
  if (static_cast<double>(failed) > max_fraction * static_cast<double>(field.size()))
    throw NumericalError(fmt::format("{}: {} of {} nodes failed", what, failed, field.size()));
}

template <class Fn>
void run_nodes(ScalarField& field, Fn&& fn) {
  parallel_for(field.size(), [&](std::size_t i) {
    try {
      field.values[i] = fn(field.grid.param(i));
    } catch (const EscapeError&) {
      field.status[i] = NodeStatus::escaped;
    } catch (const Error&) {
      field.status[i] = NodeStatus::failed;
    }
    if (field.status[i] == NodeStatus::ok && !std::isfinite(field.values[i])) field.status[i] = NodeStatus::failed;
    if (field.status[i] != NodeStatus::ok) field.values[i] = std::nan("");
  });
}

}  // namespace

ScalarField scan(const MapFamily& family, const GridSpec& grid, const ScanConfig& config) {
  check_grid_in_domain(family, grid);
  const int k = family.fiber_dim();
  const int p = config.p == 0 ? k : config.p;
  if (p < 1 || p > k) throw ValidationError("scan: p must satisfy 1 <= p <= k");
  CloudOptions cloud = config.cloud;
  if (!cloud.base && cloud.method != CloudMethod::periodic) cloud.base = family.generic_base_point();
  ScalarField field = make_field(grid, fmt::format("L_{}", p));
  run_nodes(field, [&](const Param& s) {
    const MapInstance f = family.at(s);
    const AtomCloud atoms = equilibrium_cloud(f, config.depth, cloud);
    if (p == k) return sum_via_jacobian(f, atoms).value;
    return partial_sums_spatial(f, atoms, p, config.n, config.psi).phi_2n;
  });
  check_failures(field, config.max_failed_fraction, "scan");
  return field;
}

double five_point_laplacian(const ScalarField& field, int i, int j) {
  const int nx = field.grid.count(0);
  auto at = [&](int a, int b) { return static_cast<std::size_t>(b) * nx + a; };
  const std::size_t c = at(i, j), e = at(i + 1, j), w = at(i - 1, j), n = at(i, j + 1), s = at(i, j - 1);
  for (std::size_t idx : {c, e, w, n, s})
    if (!field.ok(idx)) return std::nan("");
  const double hx = field.grid.spacing(0), hy = field.grid.spacing(1);
  const auto& u = field.values;
  return (u[e] + u[w] - 2.0 * u[c]) / (hx * hx) + (u[n] + u[s] - 2.0 * u[c]) / (hy * hy);
}

CurrentField ddc(const ScalarField& field) {
  if (field.grid.m() != 1) throw ValidationError("ddc needs a one-parameter field");
  const int nx = field.grid.count(0), ny = field.grid.count(1);
  if (nx < 3 || ny < 3) throw ValidationError("ddc needs at least 3x3 nodes");
  CurrentField current;
  current.grid = field.grid;
  current.normalization = 1.0 / (2.0 * kPi);
  const double hx = field.grid.spacing(0), hy = field.grid.spacing(1);
  const double area = hx * hy;
  // Second differences cannot resolve mass below the rounding of the field values.
  double peak = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i)
    if (field.ok(i)) peak = std::max(peak, std::abs(field.values[i]));
  const double floor = 4.0 * std::numeric_limits<double>::epsilon() * (2.0 / (hx * hx) + 2.0 / (hy * hy)) *
                       current.normalization * area * peak;
  for (int j = 1; j < ny - 1; ++j)
    for (int i = 1; i < nx - 1; ++i) {
      current.cells.push_back(static_cast<std::size_t>(j) * nx + i);
      const double lap = five_point_laplacian(field, i, j);
      const bool bad = std::isnan(lap);
      current.flagged.push_back(bad ? 1 : 0);
      current.raw.push_back(bad ? 0.0 : current.normalization * lap * area);
    }
  current.mass.resize(current.raw.size());
  std::vector<double> negative(current.raw.size(), 0.0);
  for (std::size_t c = 0; c < current.raw.size(); ++c) {
    current.mass[c] = current.raw[c] > floor ? current.raw[c] : 0.0;
    negative[c] = -current.raw[c] > floor ? -current.raw[c] : 0.0;
  }
  current.total_mass = pairwise_sum(current.mass.data(), current.mass.size());
  current.clipped_residual = pairwise_sum(negative.data(), negative.size());
  current.reliable = current.clipped_residual <= 0.05 * current.total_mass;
  return current;
}

SupportResult support(const CurrentField& current, double tau, double reference_max) {
  if (!(tau > 0.0 && tau < 1.0)) throw ValidationError("support: tau must lie in (0, 1)");
  SupportResult result;
  const double scale = reference_max > 0.0 ? reference_max : current.max_mass();
  result.threshold = tau * scale;
  if (!(scale > 0.0)) return result;
  std::vector<char> in(current.cells.size(), 0);
  for (std::size_t c = 0; c < current.cells.size(); ++c)
    if (!current.flagged[c] && current.mass[c] > result.threshold) {
      in[c] = 1;
      result.cells.push_back(c);
    }
  if (current.grid.m() != 1) return result;
  // Interior cells form an (nx-2) x (ny-2) raster in the order of `cells`.
  const int w = current.grid.count(0) - 2, h = current.grid.count(1) - 2;
  std::vector<char> seen(in.size(), 0);
  for (std::size_t start : result.cells) {
    if (seen[start]) continue;
    std::size_t size = 0;
    std::deque<std::size_t> queue{start};
    seen[start] = 1;
    while (!queue.empty()) {
      const std::size_t c = queue.front();
      queue.pop_front();
      ++size;
      const int x = static_cast<int>(c % static_cast<std::size_t>(w)), y = static_cast<int>(c / static_cast<std::size_t>(w));
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int a = x + dx, b = y + dy;
          if (a < 0 || b < 0 || a >= w || b >= h) continue;
          const std::size_t nb = static_cast<std::size_t>(b) * w + a;
          if (in[nb] && !seen[nb]) {
            seen[nb] = 1;
            queue.push_back(nb);
          }
        }
    }
    result.components.push_back(size);
  }
  std::sort(result.components.rbegin(), result.components.rend());
  return result;
}

CurrentField hessian_det(const ScalarField& field) {
  if (field.grid.m() != 2) throw ValidationError("hessian_det needs a two-parameter field");
  if (field.failed_count() != 0) throw ValidationError("hessian_det needs every node ok");
  for (int a = 0; a < 4; ++a)
    if (field.grid.count(a) < 3) throw ValidationError("hessian_det needs at least 3 nodes per axis");
  CurrentField current;
  current.grid = field.grid;
  current.experimental = true;
  current.normalization = 8.0 / (kPi * kPi);
  double volume = 1.0;
  std::array<double, 4> h{};
  for (int a = 0; a < 4; ++a) {
    h[static_cast<std::size_t>(a)] = field.grid.spacing(a);
    volume *= h[static_cast<std::size_t>(a)];
  }
  const auto& u = field.values;
  for (std::size_t node = 0; node < field.size(); ++node) {
    const auto idx = field.grid.unravel(node);
    bool interior = true;
    for (int a = 0; a < 4; ++a)
      if (idx[static_cast<std::size_t>(a)] == 0 || idx[static_cast<std::size_t>(a)] == field.grid.count(a) - 1) interior = false;
    if (!interior) continue;
    auto shifted = [&](int a, int da, int b, int db) {
      auto j = idx;
      j[static_cast<std::size_t>(a)] += da;
      if (b >= 0) j[static_cast<std::size_t>(b)] += db;
      return u[field.grid.ravel(j)];
    };
    auto d2 = [&](int a) {
      return (shifted(a, 1, -1, 0) + shifted(a, -1, -1, 0) - 2.0 * u[node]) / (h[static_cast<std::size_t>(a)] * h[static_cast<std::size_t>(a)]);
    };
    auto mixed = [&](int a, int b) {
      return (shifted(a, 1, b, 1) - shifted(a, 1, b, -1) - shifted(a, -1, b, 1) + shifted(a, -1, b, -1)) /
             (4.0 * h[static_cast<std::size_t>(a)] * h[static_cast<std::size_t>(b)]);
    };
    // Axes: 0 = x1, 1 = y1, 2 = x2, 3 = y2.
    const double h11 = 0.25 * (d2(0) + d2(1));
    const double h22 = 0.25 * (d2(2) + d2(3));
    const Complex h12 = 0.25 * Complex(mixed(0, 2) + mixed(1, 3), mixed(0, 3) - mixed(1, 2));
    const double det = h11 * h22 - std::norm(h12);
    current.cells.push_back(node);
    current.flagged.push_back(0);
    current.raw.push_back(current.normalization * det * volume);
  }
  current.mass.resize(current.raw.size());
  for (std::size_t c = 0; c < current.raw.size(); ++c) {
    current.mass[c] = std::max(current.raw[c], 0.0);
    current.clipped_residual += std::max(-current.raw[c], 0.0);
  }
  current.total_mass = pairwise_sum(current.mass.data(), current.mass.size());
  current.reliable = current.clipped_residual <= 0.05 * current.total_mass;
  return current;
}

ScalarField critical_gap_scan(const MapFamily& family, const GridSpec& grid, int depth, const CloudOptions& cloud) {
  check_grid_in_domain(family, grid);
  CloudOptions options = cloud;
  if (!options.base && options.method != CloudMethod::periodic) options.base = family.generic_base_point();
  ScalarField field = make_field(grid, "critical_gap");
  run_nodes(field, [&](const Param& s) {
    const MapInstance f = family.at(s);
    const AtomCloud atoms = equilibrium_cloud(f, depth, options);
    const CriticalSet crit = f.critical_points();
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& z : atoms.points()) gap = std::min(gap, crit.distance(z));
    return gap;
  });
  check_failures(field, 0.05, "critical_gap_scan");
  return field;
}

SubmeanReport submean_check(const ScalarField& field, double epsilon) {
  if (field.grid.m() != 1) throw ValidationError("submean_check needs a one-parameter field");
  SubmeanReport report;
  const int nx = field.grid.count(0), ny = field.grid.count(1);
  for (int j = 1; j + 1 < ny; ++j)
    for (int i = 1; i + 1 < nx; ++i) {
      const std::size_t c = static_cast<std::size_t>(j) * nx + i;
      if (!field.ok(c)) continue;
      double sum = 0.0;
      bool ok = true;
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          const std::size_t nb = static_cast<std::size_t>(j + dj) * nx + (i + di);
          if (!field.ok(nb)) ok = false;
          sum += field.values[nb];
        }
      if (!ok) continue;
      const double residual = field.values[c] - sum / 8.0;
      ++report.checked;
      report.max_residual = std::max(report.max_residual, residual);
      if (residual > epsilon) report.violations.push_back({c, residual});
    }
  return report;
}

}  // namespace plbif
