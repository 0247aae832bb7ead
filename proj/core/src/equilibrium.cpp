#include "plbif/equilibrium.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "plbif/parallel.hpp"
#include "plbif/roots.hpp"

namespace plbif {

std::string to_string(CloudMethod method) {
  switch (method) {
    case CloudMethod::tree: return "tree";
    case CloudMethod::walk: return "walk";
    case CloudMethod::periodic: return "periodic";
  }
  return "unknown";
}

CloudMethod parse_cloud_method(const std::string& text) {
  if (text == "tree") return CloudMethod::tree;
  if (text == "walk") return CloudMethod::walk;
  if (text == "periodic") return CloudMethod::periodic;
  throw ValidationError("unknown cloud method '" + text + "' (tree, walk, periodic)");
}

GuardResult exceptional_guard(const MapInstance& f, const Point& z0, const GuardOptions& options) {
  GuardResult result;
  const double escape = f.escape_radius() * 4.0;
  for (const auto& comp : f.critical_points().components) {
    if (comp.axis >= 0) {
      // Images of the hyperplane {z_axis = c} are hyperplanes {z_axis = g^n(c)}.
      const auto coeffs = f.coefficients(comp.axis);
      Complex w = comp.point[comp.axis];
      for (int n = 1; n <= options.iterates; ++n) {
        w = horner(coeffs, w);
        if (std::abs(w) > escape) break;
        const double dist = std::abs(w - z0[comp.axis]);
        if (dist < options.epsilon) {
          result.pass = false;
          result.hit = Point(f.dim());
          result.hit[comp.axis] = w;
          result.iterate = n;
          result.distance = dist;
          return result;
        }
      }
    } else {
      Point w = comp.point;
      for (int n = 1; n <= options.iterates; ++n) {
        w = f.eval(w);
        if (w.max_norm() > escape) break;
        const double dist = max_distance(w, z0);
        if (dist < options.epsilon) {
          result.pass = false;
          result.hit = w;
          result.iterate = n;
          result.distance = dist;
          return result;
        }
      }
    }
  }
  return result;
}

Point default_base_point(const MapInstance& f, const GuardOptions& guard) {
  const Point fallback = generic_point(f.dim(), f.escape_radius());
  // A repelling fixed point lies in J, so its pullbacks and forward orbits stay in K.
  // Skew maps have a triangular Jacobian: repel in the base, then in the fiber over it.
  auto repelling_fixed = [](std::vector<Complex> c, auto&& derivative) -> std::optional<Complex> {
    c[1] -= 1.0;
    for (const Complex p : polynomial_roots(c).roots)
      if (std::abs(derivative(p)) > 1.0 + 1e-6) return p;
    return std::nullopt;
  };
  Point z(f.dim());
  for (int i = 0; i < f.dim(); ++i) {
    std::optional<Complex> p;
    if (f.is_skew_fiber(i)) {
      const auto c = f.fiber_coefficients(z[0]);
      p = repelling_fixed(c, [&](Complex w) {
        Complex d = 0.0;
        for (std::size_t j = c.size(); j-- > 1;) d = d * w + static_cast<double>(j) * c[j];
        return d;
      });
    } else {
      p = repelling_fixed({f.coefficients(i).begin(), f.coefficients(i).end()},
                          [&](Complex w) { return f.coordinate_derivative(i, w); });
    }
    if (!p) return fallback;
    z[i] = *p;
  }
  if (!exceptional_guard(f, z, guard).pass) return fallback;
  return z;
}

namespace {

AtomCloud periodic_cloud(const MapInstance& f, int period, const CloudOptions& options) {
  if (f.kind() == FamilyKind::skew)
    throw ValidationError("periodic clouds need a one-dimensional or product family");
  const int k = f.dim();
  std::size_t total = 1;
  for (int i = 0; i < k; ++i) total *= tree_size(f.coordinate_degree(i), period);
  if (total > options.node_budget)
    throw BudgetError(fmt::format("periodic cloud: {} atoms exceed the node budget {}", total, options.node_budget));
  std::array<std::vector<Complex>, kMaxFiberDim> per;
  std::string warning;
  for (int i = 0; i < k; ++i) {
    auto r = cycle_roots(f.coefficients(i), period, options.cycles);
    if (!r.warning.empty()) warning = r.warning;
    // Attracting cycles sit in the Fatou set and can carry critical points; keep J only.
    const auto coeffs = f.coefficients(i);
    auto& kept = per[static_cast<std::size_t>(i)];
    for (const Complex p : r.roots) {
      Complex w = p;
      double log_mult = 0.0;
      for (int step = 0; step < period; ++step) {
        log_mult += std::log(std::abs(f.coordinate_derivative(i, w)));
        Complex next = 0.0;
        for (std::size_t j = coeffs.size(); j-- > 0;) next = next * w + coeffs[j];
        w = next;
      }
      if (log_mult >= 0.0) kept.push_back(p);
    }
    if (kept.empty()) throw NumericalError("periodic cloud: no non-attracting cycle points found");
  }
  std::size_t count = 1;
  for (int i = 0; i < k; ++i) count *= per[static_cast<std::size_t>(i)].size();
  std::vector<Point> atoms(count, Point(k));
  for (std::size_t idx = 0; idx < count; ++idx) {
    std::size_t rest = idx;
    for (int i = k - 1; i >= 0; --i) {
      const auto& list = per[static_cast<std::size_t>(i)];
      atoms[idx][i] = list[rest % list.size()];
      rest /= list.size();
    }
  }
  AtomCloud cloud = AtomCloud::uniform(k, std::move(atoms));
  if (!warning.empty()) cloud.metadata().extra["warning"] = warning;
  return cloud;
}

AtomCloud single_depth(const MapInstance& f, const Point& base, int depth, std::uint64_t seed,
                       const CloudOptions& options) {
  switch (options.method) {
    case CloudMethod::tree: {
      TreeOptions tree;
      tree.node_budget = options.node_budget;
      tree.fiber = options.fiber;
      return pullback_tree(f, base, depth, tree);
    }
    case CloudMethod::walk:
      return inverse_walk(f, base, depth, options.walkers, seed, options.fiber);
    case CloudMethod::periodic:
      return periodic_cloud(f, depth, options);
  }
  throw ValidationError("unknown cloud method");
}

}  // namespace

AtomCloud equilibrium_cloud(const MapInstance& f, int depth, const CloudOptions& options) {
  if (depth < 1) throw ValidationError("equilibrium_cloud: depth must be >= 1");
  const bool uses_base = options.method != CloudMethod::periodic;
  const Point base = options.base ? *options.base : default_base_point(f, options.guard_options);
  if (uses_base && options.guard) {
    const auto g = exceptional_guard(f, base, options.guard_options);
    if (!g.pass)
      throw ValidationError(fmt::format("base point {} is within {:.3g} of the postcritical point {} (iterate {})",
                                        format_point(base.span()), g.distance, format_point(g.hit.span()),
                                        g.iterate));
  }
  const int window = std::max(1, std::min(options.cesaro_window, depth));
  AtomCloud cloud(f.dim());
  if (window == 1) {
    cloud = single_depth(f, base, depth, options.seed, options);
  } else {
    for (int j = 0; j < window; ++j) {
      const int d = depth - j;
      const auto part = single_depth(f, base, d, options.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(j), options);
      const double scale = 1.0 / window;
      cloud.reserve(cloud.size() + part.size());
      for (std::size_t a = 0; a < part.size(); ++a) cloud.add(part.point(a), part.weight(a) * scale);
      for (const auto& [key, value] : part.metadata().extra) cloud.metadata().extra[key] = value;
    }
    cloud.metadata().method = "cesaro";
    cloud.metadata().extra["window"] = std::to_string(window);
    cloud.metadata().extra["inner_method"] = to_string(options.method);
  }
  auto& meta = cloud.metadata();
  meta.depth = depth;
  if (window == 1) meta.method = to_string(options.method);
  meta.base = uses_base ? base : Point(f.dim());
  meta.seed = options.seed;
  meta.parameter = f.parameter();
  return cloud;
}

AtomCloud equilibrium_cloud(const MapFamily& family, const Param& s, int depth, const CloudOptions& options) {
  return equilibrium_cloud(family.at(s), depth, options);
}

namespace {

struct Reduced {
  double finite_weight = 0.0;
  double weighted_sum = 0.0;
  double excluded_weight = 0.0;
  std::size_t excluded_count = 0;
  std::size_t finite_count = 0;
};

Reduced reduce(const AtomCloud& cloud, std::span<const double> values) {
  const std::size_t n = cloud.size();
  std::vector<double> weighted(n, 0.0);
  std::vector<double> finite_w(n, 0.0);
  Reduced r;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = values[i];
    if (std::isnan(v)) throw NumericalError(fmt::format("observable is NaN at atom {}", format_point(cloud.point(i).span())));
    if (v == kNegInf) {
      r.excluded_weight += cloud.weight(i);
      ++r.excluded_count;
      continue;
    }
    if (std::isinf(v)) throw NumericalError(fmt::format("observable is +inf at atom {}", format_point(cloud.point(i).span())));
    weighted[i] = cloud.weight(i) * v;
    finite_w[i] = cloud.weight(i);
    ++r.finite_count;
  }
  r.weighted_sum = pairwise_sum(weighted.data(), n);
  r.finite_weight = pairwise_sum(finite_w.data(), n);
  const double total = r.finite_weight + r.excluded_weight;
  if (r.excluded_weight > kMaxExcludedWeight * total)
    throw IntegrabilityError(fmt::format("{:.3g}% of the weight ({} atoms) sits where the observable is -inf",
                                         100.0 * r.excluded_weight / total, r.excluded_count));
  return r;
}

std::vector<double> evaluate(const AtomCloud& cloud, const Observable& phi) {
  std::vector<double> values(cloud.size());
  parallel_for(cloud.size(), [&](std::size_t i) { values[i] = phi(cloud.point(i)); });
  return values;
}

}  // namespace

IntegralResult integrate(const AtomCloud& cloud, const Observable& phi) {
  if (cloud.empty()) throw ValidationError("integrate: empty cloud");
  const auto values = evaluate(cloud, phi);
  const Reduced r = reduce(cloud, values);
  IntegralResult out;
  out.value = r.excluded_weight > 0.0 ? r.weighted_sum / r.finite_weight : r.weighted_sum;
  out.excluded_weight = r.excluded_weight;
  out.excluded_count = r.excluded_count;
  return out;
}

Complex integrate_complex(const AtomCloud& cloud, const ComplexObservable& phi) {
  if (cloud.empty()) throw ValidationError("integrate: empty cloud");
  std::vector<double> re(cloud.size()), im(cloud.size());
  parallel_for(cloud.size(), [&](std::size_t i) {
    const Complex v = phi(cloud.point(i)) * cloud.weight(i);
    re[i] = v.real();
    im[i] = v.imag();
  });
  return {pairwise_sum(re.data(), re.size()), pairwise_sum(im.data(), im.size())};
}

SampleStats sample_stats(const AtomCloud& cloud, std::span<const double> values) {
  const Reduced r = reduce(cloud, values);
  SampleStats s;
  s.mean = r.weighted_sum / r.finite_weight;
  s.excluded_weight = r.excluded_weight;
  std::vector<double> sq(cloud.size(), 0.0);
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (std::isfinite(values[i])) sq[i] = cloud.weight(i) * (values[i] - s.mean) * (values[i] - s.mean);
  const double var = pairwise_sum(sq.data(), sq.size()) / r.finite_weight;
  s.std_error = r.finite_count > 0 ? std::sqrt(var / static_cast<double>(r.finite_count)) : 0.0;
  return s;
}

double pushforward(const MapInstance& f, const Observable& phi, int n, const Point& z, const TreeOptions& options) {
  const AtomCloud tree = pullback_tree(f, z, n, options);
  std::vector<double> values(tree.size());
  for (std::size_t i = 0; i < tree.size(); ++i) values[i] = phi(tree.point(i));
  return pairwise_sum(values.data(), values.size()) / static_cast<double>(values.size());
}

std::vector<Point> lattice_points(const MapInstance& f, const LatticeSpec& spec) {
  const int k = f.dim();
  double radius = spec.radius > 0.0 ? spec.radius : 0.9 * f.escape_radius();
  const int radial = spec.radial > 0 ? spec.radial : (k == 1 ? 64 : 8);
  const int angular = spec.angular > 0 ? spec.angular : (k == 1 ? 64 : 8);
  if (spec.radius <= 0.0 && spec.horizon > 0) {
    // With a large R the horizon filter keeps only a thin shell around K, which a uniform
    // radial net can miss entirely. Shrink the default radius to the surviving hull.
    const int probe = 16 * radial;
    double hull = 0.0;
    for (int i = 0; i < k; ++i)
      for (int j = 1; j <= probe; ++j)
        for (int a = 0; a < angular; ++a) {
          Point z(k);
          z[i] = std::polar(radius * j / probe, 2.0 * kPi * a / angular);
          if (f.in_filled_julia(z, spec.horizon).inside) hull = std::max(hull, radius * j / probe);
        }
    if (hull > 0.0) radius = std::min(radius, 1.25 * hull);
  }
  std::vector<Complex> net{0.0};
  for (int j = 1; j <= radial; ++j)
    for (int a = 0; a < angular; ++a)
      net.push_back(std::polar(radius * j / radial, 2.0 * kPi * a / angular));
  std::size_t total = 1;
  for (int i = 0; i < k; ++i) total *= net.size();
  std::vector<Point> out;
  for (std::size_t idx = 0; idx < total; ++idx) {
    Point z(k);
    std::size_t rest = idx;
    for (int i = k - 1; i >= 0; --i) {
      z[i] = net[rest % net.size()];
      rest /= net.size();
    }
    if (spec.horizon > 0 && !f.in_filled_julia(z, spec.horizon).inside) continue;
    out.push_back(z);
  }
  return out;
}

SupResult operator_sup(const MapInstance& f, const Observable& phi, int n, const LatticeSpec& spec,
                       const TreeOptions& options) {
  const auto lattice = lattice_points(f, spec);
  if (lattice.empty()) throw ValidationError("operator_sup: the lattice W is empty");
  std::vector<double> values(lattice.size());
  parallel_for(lattice.size(), [&](std::size_t i) { values[i] = pushforward(f, phi, n, lattice[i], options); });
  SupResult best;
  best.lattice_size = lattice.size();
  std::size_t arg = 0;
  for (std::size_t i = 1; i < lattice.size(); ++i) {
    if (values[i] > values[arg] ||
        (values[i] == values[arg] && canonical_less(lattice[i].span(), lattice[arg].span())))
      arg = i;
  }
  best.value = values[arg];
  best.argmax = lattice[arg];
  return best;
}

ConvergenceReport convergence_report(const MapInstance& f, const Observable& phi, int n_max,
                                     const std::string& description, const ConvergenceOptions& options) {
  if (n_max < 1) throw ValidationError("convergence_report: n_max must be >= 1");
  ConvergenceReport report;
  report.observable = description;
  report.reference_depth = n_max + 4;
  CloudOptions cloud_options;
  cloud_options.base = options.reference_base;
  cloud_options.node_budget = options.tree.node_budget;
  if (tree_size(f.degree(), report.reference_depth) > options.tree.node_budget) {
    cloud_options.method = CloudMethod::walk;
    cloud_options.walkers = 100000;
  }
  report.reference = integrate(equilibrium_cloud(f, report.reference_depth, cloud_options), phi).value;

  for (int n = 1; n <= n_max; ++n) {
    const double sup = operator_sup(f, phi, n, options.lattice, options.tree).value;
    report.sups.push_back(sup);
    report.gaps.push_back(sup - report.reference);
  }
  for (std::size_t i = 0; i < report.gaps.size(); ++i) {
    if (report.gaps[i] < -options.tol_quad) report.nonnegative = false;
    if (i + 1 < report.gaps.size() && report.gaps[i + 1] > report.gaps[i]) report.monotone = false;
  }
  // Least squares fit of log g_n = a + n log c0.
  std::vector<double> xs, ys;
  bool all_positive = true;
  for (int n = std::max(1, options.fit_from); n <= n_max; ++n) {
    const double g = report.gaps[static_cast<std::size_t>(n - 1)];
    if (!(g > options.tol_quad * 1e-3)) {
      all_positive = false;
      continue;
    }
    xs.push_back(n);
    ys.push_back(std::log(g));
  }
  if (all_positive && xs.size() >= 2) {
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double e = ys[i] - (my + slope * (xs[i] - mx));
      ss += e * e;
    }
    report.rate = std::exp(slope);
    report.rate_defined = true;
    report.fit_residual = std::sqrt(ss / xs.size());
    report.geometric = report.rate > 0.0 && report.rate < 1.0 && report.fit_residual < 0.25;
  }
  return report;
}

InvarianceResidual invariance_residual(const MapInstance& f, const AtomCloud& cloud, const Observable& phi) {
  const double base = integrate(cloud, phi).value;
  const double forward = integrate(cloud, [&](const Point& z) { return phi(f.eval(z)); }).value;
  const double pulled = integrate(cloud, [&](const Point& z) { return pushforward(f, phi, 1, z); }).value;
  return {std::abs(forward - base), std::abs(pulled - base)};
}

IntegralResult potential_1d(const AtomCloud& cloud, Complex w) {
  if (cloud.dim() != 1) throw ValidationError("potential_1d needs a one-dimensional cloud");
  return integrate(cloud, [w](const Point& z) {
    const double r = std::abs(w - z[0]);
    return r == 0.0 ? kNegInf : std::log(r);
  });
}

}  // namespace plbif
