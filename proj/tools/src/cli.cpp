#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

#include "cache.hpp"
#include "plbif/bifurcation.hpp"
#include "plbif/equilibrium.hpp"
#include "plbif/family_io.hpp"
#include "plbif/lyapunov.hpp"
#include "plbif/parallel.hpp"
#include "plbif/preimage.hpp"
#include "plbif/slicing.hpp"
#include "plbif/stability.hpp"
#include "plbif/version.hpp"
#include "selftest.hpp"

namespace fs = std::filesystem;

namespace plbif::cli {

namespace {

struct Options {
  std::string family;
  std::string out_dir = ".";
  int threads = 0;
  bool no_cache = false;
  std::string cache_dir;

  std::string param;
  std::string param2;
  std::string grid;
  int depth = -1;
  int n = 8;
  int p = 0;
  int orbit_length = 0;
  int burn_in = 0;

  std::string method = "tree";
  std::uint64_t seed = 0;
  std::size_t walkers = 4096;
  int cesaro = 1;
  std::string base;
  std::size_t node_budget = std::size_t{1} << 20;
  bool no_guard = false;

  double tau = 1e-3;
  int period = 1;
  int measure_depth = 0;
  int track_period = 0;
  int resolution = 512;
  std::vector<int> depths;
  bool archive = false;
  double hausdorff_factor = 3.0;
};

double parse_number(const std::string& text, const std::string& what) {
  const std::string t = text.substr(text.find_first_not_of(' ') == std::string::npos ? 0 : text.find_first_not_of(' '));
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (t.find_first_not_of(' ', used) == std::string::npos && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError(fmt::format("{}: '{}' is not a finite number", what, text));
}

Complex parse_complex(const std::string& text, const std::string& what) {
  const auto comma = text.find(',');
  if (comma == std::string::npos || text.find(',', comma + 1) != std::string::npos)
    throw ValidationError(fmt::format("{}: expected \"re,im\", got '{}'", what, text));
  return {parse_number(text.substr(0, comma), what), parse_number(text.substr(comma + 1), what)};
}

/// "re,im" per coordinate, coordinates separated by ';'.
Point parse_point(const std::string& text, int dim, const std::string& what) {
  std::vector<Complex> coords;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ';')) coords.push_back(parse_complex(piece, what));
  if (static_cast<int>(coords.size()) != dim)
    throw ValidationError(fmt::format("{}: expected {} coordinate(s), got {}", what, dim, coords.size()));
  return Point(std::span<const Complex>(coords));
}

fs::path resolve_family_path(const std::string& name) {
  if (name.empty()) throw ValidationError("--family is required");
  std::vector<fs::path> candidates{name};
  if (const char* dir = std::getenv("PLBIF_FAMILY_DIR"); dir && *dir) candidates.emplace_back(fs::path(dir) / name);
#ifdef PLBIF_FAMILY_SOURCE_DIR
  candidates.emplace_back(fs::path(PLBIF_FAMILY_SOURCE_DIR) / name);
#endif
#ifdef PLBIF_FAMILY_INSTALL_DIR
  candidates.emplace_back(fs::path(PLBIF_FAMILY_INSTALL_DIR) / name);
#endif
  std::error_code ec;
  for (const auto& c : candidates) {
    if (fs::is_regular_file(c, ec)) return c;
    if (!c.has_extension() && fs::is_regular_file(fs::path(c).replace_extension(".fam"), ec))
      return fs::path(c).replace_extension(".fam");
  }
  throw ValidationError("family file not found: " + name);
}

/// Resolved settings of one run. Everything that can change an artifact goes
/// into `settings`, so the hash addresses the artifacts exactly.
struct RunConfig {
  std::string command;
  std::string family_path;
  std::string family_text;
  std::vector<std::pair<std::string, std::string>> settings;

  void set(const std::string& key, const std::string& value) { settings.emplace_back(key, value); }
  template <typename T>
  void set(const std::string& key, const T& value) {
    settings.emplace_back(key, fmt::format("{}", value));
  }

  std::string canonical() const {
    std::string text = fmt::format("command={}\nversion={}\n", command, version());
    for (const auto& [k, v] : settings) text += k + "=" + v + "\n";
    return text + "family:\n" + family_text;
  }
  std::string hash() const { return hex64(fnv1a(canonical())); }
};

struct Context {
  Context(const Options& o, std::ostream& out_stream, std::ostream& err_stream, std::vector<std::string> args)
      : opt(o), out(out_stream), err(err_stream), argv(std::move(args)), out_dir(o.out_dir) {}

  const Options& opt;
  std::ostream& out;
  std::ostream& err;
  std::vector<std::string> argv;
  fs::path out_dir;
  RunConfig config;
  MapFamily family = MapFamily::unicritical(2, {-1, 1, -1, 1});
  std::vector<std::string> artifacts;
  CacheStatus cache = CacheStatus::off;

  fs::path path(const std::string& name) const { return out_dir / name; }
};

void load_family(Context& ctx) {
  const fs::path path = resolve_family_path(ctx.opt.family);
  ctx.family = plbif::load_family(path.string());
  ctx.config.family_path = path.string();
  ctx.config.family_text = family_to_text(ctx.family);
}

Param resolve_param(Context& ctx) {
  if (ctx.opt.param.empty()) throw ValidationError("--param is required");
  std::vector<Complex> s{parse_complex(ctx.opt.param, "--param")};
  if (ctx.family.param_dim() == 2) {
    if (ctx.opt.param2.empty()) throw ValidationError("--param2 is required for a two-parameter family");
    s.push_back(parse_complex(ctx.opt.param2, "--param2"));
  } else if (!ctx.opt.param2.empty()) {
    throw ValidationError("--param2 given for a one-parameter family");
  }
  const Param p{std::span<const Complex>(s)};
  ctx.config.set("param", format_point(p.span()));
  return p;
}

GridSpec resolve_grid(Context& ctx) {
  if (ctx.opt.grid.empty()) throw ValidationError("--grid is required");
  GridSpec grid = GridSpec::parse(ctx.opt.grid);
  check_grid_in_domain(ctx.family, grid);
  ctx.config.set("grid", grid.describe());
  return grid;
}

/// An explicit --depth wins; the default shrinks until a full tree fits the budget.
int resolve_depth(Context& ctx, int fallback) {
  int depth = ctx.opt.depth;
  if (depth <= 0) {
    depth = fallback;
    while (depth > 1 && tree_size(ctx.family.degree(), depth) > ctx.opt.node_budget) --depth;
  }
  ctx.config.set("depth", depth);
  return depth;
}

CloudOptions resolve_cloud(Context& ctx, bool seed_given) {
  CloudOptions co;
  co.method = parse_cloud_method(ctx.opt.method);
  if (co.method == CloudMethod::walk && !seed_given)
    throw ValidationError("--seed is required with --method walk");
  co.seed = ctx.opt.seed;
  co.walkers = ctx.opt.walkers;
  co.cesaro_window = ctx.opt.cesaro;
  co.node_budget = ctx.opt.node_budget;
  co.guard = !ctx.opt.no_guard;
  if (!ctx.opt.base.empty()) co.base = parse_point(ctx.opt.base, ctx.family.fiber_dim(), "--base");
  ctx.config.set("method", to_string(co.method));
  ctx.config.set("seed", co.seed);
  ctx.config.set("walkers", co.walkers);
  ctx.config.set("cesaro", co.cesaro_window);
  ctx.config.set("node_budget", co.node_budget);
  ctx.config.set("guard", co.guard ? "on" : "off");
  ctx.config.set("base", co.base ? format_point(co.base->span()) : std::string("default"));
  return co;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void add_artifact(Context& ctx, const std::string& name) { ctx.artifacts.push_back(name); }

void add_pgm(Context& ctx, const std::string& name) {
  ctx.artifacts.push_back(name);
  ctx.artifacts.push_back(name + ".meta");
}

std::string quote_arg(const std::string& a) {
  if (!a.empty() && a.find_first_of(" \t\"'\\;$") == std::string::npos) return a;
  std::string q = "'";
  for (char c : a) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

void write_manifest(const Context& ctx, double wall_seconds) {
  std::string text;
  text += fmt::format("command={}\n", ctx.config.command);
  std::string argv;
  for (const auto& a : ctx.argv) argv += (argv.empty() ? "" : " ") + quote_arg(a);
  text += fmt::format("argv={}\n", argv);
  text += fmt::format("version={}\n", version());
  text += fmt::format("config_hash={}\n", ctx.config.hash());
  text += fmt::format("family_path={}\n", ctx.config.family_path);
  text += fmt::format("family_hash={}\n", hex64(fnv1a(ctx.config.family_text)));
  for (const auto& [k, v] : ctx.config.settings) text += k + "=" + v + "\n";
  text += fmt::format("threads={}\n", thread_count());
  text += fmt::format("cache={}\n", to_string(ctx.cache));
  text += fmt::format("wall_time_s={:.6f}\n", wall_seconds);
  std::string names;
  for (const auto& a : ctx.artifacts) names += (names.empty() ? "" : ",") + a;
  text += fmt::format("artifacts={}\n", names);
  write_text(ctx.path(ctx.config.command + ".manifest"), text);
}

/// Runs `compute` unless the cache holds the artifacts; prints the summary
/// artifact either way.
template <typename Fn>
void cached(Context& ctx, const std::vector<std::string>& names, const std::string& summary, Fn&& compute) {
  FieldCache cache(ctx.opt.no_cache ? fs::path{}
                                    : (ctx.opt.cache_dir.empty() ? FieldCache::default_root() : fs::path(ctx.opt.cache_dir)));
  const std::string key = ctx.config.hash();
  ctx.cache = cache.restore(key, names, ctx.out_dir, ctx.err);
  if (ctx.cache != CacheStatus::hit) {
    compute();
    if (cache.enabled()) {
      try {
        cache.store(key, names, ctx.out_dir);
      } catch (const fs::filesystem_error& e) {
        ctx.err << "warning: could not store cache entry: " << e.what() << '\n';
      }
    }
  }
  ctx.artifacts.insert(ctx.artifacts.end(), names.begin(), names.end());
  if (ctx.cache == CacheStatus::hit) ctx.out << "cache hit " << key << '\n';
  ctx.out << read_text(ctx.path(summary));
}

std::string param_header(int m) { return m == 2 ? "s_re,s_im,s2_re,s2_im" : "s_re,s_im"; }

std::string param_row(const Param& s) {
  std::string row;
  for (int i = 0; i < s.dim(); ++i) row += fmt::format("{}{:.17g},{:.17g}", i ? "," : "", s[i].real(), s[i].imag());
  return row;
}

// ---------------------------------------------------------------- commands

void cmd_lyapunov(Context& ctx, bool seed_given) {
  load_family(ctx);
  const Param s = resolve_param(ctx);
  const int depth = resolve_depth(ctx, 12);
  CloudOptions co = resolve_cloud(ctx, seed_given);
  EstimateOptions eo;
  eo.n = ctx.opt.n;
  eo.orbit_length = ctx.opt.orbit_length;
  eo.burn_in = ctx.opt.burn_in;
  ctx.config.set("n", eo.n);
  ctx.config.set("orbit_length", eo.orbit_length);
  ctx.config.set("burn_in", eo.burn_in);

  const MapInstance f = ctx.family.at(s);
  const AtomCloud cloud = equilibrium_cloud(f, depth, co);
  ExponentEstimate est = estimate_exponents(f, cloud, eo);
  est.parameter = s;
  est.depth = depth;

  const int k = est.k();
  for (int p = 1; p <= k; ++p)
    ctx.out << fmt::format("L_{} = {:.6f} ± {:.2e}\n", p, est.L[static_cast<std::size_t>(p - 1)],
                           est.std_error[static_cast<std::size_t>(p - 1)]);
  const auto chi = est.chi();
  for (int p = 1; p <= k && k > 1; ++p) ctx.out << fmt::format("chi_{} = {:.6f}\n", p, chi[static_cast<std::size_t>(p - 1)]);
  if (eo.orbit_length > 0) ctx.out << fmt::format("orbit spread = {:.2e}\n", est.spread);
  ctx.out << fmt::format("L_{} >= log(d_t)/2: {}\n", k, est.satisfies_degree_bound(f.degree()) ? "yes" : "NO");

  std::string header = param_header(ctx.family.param_dim());
  for (int p = 1; p <= k; ++p) header += fmt::format(",L_{}", p);
  for (int p = 1; p <= k; ++p) header += fmt::format(",se_{}", p);
  header += ",depth,orbit_length,method,spread\n";
  std::string row = param_row(s);
  for (double v : est.L) row += fmt::format(",{:.17g}", v);
  for (double v : est.std_error) row += fmt::format(",{:.17g}", v);
  row += fmt::format(",{},{},{},{:.17g}\n", est.depth, eo.orbit_length, est.method, est.spread);
  write_text(ctx.path("lyapunov.csv"), header + row);
  add_artifact(ctx, "lyapunov.csv");
}

ScanConfig resolve_scan(Context& ctx, bool seed_given, int default_depth) {
  ScanConfig sc;
  sc.depth = resolve_depth(ctx, default_depth);
  sc.cloud = resolve_cloud(ctx, seed_given);
  sc.p = ctx.opt.p;
  sc.n = ctx.opt.n;
  ctx.config.set("p", sc.p);
  ctx.config.set("n", sc.n);
  return sc;
}

std::string field_summary(const ScalarField& field) {
  std::size_t escaped = 0;
  for (auto s : field.status) escaped += s == NodeStatus::escaped;
  return fmt::format("nodes={}\nfailed={}\nescaped={}\nmin={:.17g}\nmax={:.17g}\n", field.size(),
                     field.failed_count() - escaped, escaped, field.min_ok(), field.max_ok());
}

void cmd_scan(Context& ctx, bool seed_given) {
  load_family(ctx);
  const GridSpec grid = resolve_grid(ctx);
  const ScanConfig sc = resolve_scan(ctx, seed_given, 10);
  std::vector<std::string> names{"scan.csv", "scan_summary.txt"};
  if (grid.m() == 1) names.insert(names.end(), {"scan.pgm", "scan.pgm.meta"});
  cached(ctx, names, "scan_summary.txt", [&] {
    const ScalarField field = scan(ctx.family, grid, sc);
    field.write_csv(ctx.path("scan.csv").string());
    if (grid.m() == 1) write_pgm(ctx.path("scan.pgm").string(), field);
    write_text(ctx.path("scan_summary.txt"), field_summary(field));
  });
}

void write_support_csv(const fs::path& path, const CurrentField& current, const SupportResult& support) {
  std::string text = "cell_center_re,cell_center_im,mass\n";
  for (std::size_t c : support.cells) {
    const Param s = current.grid.param(current.cells[c]);
    text += fmt::format("{:.17g},{:.17g},{:.17g}\n", s[0].real(), s[0].imag(), current.mass[c]);
  }
  write_text(path, text);
}

void cmd_bifurcation(Context& ctx, bool seed_given) {
  load_family(ctx);
  const GridSpec grid = resolve_grid(ctx);
  const ScanConfig sc = resolve_scan(ctx, seed_given, 10);
  ctx.config.set("tau", fmt::format("{:.17g}", ctx.opt.tau));
  if (grid.m() == 2) {
    cached(ctx, {"field.csv", "hessian.csv", "bifurcation_summary.txt"}, "bifurcation_summary.txt", [&] {
      const ScalarField field = scan(ctx.family, grid, sc);
      field.write_csv(ctx.path("field.csv").string());
      const CurrentField h = hessian_det(field);
      h.write_csv(ctx.path("hessian.csv").string());
      write_text(ctx.path("bifurcation_summary.txt"),
                 field_summary(field) + fmt::format("experimental=hessian_det\ntotal_mass={:.17g}\nreliable={}\n",
                                                    h.total_mass, h.reliable ? "yes" : "no"));
    });
    return;
  }
  const std::vector<std::string> names{"field.csv", "field.pgm", "field.pgm.meta", "ddc.csv",
                                       "ddc.pgm",   "ddc.pgm.meta", "support.csv", "bifurcation_summary.txt"};
  cached(ctx, names, "bifurcation_summary.txt", [&] {
    const ScalarField field = scan(ctx.family, grid, sc);
    field.write_csv(ctx.path("field.csv").string());
    write_pgm(ctx.path("field.pgm").string(), field);
    const CurrentField current = ddc(field);
    current.write_csv(ctx.path("ddc.csv").string());
    write_pgm(ctx.path("ddc.pgm").string(), current);
    const SupportResult sup = support(current, ctx.opt.tau);
    write_support_csv(ctx.path("support.csv"), current, sup);
    std::string comps;
    for (std::size_t i = 0; i < sup.components.size() && i < 8; ++i) comps += fmt::format("{}{}", i ? "," : "", sup.components[i]);
    write_text(ctx.path("bifurcation_summary.txt"),
               field_summary(field) +
                   fmt::format("total_mass={:.17g}\nclipped_residual={:.17g}\nreliable={}\nsupport_cells={}\n"
                               "support_threshold={:.17g}\nsupport_components={}\nlargest_components={}\n",
                               current.total_mass, current.clipped_residual, current.reliable ? "yes" : "no",
                               sup.cells.size(), sup.threshold, sup.components.size(), comps));
  });
}

void cmd_julia(Context& ctx, bool seed_given) {
  load_family(ctx);
  const Param s = resolve_param(ctx);
  const int depth = resolve_depth(ctx, 10);
  const CloudOptions co = resolve_cloud(ctx, seed_given);
  ctx.config.set("resolution", ctx.opt.resolution);
  const MapInstance f = ctx.family.at(s);
  const AtomCloud cloud = equilibrium_cloud(f, depth, co);
  cloud.write_csv(ctx.path("cloud.csv").string());
  cloud.write_sidecar(ctx.path("cloud.meta").string());
  add_artifact(ctx, "cloud.csv");
  add_artifact(ctx, "cloud.meta");

  // Mass histogram of the first coordinate on a square centered at 0.
  const int res = ctx.opt.resolution;
  double half = 0.0;
  for (const auto& z : cloud.points()) half = std::max({half, std::abs(z[0].real()), std::abs(z[0].imag())});
  half = half > 0.0 ? half * 1.02 : 1.0;
  std::vector<double> img(static_cast<std::size_t>(res) * res, 0.0);
  for (std::size_t a = 0; a < cloud.size(); ++a) {
    const Complex z = cloud.point(a)[0];
    const int col = std::clamp(static_cast<int>((z.real() + half) / (2 * half) * res), 0, res - 1);
    const int row = std::clamp(static_cast<int>((half - z.imag()) / (2 * half) * res), 0, res - 1);
    img[static_cast<std::size_t>(row) * res + col] += cloud.weight(a);
  }
  write_pgm(ctx.path("julia.pgm").string(), res, res, img);
  add_pgm(ctx, "julia.pgm");
  ctx.out << fmt::format("atoms = {}\nmax_norm = {:.6f}\nmethod = {}\n", cloud.size(), cloud.max_norm(),
                         cloud.metadata().method);
}

std::string orbit_row(const PeriodicOrbit& o) {
  return fmt::format("{},{:.17g},{:.17g},{:.17g},{},{:.3e}\n", o.period, o.points[0][0].real(), o.points[0][0].imag(),
                     std::abs(o.multiplier), to_string(o.classification), o.residual);
}

void cmd_periodic(Context& ctx) {
  load_family(ctx);
  const Param s = resolve_param(ctx);
  ctx.config.set("period", ctx.opt.period);
  ctx.config.set("measure_depth", ctx.opt.measure_depth);
  const MapInstance f = ctx.family.at(s);
  const PeriodicPointsResult res = periodic_points(f, ctx.opt.period);
  std::string text = "period,point_re,point_im,multiplier_abs,class,residual\n";
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& o : res.orbits) {
    text += orbit_row(o);
    ++counts[static_cast<int>(o.classification)];
  }
  write_text(ctx.path("periodic.csv"), text);
  add_artifact(ctx, "periodic.csv");
  ctx.out << fmt::format("orbits = {}\npoints = {} (expected {})\nattracting = {}\nrepelling = {}\nindifferent = {}\n",
                         res.orbits.size(), res.found_points, res.expected_points, counts[0], counts[1], counts[2]);
  if (!res.warning.empty()) ctx.err << "warning: " << res.warning << '\n';

  if (ctx.opt.measure_depth > 0) {
    const PeriodicOrbit* base = nullptr;
    for (const auto& o : res.orbits)
      if (o.classification == OrbitClass::repelling) {
        base = &o;
        break;
      }
    if (!base) throw ValidationError(fmt::format("no repelling orbit of period {} for the periodic measure", ctx.opt.period));
    const AtomCloud mu = periodic_measure(f, *base, ctx.opt.measure_depth);
    mu.write_csv(ctx.path("measure.csv").string());
    mu.write_sidecar(ctx.path("measure.meta").string());
    add_artifact(ctx, "measure.csv");
    add_artifact(ctx, "measure.meta");
    ctx.out << fmt::format("measure atoms = {} (base {})\n", mu.size(), format_point(base->points[0].span()));
  }
}

void cmd_stability(Context& ctx, bool seed_given) {
  load_family(ctx);
  const GridSpec grid = resolve_grid(ctx);
  const int depth = resolve_depth(ctx, 10);
  StabilityOptions so;
  so.cloud = resolve_cloud(ctx, seed_given);
  so.hausdorff_factor = ctx.opt.hausdorff_factor;
  ctx.config.set("hausdorff_factor", fmt::format("{:.17g}", so.hausdorff_factor));
  ctx.config.set("track_period", ctx.opt.track_period);
  std::vector<std::string> names{"stability.csv", "stability.pgm", "stability.pgm.meta", "stability_summary.txt"};
  if (ctx.opt.track_period > 0) names.push_back("tracking.csv");
  cached(ctx, names, "stability_summary.txt", [&] {
    const StabilityScanResult res = stability_scan(ctx.family, grid, depth, so);
    res.verdict.write_csv(ctx.path("stability.csv").string());
    write_pgm(ctx.path("stability.pgm").string(), res.verdict);
    std::string flagged;
    std::size_t count = 0;
    for (std::size_t i = 0; i < res.verdict.size(); ++i)
      if (res.verdict.ok(i) && res.verdict.values[i] > 0.5) {
        if (count < 64) flagged += fmt::format("{}{}", count ? "," : "", i);
        ++count;
      }
    std::string summary = field_summary(res.verdict) +
                          fmt::format("hausdorff_median={:.17g}\nunstable_nodes={}\nunstable_first={}\n",
                                      res.hausdorff_median, count, flagged);
    if (ctx.opt.track_period > 0) {
      std::vector<Param> path;
      for (std::size_t i = 0; i < grid.size(); ++i) path.push_back(grid.param(i));
      const MapInstance f0 = ctx.family.at(path.front());
      const auto orbits = periodic_points(f0, ctx.opt.track_period).orbits;
      if (orbits.empty()) throw NumericalError("no periodic orbit to track at the first node");
      const auto start = std::min_element(orbits.begin(), orbits.end(), [](const auto& a, const auto& b) {
        return std::abs(a.multiplier) < std::abs(b.multiplier);
      });
      const TrackedBranch branch = track_periodic(ctx.family, path, *start);
      std::string text = param_header(1) + ",point_re,point_im,multiplier_abs,class,halvings\n";
      for (const auto& node : branch.nodes)
        text += fmt::format("{},{:.17g},{:.17g},{:.17g},{},{}\n", param_row(node.parameter), node.orbit.points[0][0].real(),
                            node.orbit.points[0][0].imag(), std::abs(node.orbit.multiplier),
                            to_string(node.orbit.classification), node.halvings);
      write_text(ctx.path("tracking.csv"), text);
      summary += fmt::format("tracking_flagged_node={}\ntracking_reason={}\n", branch.flagged_node,
                             branch.reason.empty() ? "none" : branch.reason);
    }
    write_text(ctx.path("stability_summary.txt"), summary);
  });
}

void cmd_slice_check(Context& ctx) {
  load_family(ctx);
  const GridSpec grid = resolve_grid(ctx);
  std::vector<int> depths = ctx.opt.depths;
  if (depths.empty()) depths.push_back(ctx.opt.depth > 0 ? ctx.opt.depth : 6);
  std::string dl;
  for (int d : depths) dl += fmt::format("{}{}", dl.empty() ? "" : ",", d);
  ctx.config.set("depths", dl);
  const Point base = ctx.opt.base.empty() ? ctx.family.generic_base_point()
                                          : parse_point(ctx.opt.base, ctx.family.fiber_dim(), "--base");
  ctx.config.set("base", format_point(base.span()));
  const AtomCloud theta = AtomCloud::uniform(ctx.family.fiber_dim(), {base});
  const auto library = test_function_library();
  const ParamWeight omega = [](const Param&) { return 1.0; };

  std::string text = "depth,function,lhs,rhs,relative_residual,mass_spread\n";
  double worst = 0.0, worst_spread = 0.0;
  for (int n : depths) {
    const HorizontalCurrentSamples current = build_current(ctx.family, grid, theta, n);
    for (const auto& obs : library) {
      const SliceFunction psi = [&](const Param&, const Point& z) { return obs.fn(z); };
      const SliceFormulaResult r = slice_formula_check(current, psi, omega);
      const double rel = r.relative_residual();
      worst = std::max(worst, rel);
      text += fmt::format("{},{},{:.17g},{:.17g},{:.3e},{:.3e}\n", n, obs.name, r.lhs, r.rhs, rel, current.mass_spread());
    }
    worst_spread = std::max(worst_spread, current.mass_spread());
    if (ctx.opt.archive) {
      const std::string dir = fmt::format("slices_n{}", n);
      current.write_archive(ctx.path(dir).string());
      add_artifact(ctx, dir + "/");
    }
  }
  write_text(ctx.path("slice_check.csv"), text);
  add_artifact(ctx, "slice_check.csv");
  ctx.out << fmt::format("worst relative residual = {:.3e}\nworst mass spread = {:.3e}\n", worst, worst_spread);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"plbif: Lyapunov exponents, equilibrium measures and bifurcation currents of polynomial-like families"};
  app.name(args.empty() ? "plbif" : fs::path(args[0]).filename().string());
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  app.add_option("--threads", opt.threads, "Worker threads (0 = logical cores)")->check(CLI::Range(0, 4096));
  app.fallthrough();

  std::size_t seed_count = 0;
  auto family = [&](CLI::App* sub) {
    sub->add_option("--family,-f", opt.family, "Family file (path or name of a bundled family)")->required();
    sub->add_option("--out,-o", opt.out_dir, "Output directory")->capture_default_str();
  };
  auto param = [&](CLI::App* sub) {
    sub->add_option("--param,-s", opt.param, "Parameter \"re,im\"")->required();
    sub->add_option("--param2", opt.param2, "Second parameter \"re,im\" of a two-parameter family");
  };
  auto grid = [&](CLI::App* sub) {
    sub->add_option("--grid,-g", opt.grid, "re_min,re_max,im_min,im_max,n[,ny] (8 bounds for two parameters)")
        ->required();
  };
  auto depth = [&](CLI::App* sub, int fallback) {
    sub->add_option("--depth,-d", opt.depth, fmt::format("Pullback depth (default {})", fallback))
        ->check(CLI::Range(1, 40));
  };
  auto cloud = [&](CLI::App* sub) {
    sub->add_option("--method", opt.method, "Cloud method: tree, walk or periodic")
        ->check(CLI::IsMember({"tree", "walk", "periodic"}))
        ->capture_default_str();
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) {
      opt.seed = v;
      ++seed_count;
    }, "Seed of the random walk (required with --method walk)");
    sub->add_option("--walkers", opt.walkers, "Walkers for --method walk")
        ->check(CLI::Range(std::size_t{1}, std::size_t{100000000}))
        ->capture_default_str();
    sub->add_option("--cesaro", opt.cesaro, "Cesaro window over depths (1 = off)")->check(CLI::Range(1, 40));
    sub->add_option("--base", opt.base, "Base point \"re,im[;re,im...]\"");
    sub->add_option("--node-budget", opt.node_budget, "Largest pullback tree")->capture_default_str();
    sub->add_flag("--no-guard", opt.no_guard, "Skip the exceptional-set guard on the base point");
  };
  auto caching = [&](CLI::App* sub) {
    sub->add_flag("--no-cache", opt.no_cache, "Do not read or write the field cache");
    sub->add_option("--cache-dir", opt.cache_dir, "Cache root (default $PLBIF_CACHE_DIR or ~/.cache/plbif)");
  };
  auto cocycle = [&](CLI::App* sub) {
    sub->add_option("--n", opt.n, "Cocycle length for p < k")->check(CLI::Range(1, 1000))->capture_default_str();
  };

  auto* lyap = app.add_subcommand("lyapunov", "Partial sums L_p at one parameter");
  family(lyap);
  param(lyap);
  depth(lyap, 12);
  cloud(lyap);
  cocycle(lyap);
  lyap->add_option("--orbit-length", opt.orbit_length, "Also run the orbit estimator (0 = off)")->check(CLI::Range(0, 1000000));
  lyap->add_option("--burn-in", opt.burn_in, "Orbit burn-in steps")->check(CLI::Range(0, 1000000));

  auto* scan_cmd = app.add_subcommand("scan", "L_p over a parameter grid");
  family(scan_cmd);
  grid(scan_cmd);
  depth(scan_cmd, 10);
  cloud(scan_cmd);
  cocycle(scan_cmd);
  caching(scan_cmd);
  scan_cmd->add_option("--p", opt.p, "Which partial sum (0 = k)")->check(CLI::Range(0, 4));

  auto* bif = app.add_subcommand("bifurcation", "Scan of L_k, its dd^c and the support of the bifurcation current");
  family(bif);
  grid(bif);
  depth(bif, 10);
  cloud(bif);
  cocycle(bif);
  caching(bif);
  bif->add_option("--tau", opt.tau, "Support threshold relative to the largest cell")
      ->check(CLI::Range(1e-12, 0.999999))
      ->capture_default_str();

  auto* julia = app.add_subcommand("julia", "Equilibrium cloud at one parameter with a density render");
  family(julia);
  param(julia);
  depth(julia, 10);
  cloud(julia);
  julia->add_option("--resolution", opt.resolution, "Render width and height")->check(CLI::Range(16, 8192));

  auto* periodic = app.add_subcommand("periodic", "Cycles of exact period N and the periodic-point measure");
  family(periodic);
  param(periodic);
  periodic->add_option("--period,-N", opt.period, "Exact period")->check(CLI::Range(1, 16))->capture_default_str();
  periodic->add_option("--measure-depth", opt.measure_depth, "Depth of the periodic measure (0 = off)")
      ->check(CLI::Range(0, 30));

  auto* stab = app.add_subcommand("stability", "Unstable-evidence scan of the Julia sets over a grid");
  family(stab);
  grid(stab);
  depth(stab, 10);
  cloud(stab);
  caching(stab);
  stab->add_option("--hausdorff-factor", opt.hausdorff_factor, "Jump threshold as a multiple of the median")
      ->check(CLI::Range(1.0, 1e6));
  stab->add_option("--track-period", opt.track_period, "Continue the least repelling cycle of this period along the grid")
      ->check(CLI::Range(0, 16));

  auto* slice = app.add_subcommand("slice-check", "Slice bookkeeping of a horizontal current over a grid");
  family(slice);
  grid(slice);
  slice->add_option("--depth,-d", opt.depth, "Pullback depth (default 6)")->check(CLI::Range(1, 40));
  slice->add_option("--depths", opt.depths, "Several depths, e.g. --depths 4 6 8")->check(CLI::Range(1, 40));
  slice->add_option("--base", opt.base, "Base point of the current (default: generic point)");
  slice->add_flag("--archive", opt.archive, "Write one cloud CSV per node");

  auto* self = app.add_subcommand("selftest", "Run the built-in exact examples");

  std::vector<const char*> cargs;
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    err << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitValidation;
  }

  CLI::App* sub = app.get_subcommands().front();
  const bool seed_given = seed_count > 0;
  try {
    set_thread_count(opt.threads);
    if (sub == self) return run_selftest(out) ? kExitOk : kExitNumerical;

    Context ctx(opt, out, err, args);
    ctx.config.command = sub->get_name();
    fs::create_directories(ctx.out_dir);
    const auto t0 = std::chrono::steady_clock::now();
    if (sub == lyap) cmd_lyapunov(ctx, seed_given);
    else if (sub == scan_cmd) cmd_scan(ctx, seed_given);
    else if (sub == bif) cmd_bifurcation(ctx, seed_given);
    else if (sub == julia) cmd_julia(ctx, seed_given);
    else if (sub == periodic) cmd_periodic(ctx);
    else if (sub == stab) cmd_stability(ctx, seed_given);
    else if (sub == slice) cmd_slice_check(ctx);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(ctx, wall);
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInternal;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace plbif::cli
