#include "selftest.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cache.hpp"
#include "plbif/bifurcation.hpp"
#include "plbif/equilibrium.hpp"
#include "plbif/family_io.hpp"
#include "plbif/lyapunov.hpp"
#include "plbif/preimage.hpp"
#include "plbif/stability.hpp"

namespace fs = std::filesystem;

namespace plbif::cli {

namespace {

struct Check {
  std::string name;
  std::function<std::string()> body;  // empty string on success
};

MapFamily quadratic() { return MapFamily::unicritical(2, {-4, 4, -4, 4}); }

std::string exponent_at_zero() {
  const MapInstance f = quadratic().at(Param{0.0});
  const AtomCloud cloud = equilibrium_cloud(f, 12);
  const double l1 = estimate_exponents(f, cloud).L[0];
  return std::abs(l1 - std::log(2.0)) <= 1e-6 ? "" : fmt::format("L_1 = {:.9f}", l1);
}

std::string tree_shape() {
  const MapInstance f = quadratic().at(Param{0.0});
  const AtomCloud tree = pullback_tree(f, Point{2.0}, 3);
  if (tree.size() != 8 || tree_size(2, 10) != 1024) return fmt::format("tree has {} atoms", tree.size());
  for (double w : tree.weights())
    if (std::abs(w - 0.125) > 1e-15) return "weights are not 1/8";
  return "";
}

std::string roots_of_unity() {
  const MapInstance f = quadratic().at(Param{0.0});
  const PeriodicOrbit base = make_orbit(f, 1.0, 1);
  const AtomCloud mu = periodic_measure(f, base, 5);
  if (mu.size() != 32) return fmt::format("{} atoms", mu.size());
  double worst = 0.0;
  for (const auto& z : mu.points()) {
    const double k = std::round(std::arg(z[0]) / (2 * kPi / 32));
    worst = std::max(worst, std::abs(z[0] - std::polar(1.0, k * 2 * kPi / 32)));
  }
  return worst <= 1e-9 ? "" : fmt::format("distance to the 32nd roots {:.2e}", worst);
}

std::string unit_atom() {
  const double h = 0.02;
  const GridSpec grid = GridSpec::plane(-50.5 * h, 49.5 * h, -50.5 * h, 49.5 * h, 101, 101);
  const ScalarField field = ScalarField::sample(grid, [](const Param& s) { return std::log(std::abs(s[0])); });
  const CurrentField current = ddc(field);
  if (std::abs(current.net_mass() - 1.0) > 1e-2) return fmt::format("signed mass {:.6f}", current.net_mass());
  const ScalarField flat = ScalarField::sample(grid, [](const Param& s) { return s[0].real(); });
  const double harmonic = ddc(flat).total_mass;
  return harmonic <= 1e-10 ? "" : fmt::format("mass of Re s is {:.3e}", harmonic);
}

std::string degree_bound() {
  const MapInstance f = quadratic().at(Param{Complex(-1.0, 0.0)});
  const AtomCloud cloud = equilibrium_cloud(f, 10);
  const ExponentEstimate est = estimate_exponents(f, cloud);
  return est.satisfies_degree_bound(2) ? "" : fmt::format("L_1 = {:.6f}", est.L[0]);
}

std::string family_round_trip() {
  const MapFamily f = parse_family("kind = general\nparams = 1\ndegree = 3\na1 = s\ndomain = -1, 1, -1, 1\n");
  const std::string text = family_to_text(f);
  return family_to_text(parse_family(text)) == text ? "" : "text differs after a round trip";
}

std::string cache_round_trip() {
  const fs::path root = fs::temp_directory_path() / fmt::format("plbif-selftest-{}", std::chrono::steady_clock::now().time_since_epoch().count());
  const fs::path out = root / "out";
  fs::create_directories(out);
  { std::ofstream(out / "a.csv") << "x\n1\n"; }
  FieldCache cache(root / "cache");
  std::ostringstream warn;
  std::string problem;
  if (cache.restore("k1", {"a.csv"}, out, warn) != CacheStatus::miss) problem = "empty cache did not miss";
  cache.store("k1", {"a.csv"}, out);
  fs::remove(out / "a.csv");
  if (problem.empty() && cache.restore("k1", {"a.csv"}, out, warn) != CacheStatus::hit) problem = "stored entry did not hit";
  if (problem.empty() && cache.restore("k2", {"a.csv"}, out, warn) != CacheStatus::miss) problem = "other key did not miss";
  std::error_code ec;
  fs::remove_all(root, ec);
  return problem;
}

}  // namespace

bool run_selftest(std::ostream& out) {
  const std::vector<Check> checks{
      {"quadratic c=0: L_1 = log 2", exponent_at_zero},
      {"pullback tree of z^2: 2^n atoms of weight 2^-n", tree_shape},
      {"periodic measure of z^2: 32nd roots of unity", roots_of_unity},
      {"dd^c: signed mass of log|s| is 1, Re s has none", unit_atom},
      {"c=-1: L_1 >= log(2)/2", degree_bound},
      {"family text round trip", family_round_trip},
      {"cache miss, hit, miss on new key", cache_round_trip},
  };
  bool all = true;
  for (const auto& check : checks) {
    std::string problem;
    try {
      problem = check.body();
    } catch (const std::exception& e) {
      problem = e.what();
    }
    all = all && problem.empty();
    out << (problem.empty() ? "ok    " : "FAIL  ") << check.name << (problem.empty() ? "" : ": " + problem) << '\n';
  }
  out << (all ? "selftest passed\n" : "selftest FAILED\n");
  return all;
}

}  // namespace plbif::cli
