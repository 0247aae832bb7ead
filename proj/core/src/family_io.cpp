#include "plbif/family_io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace plbif {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class KeyValues {
 public:
  explicit KeyValues(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ValidationError(fmt::format("family file line {}: expected key = value", line_no));
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw ValidationError(fmt::format("family file line {}: empty key", line_no));
      if (!values_.emplace(key, value).second)
        throw ValidationError(fmt::format("family file line {}: duplicate key '{}'", line_no, key));
    }
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string& get(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ValidationError("family file: missing key '" + key + "'");
    used_.insert(key);
    return it->second;
  }

  std::string get_or(const std::string& key, const std::string& fallback) {
    return has(key) ? get(key) : fallback;
  }

  int get_int(const std::string& key) {
    const std::string& v = get(key);
    try {
      std::size_t used = 0;
      const int x = std::stoi(v, &used);
      if (used == v.size()) return x;
    } catch (const std::exception&) {
    }
    throw ValidationError("family file: '" + key + "' must be an integer, got '" + v + "'");
  }

  double get_double(const std::string& key) {
    const std::string& v = get(key);
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used == v.size()) return x;
    } catch (const std::exception&) {
    }
    throw ValidationError("family file: '" + key + "' must be a number, got '" + v + "'");
  }

  void check_all_used() const {
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) throw ValidationError("family file: unknown key '" + k + "'");
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

ParamBox parse_box(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      v.push_back(std::stod(trim(cell)));
    } catch (const std::exception&) {
      throw ValidationError("family file: bad domain value '" + cell + "'");
    }
  }
  if (v.size() != 4) throw ValidationError("family file: domain needs re_min, re_max, im_min, im_max");
  return {v[0], v[1], v[2], v[3]};
}

CoordinatePoly parse_coordinate(KeyValues& kv, const std::string& prefix, bool leading_optional) {
  const int degree = kv.get_int(prefix + "degree");
  if (degree < 1) throw ValidationError("family file: " + prefix + "degree must be >= 1");
  CoordinatePoly poly;
  for (int j = 0; j < degree; ++j) {
    const std::string key = fmt::format("{}a{}", prefix, j);
    poly.coeffs.push_back(kv.has(key) ? CoeffPoly::parse(kv.get(key)) : CoeffPoly::constant(0.0));
  }
  const std::string lead = fmt::format("{}a{}", prefix, degree);
  if (leading_optional && kv.has(lead)) poly.coeffs.push_back(CoeffPoly::parse(kv.get(lead)));
  else poly.coeffs.push_back(CoeffPoly::constant(1.0));
  return poly;
}

std::string format_box(const ParamBox& b) {
  return fmt::format("{:.17g}, {:.17g}, {:.17g}, {:.17g}", b.re_min, b.re_max, b.im_min, b.im_max);
}

void write_coordinate(std::ostream& out, const CoordinatePoly& poly, const std::string& prefix, bool write_leading) {
  out << prefix << "degree = " << poly.degree() << '\n';
  for (int j = 0; j < poly.degree(); ++j)
    if (!poly.coeffs[static_cast<std::size_t>(j)].is_zero())
      out << prefix << 'a' << j << " = " << poly.coeffs[static_cast<std::size_t>(j)].to_string() << '\n';
  if (write_leading) out << prefix << 'a' << poly.degree() << " = " << poly.coeffs.back().to_string() << '\n';
}

}  // namespace

MapFamily parse_family(const std::string& text) {
  KeyValues kv(text);
  const std::string kind = kv.get("kind");
  const int params = kv.has("params") ? kv.get_int("params") : 1;
  if (params < 1 || params > 2) throw ValidationError("family file: params must be 1 or 2");
  std::vector<ParamBox> domain{parse_box(kv.get("domain"))};
  if (params == 2) domain.push_back(parse_box(kv.get("domain2")));
  double radius = 0.0;
  if (kv.has("escape_radius") && kv.get_or("escape_radius", "auto") != "auto") {
    radius = kv.get_double("escape_radius");
    if (!(radius > 0.0)) throw ValidationError("family file: escape_radius must be positive");
  }
  const std::string name = kv.get_or("name", "");

  MapFamily family = [&]() {
    if (kind == "unicritical") {
      if (params != 1) throw ValidationError("family file: unicritical families have one parameter");
      return MapFamily::unicritical(kv.get_int("degree"), domain[0], radius);
    }
    if (kind == "general") {
      auto poly = parse_coordinate(kv, "", false);
      poly.coeffs.pop_back();
      return MapFamily::general(std::move(poly.coeffs), params, domain, radius);
    }
    if (kind == "product") {
      const int count = kv.get_int("components");
      if (count < 1 || count > static_cast<int>(kMaxFiberDim))
        throw ValidationError("family file: components must be 1..4");
      std::vector<CoordinatePoly> comps;
      for (int c = 1; c <= count; ++c) comps.push_back(parse_coordinate(kv, fmt::format("f{}.", c), false));
      return MapFamily::product(std::move(comps), params, domain, radius);
    }
    if (kind == "skew") {
      auto base = parse_coordinate(kv, "p.", false);
      auto fiber = parse_coordinate(kv, "q.", true);
      return MapFamily::skew(std::move(base), std::move(fiber), params, domain, radius);
    }
    throw ValidationError("family file: unknown kind '" + kind + "' (unicritical, general, product, skew)");
  }();
  kv.check_all_used();
  family.set_name(name);
  return family;
}

MapFamily load_family(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read family file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_family(ss.str());
}

std::string family_to_text(const MapFamily& family) {
  std::ostringstream out;
  if (!family.name().empty()) out << "name = " << family.name() << '\n';
  out << "kind = " << to_string(family.kind()) << '\n';
  out << "params = " << family.param_dim() << '\n';
  out << "domain = " << format_box(family.domain()[0]) << '\n';
  if (family.param_dim() == 2) out << "domain2 = " << format_box(family.domain()[1]) << '\n';
  out << fmt::format("escape_radius = {:.17g}\n", family.escape_radius());
  const auto& coords = family.coordinates();
  switch (family.kind()) {
    case FamilyKind::unicritical:
      out << "degree = " << family.degree() << '\n';
      break;
    case FamilyKind::general:
      write_coordinate(out, coords[0], "", false);
      break;
    case FamilyKind::product:
      out << "components = " << coords.size() << '\n';
      for (std::size_t c = 0; c < coords.size(); ++c) write_coordinate(out, coords[c], fmt::format("f{}.", c + 1), false);
      break;
    case FamilyKind::skew:
      write_coordinate(out, coords[0], "p.", false);
      write_coordinate(out, coords[1], "q.", true);
      break;
  }
  return out.str();
}

}  // namespace plbif
