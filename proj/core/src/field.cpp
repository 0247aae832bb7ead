#include "plbif/field.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "plbif/parallel.hpp"

namespace plbif {

GridSpec GridSpec::plane(double re_min, double re_max, double im_min, double im_max, int nx, int ny) {
  if (nx < 1 || ny < 1) throw ValidationError("grid counts must be >= 1");
  if (re_min > re_max || im_min > im_max) throw ValidationError("grid bounds have min > max");
  GridSpec g;
  g.axes = {{re_min, re_max, nx}, {im_min, im_max, ny}};
  return g;
}

GridSpec GridSpec::parse(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ValidationError("grid: bad number '" + cell + "' in '" + text + "'");
    }
  }
  auto as_count = [&](double x) {
    if (x < 1 || x != std::floor(x) || x > 1e6) throw ValidationError("grid: node count must be a positive integer");
    return static_cast<int>(x);
  };
  GridSpec g;
  if (v.size() == 5 || v.size() == 6) {
    const int nx = as_count(v[4]);
    const int ny = v.size() == 6 ? as_count(v[5]) : nx;
    return plane(v[0], v[1], v[2], v[3], nx, ny);
  }
  if (v.size() == 9) {
    const int n = as_count(v[8]);
    for (int a = 0; a < 4; ++a) {
      if (v[static_cast<std::size_t>(2 * a)] > v[static_cast<std::size_t>(2 * a + 1)])
        throw ValidationError("grid bounds have min > max");
      g.axes.push_back({v[static_cast<std::size_t>(2 * a)], v[static_cast<std::size_t>(2 * a + 1)], n});
    }
    return g;
  }
  throw ValidationError("grid: expected re_min,re_max,im_min,im_max,n[,ny] (or 8 bounds and n for two parameters)");
}

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= static_cast<std::size_t>(a.count);
  return n;
}

double GridSpec::cell_measure() const {
  double m = 1.0;
  for (const auto& a : axes)
    if (a.count > 1) m *= a.spacing();
  return m;
}

std::vector<int> GridSpec::unravel(std::size_t index) const {
  std::vector<int> idx(axes.size());
  for (std::size_t a = 0; a < axes.size(); ++a) {
    idx[a] = static_cast<int>(index % static_cast<std::size_t>(axes[a].count));
    index /= static_cast<std::size_t>(axes[a].count);
  }
  return idx;
}

std::size_t GridSpec::ravel(std::span<const int> idx) const {
  std::size_t index = 0;
  for (std::size_t a = axes.size(); a-- > 0;) index = index * static_cast<std::size_t>(axes[a].count) + static_cast<std::size_t>(idx[a]);
  return index;
}

Param GridSpec::param(std::size_t index) const {
  const auto idx = unravel(index);
  Param s(m());
  for (int j = 0; j < m(); ++j)
    s[j] = Complex(axes[static_cast<std::size_t>(2 * j)].at(idx[static_cast<std::size_t>(2 * j)]),
                   axes[static_cast<std::size_t>(2 * j + 1)].at(idx[static_cast<std::size_t>(2 * j + 1)]));
  return s;
}

std::string GridSpec::describe() const {
  std::string out;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    if (a) out += ';';
    out += fmt::format("{:.17g},{:.17g},{}", axes[a].min, axes[a].max, axes[a].count);
  }
  return out;
}

std::string to_string(NodeStatus status) {
  switch (status) {
    case NodeStatus::ok: return "ok";
    case NodeStatus::escaped: return "escaped";
    case NodeStatus::failed: return "failed";
  }
  return "failed";
}

NodeStatus parse_node_status(const std::string& text) {
  if (text == "ok") return NodeStatus::ok;
  if (text == "escaped") return NodeStatus::escaped;
  if (text == "failed") return NodeStatus::failed;
  throw ValidationError("unknown node status '" + text + "'");
}

ScalarField ScalarField::sample(const GridSpec& grid, const std::function<double(const Param&)>& fn) {
  ScalarField f;
  f.grid = grid;
  f.values.resize(grid.size());
  f.status.assign(grid.size(), NodeStatus::ok);
  for (std::size_t i = 0; i < grid.size(); ++i) f.values[i] = fn(grid.param(i));
  return f;
}

std::size_t ScalarField::failed_count() const {
  return static_cast<std::size_t>(std::count_if(status.begin(), status.end(), [](NodeStatus s) { return s != NodeStatus::ok; }));
}

double ScalarField::min_ok() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i)
    if (ok(i)) m = std::min(m, values[i]);
  return m;
}

double ScalarField::max_ok() const {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i)
    if (ok(i)) m = std::max(m, values[i]);
  return m;
}

void ScalarField::write_csv(std::ostream& out) const {
  std::string header = grid.m() == 2 ? "s_re,s_im,s2_re,s2_im," : "s_re,s_im,";
  header += "value,status";
  for (const auto& [name, column] : extra_columns) header += "," + name;
  out << header << '\n';
  fmt::memory_buffer buf;
  for (std::size_t i = 0; i < values.size(); ++i) {
    buf.clear();
    const Param s = grid.param(i);
    for (int j = 0; j < s.dim(); ++j) fmt::format_to(std::back_inserter(buf), "{:.17g},{:.17g},", s[j].real(), s[j].imag());
    if (ok(i)) fmt::format_to(std::back_inserter(buf), "{:.17g},", values[i]);
    else fmt::format_to(std::back_inserter(buf), "nan,");
    fmt::format_to(std::back_inserter(buf), "{}", to_string(status[i]));
    for (const auto& [name, column] : extra_columns) fmt::format_to(std::back_inserter(buf), ",{:.17g}", column[i]);
    buf.push_back('\n');
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

void ScalarField::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  write_csv(out);
}

double CurrentField::max_mass() const {
  double m = 0.0;
  for (std::size_t c = 0; c < mass.size(); ++c)
    if (!flagged[c]) m = std::max(m, mass[c]);
  return m;
}

double CurrentField::net_mass() const {
  std::vector<double> kept(raw.size(), 0.0);
  for (std::size_t c = 0; c < raw.size(); ++c)
    if (!flagged[c]) kept[c] = raw[c];
  return pairwise_sum(kept.data(), kept.size());
}

void CurrentField::write_csv(std::ostream& out) const {
  out << (grid.m() == 2 ? "cell_center_re,cell_center_im,cell_center2_re,cell_center2_im,mass\n"
                        : "cell_center_re,cell_center_im,mass\n");
  fmt::memory_buffer buf;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    buf.clear();
    const Param s = grid.param(cells[c]);
    for (int j = 0; j < s.dim(); ++j) fmt::format_to(std::back_inserter(buf), "{:.17g},{:.17g},", s[j].real(), s[j].imag());
    if (flagged[c]) fmt::format_to(std::back_inserter(buf), "nan\n");
    else fmt::format_to(std::back_inserter(buf), "{:.17g}\n", mass[c]);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

void CurrentField::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  write_csv(out);
}

void write_pgm(const std::string& path, int width, int height, std::span<const double> row_major) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : row_major)
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!(lo <= hi)) lo = hi = 0.0;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << "P5\n" << width << ' ' << height << "\n65535\n";
  for (double v : row_major) {
    unsigned gray = 0;
    if (std::isfinite(v) && hi > lo) gray = static_cast<unsigned>(std::lround((v - lo) / (hi - lo) * 65535.0));
    const unsigned char bytes[2] = {static_cast<unsigned char>(gray >> 8), static_cast<unsigned char>(gray & 0xff)};
    out.write(reinterpret_cast<const char*>(bytes), 2);
  }
  std::ofstream meta(path + ".meta", std::ios::binary);
  meta << fmt::format("width={}\nheight={}\nmaxval=65535\nmin={:.17g}\nmax={:.17g}\nmapping=linear\n", width, height, lo, hi);
}

void write_pgm(const std::string& path, const ScalarField& field) {
  if (field.grid.m() != 1) throw ValidationError("PGM renders need a one-parameter field");
  const int nx = field.grid.count(0), ny = field.grid.count(1);
  std::vector<double> img(static_cast<std::size_t>(nx) * ny, std::nan(""));
  for (int r = 0; r < ny; ++r)
    for (int c = 0; c < nx; ++c) {
      const std::size_t node = static_cast<std::size_t>(ny - 1 - r) * nx + c;
      if (field.ok(node)) img[static_cast<std::size_t>(r) * nx + c] = field.values[node];
    }
  write_pgm(path, nx, ny, img);
}

void write_pgm(const std::string& path, const CurrentField& current) {
  if (current.grid.m() != 1) throw ValidationError("PGM renders need a one-parameter field");
  const int nx = current.grid.count(0), ny = current.grid.count(1);
  const int w = nx - 2, h = ny - 2;
  if (w < 1 || h < 1) throw ValidationError("current field has no interior cells");
  std::vector<double> img(static_cast<std::size_t>(w) * h, std::nan(""));
  for (std::size_t c = 0; c < current.cells.size(); ++c) {
    if (current.flagged[c]) continue;
    const auto idx = current.grid.unravel(current.cells[c]);
    const int col = idx[0] - 1, row = h - idx[1];
    img[static_cast<std::size_t>(row) * w + col] = current.mass[c];
  }
  write_pgm(path, w, h, img);
}

}  // namespace plbif
