#include "plbif/atom_cloud.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "plbif/parallel.hpp"

namespace plbif {

AtomCloud AtomCloud::uniform(int dim, std::vector<Point> points) {
  const double w = points.empty() ? 0.0 : 1.0 / static_cast<double>(points.size());
  std::vector<double> weights(points.size(), w);
  return AtomCloud(dim, std::move(points), std::move(weights));
}

double AtomCloud::total_weight() const { return pairwise_sum(weights_.data(), weights_.size()); }

double AtomCloud::max_norm() const {
  double m = 0.0;
  for (const auto& p : points_) m = std::max(m, p.max_norm());
  return m;
}

void AtomCloud::validate(double radius, double tol) const {
  if (points_.size() != weights_.size()) throw ValidationError("atom cloud: point and weight counts differ");
  if (points_.empty()) throw ValidationError("atom cloud is empty");
  for (double w : weights_)
    if (!(w > 0.0)) throw ValidationError("atom cloud has a non-positive weight");
  const double total = total_weight();
  if (std::abs(total - 1.0) > tol)
    throw ValidationError(fmt::format("atom cloud weights sum to {:.17g}, not 1", total));
  if (radius > 0.0)
    for (const auto& p : points_)
      if (p.max_norm() > radius * (1.0 + 1e-12))
        throw ValidationError(fmt::format("atom {} lies outside the polydisc of radius {}", format_point(p.span()), radius));
}

std::string format_complex(Complex z) { return fmt::format("{:.17g},{:.17g}", z.real(), z.imag()); }

std::string format_point(std::span<const Complex> z) {
  std::string out;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (i) out += ';';
    out += format_complex(z[i]);
  }
  return out;
}

void AtomCloud::write_csv(std::ostream& out) const {
  std::string line;
  for (int i = 1; i <= dim_; ++i) line += fmt::format("re_{0},im_{0},", i);
  line += "weight\n";
  out << line;
  fmt::memory_buffer buf;
  for (std::size_t a = 0; a < points_.size(); ++a) {
    buf.clear();
    for (int i = 0; i < dim_; ++i)
      fmt::format_to(std::back_inserter(buf), "{:.17g},{:.17g},", points_[a][i].real(), points_[a][i].imag());
    fmt::format_to(std::back_inserter(buf), "{:.17g}\n", weights_[a]);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

void AtomCloud::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  write_csv(out);
}

AtomCloud AtomCloud::read_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ValidationError("atom cloud CSV: missing header");
  int columns = 1;
  for (char c : header) columns += c == ',';
  if (columns < 3 || columns % 2 == 0 || header.rfind("re_1,im_1,", 0) != 0)
    throw ValidationError("atom cloud CSV: bad header '" + header + "'");
  const int dim = (columns - 1) / 2;
  if (dim > static_cast<int>(kMaxFiberDim)) throw ValidationError("atom cloud CSV: too many coordinates");
  AtomCloud cloud(dim);
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        v.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ValidationError(fmt::format("atom cloud CSV: bad number '{}' on line {}", cell, line_no));
      }
    }
    if (static_cast<int>(v.size()) != columns)
      throw ValidationError(fmt::format("atom cloud CSV: line {} has {} columns, expected {}", line_no, v.size(), columns));
    Point p(dim);
    for (int i = 0; i < dim; ++i) p[i] = Complex(v[static_cast<std::size_t>(2 * i)], v[static_cast<std::size_t>(2 * i + 1)]);
    cloud.add(p, v.back());
  }
  return cloud;
}

AtomCloud AtomCloud::read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path);
  return read_csv(in);
}

void AtomCloud::write_sidecar(std::ostream& out) const {
  out << "dim=" << dim_ << '\n';
  out << "atoms=" << points_.size() << '\n';
  out << "depth=" << meta_.depth << '\n';
  out << "method=" << meta_.method << '\n';
  out << "base=" << format_point(meta_.base.span()) << '\n';
  out << "seed=" << meta_.seed << '\n';
  out << "parameter=" << format_point(meta_.parameter.span()) << '\n';
  for (const auto& [k, v] : meta_.extra) out << k << '=' << v << '\n';
}

void AtomCloud::write_sidecar(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  write_sidecar(out);
}

}  // namespace plbif
