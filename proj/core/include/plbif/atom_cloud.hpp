#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "plbif/types.hpp"

namespace plbif {

struct CloudMetadata {
  int depth = 0;
  /// tree, walk, cesaro, periodic, periodic_measure or slice.
  std::string method = "tree";
  Point base;
  std::uint64_t seed = 0;
  Param parameter;
  std::map<std::string, std::string> extra;
};

/// A finitely supported probability measure on C^k: weighted point masses.
class AtomCloud {
 public:
  AtomCloud() = default;
  explicit AtomCloud(int dim) : dim_(dim) {}
  AtomCloud(int dim, std::vector<Point> points, std::vector<double> weights)
      : dim_(dim), points_(std::move(points)), weights_(std::move(weights)) {}

  /// All atoms with weight 1/n.
  static AtomCloud uniform(int dim, std::vector<Point> points);

  int dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  const std::vector<Point>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  const Point& point(std::size_t i) const { return points_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

  void add(const Point& z, double w) {
    points_.push_back(z);
    weights_.push_back(w);
  }
  void reserve(std::size_t n) {
    points_.reserve(n);
    weights_.reserve(n);
  }

  double total_weight() const;
  double max_norm() const;

  CloudMetadata& metadata() { return meta_; }
  const CloudMetadata& metadata() const { return meta_; }

  /// Throws ValidationError unless weights are positive and sum to 1 within
  /// `tol` and, when radius > 0, every atom lies in the polydisc of that radius.
  void validate(double radius = 0.0, double tol = 1e-12) const;

  /// CSV with header re_1,im_1,...,re_k,im_k,weight.
  void write_csv(std::ostream& out) const;
  void write_csv(const std::string& path) const;
  static AtomCloud read_csv(std::istream& in);
  static AtomCloud read_csv(const std::string& path);

  /// key=value metadata sidecar.
  void write_sidecar(std::ostream& out) const;
  void write_sidecar(const std::string& path) const;

 private:
  int dim_ = 1;
  std::vector<Point> points_;
  std::vector<double> weights_;
  CloudMetadata meta_;
};

/// Formats a complex number as "re,im" with round-trip precision.
std::string format_complex(Complex z);
/// Points as "re,im;re,im".
std::string format_point(std::span<const Complex> z);

}  // namespace plbif
