#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "plbif/types.hpp"

namespace plbif {

struct GridAxis {
  double min = 0.0;
  double max = 0.0;
  int count = 1;

  double spacing() const { return count > 1 ? (max - min) / (count - 1) : 0.0; }
  double at(int i) const { return count > 1 ? min + (max - min) * i / (count - 1) : min; }
};

/// Uniform lattice over the real coordinates (Re s1, Im s1[, Re s2, Im s2]).
/// Node index runs with axis 0 fastest.
struct GridSpec {
  std::vector<GridAxis> axes;

  static GridSpec plane(double re_min, double re_max, double im_min, double im_max, int nx, int ny);
  /// "re_min,re_max,im_min,im_max,n" or "...,nx,ny".
  static GridSpec parse(const std::string& text);

  int m() const { return static_cast<int>(axes.size()) / 2; }
  std::size_t size() const;
  int count(int axis) const { return axes[static_cast<std::size_t>(axis)].count; }
  double spacing(int axis) const { return axes[static_cast<std::size_t>(axis)].spacing(); }
  /// Product of the spacings of non-degenerate axes.
  double cell_measure() const;

  std::vector<int> unravel(std::size_t index) const;
  std::size_t ravel(std::span<const int> idx) const;
  Param param(std::size_t index) const;
  std::string describe() const;
};

enum class NodeStatus { ok, escaped, failed };
std::string to_string(NodeStatus status);
NodeStatus parse_node_status(const std::string& text);

struct ScalarField {
  GridSpec grid;
  std::vector<double> values;
  std::vector<NodeStatus> status;
  std::string quantity = "value";
  /// Additional per-node columns written after `status`.
  std::vector<std::pair<std::string, std::vector<double>>> extra_columns;

  static ScalarField sample(const GridSpec& grid, const std::function<double(const Param&)>& fn);

  std::size_t size() const { return values.size(); }
  bool ok(std::size_t i) const { return status[i] == NodeStatus::ok; }
  std::size_t failed_count() const;
  double min_ok() const;
  double max_ok() const;

  /// Columns s_re,s_im[,s2_re,s2_im],value,status[,extra...].
  void write_csv(std::ostream& out) const;
  void write_csv(const std::string& path) const;
};

/// Nonnegative masses on interior cells of a parameter lattice.
struct CurrentField {
  GridSpec grid;
  /// Node index of each interior cell center.
  std::vector<std::size_t> cells;
  /// Signed masses before clipping.
  std::vector<double> raw;
  std::vector<double> mass;
  /// Cells whose stencil touched a failed node; excluded from totals.
  std::vector<char> flagged;
  double clipped_residual = 0.0;
  double normalization = 0.0;
  double total_mass = 0.0;
  bool reliable = true;
  bool experimental = false;

  double max_mass() const;
  /// Signed sum of the unclipped masses over unflagged cells.
  double net_mass() const;
  /// Columns cell_center_re,cell_center_im[,cell_center2_re,cell_center2_im],mass.
  void write_csv(std::ostream& out) const;
  void write_csv(const std::string& path) const;
};

/// 16-bit binary PGM, linear value -> gray, NaN -> 0. A key=value sidecar
/// next to it records the mapping range.
void write_pgm(const std::string& path, int width, int height, std::span<const double> row_major);
void write_pgm(const std::string& path, const ScalarField& field);
void write_pgm(const std::string& path, const CurrentField& current);

}  // namespace plbif
