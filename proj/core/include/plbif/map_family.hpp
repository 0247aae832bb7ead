#pragma once

#include <memory>
#include <string>
#include <vector>

#include "plbif/polynomial.hpp"
#include "plbif/types.hpp"

namespace plbif {

enum class FamilyKind { unicritical, general, product, skew };

std::string to_string(FamilyKind kind);

/// Closed rectangle re in [re_min, re_max], im in [im_min, im_max].
struct ParamBox {
  double re_min = 0.0;
  double re_max = 0.0;
  double im_min = 0.0;
  double im_max = 0.0;

  bool contains(Complex s, double tol = 1e-12) const {
    return s.real() >= re_min - tol && s.real() <= re_max + tol && s.imag() >= im_min - tol &&
           s.imag() <= im_max + tol;
  }
  double max_modulus() const;
};

/// w -> sum_j coeffs[j] * w^j. Coefficients depend on the parameters and,
/// for the second coordinate of a skew product, on the base coordinate z1.
struct CoordinatePoly {
  std::vector<CoeffPoly> coeffs;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }

  /// z^degree + lower[0] + lower[1] z + ... (monic).
  static CoordinatePoly monic(std::vector<CoeffPoly> lower);
  /// z^degree + s_index.
  static CoordinatePoly unicritical(int degree, int param_index = 0);
};

/// One piece of a critical set. `axis < 0` is an isolated point of C^k;
/// `axis >= 0` is the hyperplane {z_axis = point[axis]} (product families).
struct CriticalComponent {
  int axis = -1;
  Point point;
  int multiplicity = 1;

  double distance(const Point& z) const;
};

struct CriticalSet {
  std::vector<CriticalComponent> components;

  double distance(const Point& z) const;
  std::size_t total_multiplicity() const;
};

struct FilledJuliaResult {
  bool inside = true;
  /// First n with max-norm of f^n(z) above R; -1 when the orbit stays.
  int escape_time = -1;
};

struct EscapeCertificate {
  bool ok = true;
  /// min over samples of |f_s(z)|_max / R; must exceed 1.
  double worst_ratio = 0.0;
  Param worst_param;
  Point worst_point;
  std::size_t samples = 0;
};

/// The family frozen at one parameter: f_s with numeric coefficients.
/// Immutable and cheap to share across threads.
class MapInstance {
 public:
  FamilyKind kind() const { return kind_; }
  int dim() const { return dim_; }
  /// Topological degree d_t.
  int degree() const { return degree_; }
  int coordinate_degree(int i) const { return coord_degree_[static_cast<std::size_t>(i)]; }
  double escape_radius() const { return radius_; }
  const Param& parameter() const { return param_; }

  Point eval(const Point& z) const;
  CMatrix jacobian(const Point& z) const;
  Complex jacobian_det(const Point& z) const;

  /// Coefficients of the coordinate polynomial in w (ascending) for every
  /// coordinate except the fiber coordinate of a skew product.
  std::span<const Complex> coefficients(int coord) const {
    return simple_[static_cast<std::size_t>(coord)];
  }
  /// Skew second coordinate: coefficients in z2 at a given z1.
  std::vector<Complex> fiber_coefficients(Complex z1) const;
  bool is_skew_fiber(int coord) const { return kind_ == FamilyKind::skew && coord == 1; }

  bool in_V(const Point& z) const { return z.max_norm() <= radius_; }
  FilledJuliaResult in_filled_julia(const Point& z, int n_max) const;
  CriticalSet critical_points() const;

  /// Derivative of coordinate `coord` with respect to its own variable
  /// (1-D, product, skew base).
  Complex coordinate_derivative(int coord, Complex w) const;

 private:
  friend class MapFamily;
  FamilyKind kind_ = FamilyKind::unicritical;
  int dim_ = 1;
  int degree_ = 2;
  std::vector<int> coord_degree_;
  double radius_ = 2.0;
  Param param_;
  // Per non-skew coordinate: value and derivative coefficients in w.
  std::vector<std::vector<Complex>> simple_;
  std::vector<std::vector<Complex>> simple_deriv_;
  // Skew fiber coordinate: skew_[j] = coefficient of z2^j as a polynomial in z1.
  std::vector<std::vector<Complex>> skew_;
  std::vector<std::vector<Complex>> skew_dz1_;
};

/// Every coordinate min(2, R/2) e^{0.7i}: off the real axis and inside V.
Point generic_point(int dim, double radius);

/// A holomorphic family (f_s) of polynomial-like maps on the polydisc V of
/// radius R, parameterized over a product of rectangles in C^m.
class MapFamily {
 public:
  /// f_s(z) = z^d + s on one complex parameter. R <= 0 selects the closed-form
  /// radius max(2, 2(1 + max|s|)).
  static MapFamily unicritical(int degree, ParamBox domain, double escape_radius = 0.0);
  /// Monic z^d + sum_{j<d} a_j(s) z^j.
  static MapFamily general(std::vector<CoeffPoly> lower_coeffs, int param_dim, std::vector<ParamBox> domain,
                           double escape_radius = 0.0);
  /// (f_1(z_1), ..., f_k(z_k)), each component monic in its own variable.
  static MapFamily product(std::vector<CoordinatePoly> components, int param_dim, std::vector<ParamBox> domain,
                           double escape_radius = 0.0);
  /// (p_s(z1), q_s(z1, z2)). R <= 0 doubles from 2 until the boundary net certifies.
  static MapFamily skew(CoordinatePoly base, CoordinatePoly fiber, int param_dim, std::vector<ParamBox> domain,
                        double escape_radius = 0.0);

  FamilyKind kind() const { return kind_; }
  int fiber_dim() const { return static_cast<int>(coords_.size()); }
  int param_dim() const { return param_dim_; }
  int degree() const;
  double escape_radius() const { return radius_; }
  const std::vector<ParamBox>& domain() const { return domain_; }
  const std::vector<CoordinatePoly>& coordinates() const { return coords_; }

  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  bool contains(const Param& s) const;
  /// Throws DomainError when s is outside the declared parameter domain.
  MapInstance at(const Param& s) const;

  Point eval(const Param& s, const Point& z) const { return at(s).eval(z); }
  CMatrix jacobian(const Param& s, const Point& z) const { return at(s).jacobian(z); }
  CriticalSet critical_points(const Param& s) const { return at(s).critical_points(); }
  FilledJuliaResult in_filled_julia(const Param& s, const Point& z, int n_max) const {
    return at(s).in_filled_julia(z, n_max);
  }

  /// Checks |f_s(z)|_max > R on a boundary net of the polydisc for sampled s.
  EscapeCertificate certify_escape_radius(int points_per_face = 256, int param_samples_per_axis = 9) const;

  /// A base point that does not depend on s: every coordinate min(2, R/2)e^{0.7i}.
  Point generic_base_point() const;

  /// Parameter samples (corners and interior lattice) of the domain.
  std::vector<Param> domain_samples(int per_axis) const;

 private:
  MapFamily() = default;
  void validate() const;
  double default_radius() const;

  FamilyKind kind_ = FamilyKind::unicritical;
  int param_dim_ = 1;
  std::vector<ParamBox> domain_;
  std::vector<CoordinatePoly> coords_;
  double radius_ = 2.0;
  std::string name_;
};

}  // namespace plbif
