#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "plbif/types.hpp"

namespace plbif {

/// coeff * s1^s1_exp * s2^s2_exp * z1^z1_exp
struct Monomial {
  Complex coeff{1.0, 0.0};
  int s1_exp = 0;
  int s2_exp = 0;
  int z1_exp = 0;
};

/// A polynomial in the parameters (s1, s2) and, for the second coordinate of
/// a skew product, in the base coordinate z1. These are the coefficient
/// functions of the one-variable polynomials that make up a family.
///
/// Text form: comma-separated monomials that are summed, each a '*'-joined
/// product of factors drawn from {decimal number, i, s, s1, s2, z, z1}, with
/// optional '^k' on variables and an optional leading sign. Examples:
///   "s"   "0"   "-3"   "2*i*s^2, -0.5*s2"   "z1^2, s"
class CoeffPoly {
 public:
  CoeffPoly() = default;
  explicit CoeffPoly(std::vector<Monomial> terms) : terms_(std::move(terms)) {}

  static CoeffPoly constant(Complex c) { return CoeffPoly({Monomial{c, 0, 0, 0}}); }
  static CoeffPoly parameter(int index) {
    return CoeffPoly({Monomial{1.0, index == 0 ? 1 : 0, index == 1 ? 1 : 0, 0}});
  }
  static CoeffPoly parse(std::string_view text);

  const std::vector<Monomial>& terms() const { return terms_; }
  bool is_zero() const;
  bool uses_z1() const;
  int max_z1_exp() const;
  int max_param_index() const;  // -1 when constant in s

  Complex eval(const Param& s, Complex z1 = 0.0) const;

  /// Collapses the s-dependence: coefficient vector in powers of z1.
  std::vector<Complex> specialize(const Param& s) const;

  CoeffPoly derivative_z1() const;

  std::string to_string() const;

 private:
  std::vector<Monomial> terms_;
};

/// Horner evaluation of sum_j c[j] w^j.
inline Complex horner(std::span<const Complex> c, Complex w) {
  Complex acc = 0.0;
  for (std::size_t j = c.size(); j-- > 0;) acc = acc * w + c[j];
  return acc;
}

/// Value and first derivative by Horner.
inline void horner_with_derivative(std::span<const Complex> c, Complex w, Complex& value,
                                   Complex& derivative) {
  Complex p = 0.0;
  Complex dp = 0.0;
  for (std::size_t j = c.size(); j-- > 0;) {
    dp = dp * w + p;
    p = p * w + c[j];
  }
  value = p;
  derivative = dp;
}

}  // namespace plbif
