#pragma once

#include <plbif/map_family.hpp>

namespace testfam {

using plbif::CoeffPoly;
using plbif::CoordinatePoly;
using plbif::MapFamily;
using plbif::Param;
using plbif::ParamBox;

inline Param p1(std::complex<double> s) { return Param{s}; }
inline Param p2(std::complex<double> a, std::complex<double> b) { return Param{a, b}; }

// z^2 + c over [-4,4]^2.
inline MapFamily quadratic() { return MapFamily::unicritical(2, ParamBox{-4, 4, -4, 4}); }

inline MapFamily unicritical(int d) { return MapFamily::unicritical(d, ParamBox{-2, 2, -2, 2}); }

// z^3 - 3z + s.
inline MapFamily cubic_two_critical() {
  return MapFamily::general({CoeffPoly::parameter(0), CoeffPoly::constant(-3.0), CoeffPoly::constant(0.0)}, 1,
                            {ParamBox{-2, 2, -2, 2}});
}

// (z^da + s1, w^db + s2).
inline MapFamily product(int da, int db) {
  return MapFamily::product({CoordinatePoly::unicritical(da, 0), CoordinatePoly::unicritical(db, 1)}, 2,
                            {ParamBox{-2, 2, -2, 2}, ParamBox{-2, 2, -2, 2}});
}

// (z1^2 + s, z2^2 + 0.5 z1).
inline MapFamily skew_quadratic() {
  CoordinatePoly base = CoordinatePoly::unicritical(2, 0);
  CoordinatePoly fiber = CoordinatePoly::monic({CoeffPoly::parse("0.5*z1"), CoeffPoly::constant(0.0)});
  return MapFamily::skew(base, fiber, 1, {ParamBox{-1, 0.5, -0.5, 0.5}});
}

// (z^2, z w): not polynomial-like, only used for pointwise formulas.
inline MapFamily skew_zw() {
  CoordinatePoly base = CoordinatePoly::monic({CoeffPoly::constant(0.0), CoeffPoly::constant(0.0)});
  CoordinatePoly fiber;
  fiber.coeffs = {CoeffPoly::constant(0.0), CoeffPoly::parse("z1")};
  return MapFamily::skew(base, fiber, 1, {ParamBox{-1, 1, -1, 1}}, 2.0);
}

}  // namespace testfam
