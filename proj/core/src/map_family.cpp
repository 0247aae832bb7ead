#include "plbif/map_family.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "plbif/roots.hpp"

namespace plbif {

std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::unicritical: return "unicritical";
    case FamilyKind::general: return "general";
    case FamilyKind::product: return "product";
    case FamilyKind::skew: return "skew";
  }
  return "unknown";
}

double ParamBox::max_modulus() const {
  double m = 0.0;
  for (double re : {re_min, re_max})
    for (double im : {im_min, im_max}) m = std::max(m, std::abs(Complex(re, im)));
  return m;
}

CoordinatePoly CoordinatePoly::monic(std::vector<CoeffPoly> lower) {
  CoordinatePoly p;
  p.coeffs = std::move(lower);
  p.coeffs.push_back(CoeffPoly::constant(1.0));
  return p;
}

CoordinatePoly CoordinatePoly::unicritical(int degree, int param_index) {
  std::vector<CoeffPoly> lower(static_cast<std::size_t>(degree), CoeffPoly::constant(0.0));
  lower[0] = CoeffPoly::parameter(param_index);
  return monic(std::move(lower));
}

double CriticalComponent::distance(const Point& z) const {
  if (axis >= 0) return std::abs(z[axis] - point[axis]);
  return max_distance(z, point);
}

double CriticalSet::distance(const Point& z) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& c : components) d = std::min(d, c.distance(z));
  return d;
}

std::size_t CriticalSet::total_multiplicity() const {
  std::size_t n = 0;
  for (const auto& c : components) n += static_cast<std::size_t>(c.multiplicity);
  return n;
}

// ---------------------------------------------------------------------------
// MapInstance

Point MapInstance::eval(const Point& z) const {
  Point out(dim_);
  for (int i = 0; i < dim_; ++i) {
    if (is_skew_fiber(i)) {
      Complex acc = 0.0;
      for (std::size_t j = skew_.size(); j-- > 0;) acc = acc * z[1] + horner(skew_[j], z[0]);
      out[1] = acc;
    } else {
      out[i] = horner(simple_[static_cast<std::size_t>(i)], z[i]);
    }
  }
  return out;
}

Complex MapInstance::coordinate_derivative(int coord, Complex w) const {
  return horner(simple_deriv_[static_cast<std::size_t>(coord)], w);
}

CMatrix MapInstance::jacobian(const Point& z) const {
  CMatrix jac(dim_);
  for (int i = 0; i < dim_; ++i) {
    if (is_skew_fiber(i)) {
      Complex d_z1 = 0.0;
      Complex d_z2 = 0.0;
      for (std::size_t j = skew_.size(); j-- > 0;) {
        d_z1 = d_z1 * z[1] + horner(skew_dz1_[j], z[0]);
        if (j > 0) d_z2 = d_z2 * z[1] + static_cast<double>(j) * horner(skew_[j], z[0]);
      }
      jac(1, 0) = d_z1;
      jac(1, 1) = d_z2;
    } else {
      jac(i, i) = coordinate_derivative(i, z[i]);
    }
  }
  return jac;
}

Complex MapInstance::jacobian_det(const Point& z) const {
  // Every supported kind has a triangular Jacobian.
  const CMatrix jac = jacobian(z);
  Complex det = 1.0;
  for (int i = 0; i < dim_; ++i) det *= jac(i, i);
  return det;
}

std::vector<Complex> MapInstance::fiber_coefficients(Complex z1) const {
  std::vector<Complex> c(skew_.size());
  for (std::size_t j = 0; j < skew_.size(); ++j) c[j] = horner(skew_[j], z1);
  return c;
}

FilledJuliaResult MapInstance::in_filled_julia(const Point& z, int n_max) const {
  if (n_max < 1) throw ValidationError("in_filled_julia: n_max must be >= 1");
  if (z.max_norm() > radius_) return {false, 0};
  Point w = z;
  for (int n = 1; n <= n_max; ++n) {
    w = eval(w);
    if (!(w.max_norm() <= radius_)) return {false, n};
  }
  return {true, -1};
}

namespace {

// Roots of a one-variable derivative, grouped with multiplicity.
std::vector<RootCluster> derivative_roots(std::span<const Complex> deriv) {
  std::size_t size = deriv.size();
  while (size > 0 && deriv[size - 1] == Complex{}) --size;
  if (size <= 1) return {};
  const auto result = polynomial_roots(deriv.first(size));
  return group_roots(result.roots, 1e-12);
}

void check_critical(const std::vector<RootCluster>& clusters, std::span<const Complex> deriv) {
  constexpr double kTolCrit = 1e-10;
  double worst = 0.0;
  for (const auto& c : clusters) worst = std::max(worst, std::abs(horner(deriv, c.center)));
  if (worst >= kTolCrit)
    throw ConvergenceError("critical_points: derivative residual " + std::to_string(worst) + " above 1e-10",
                           worst);
}

}  // namespace

CriticalSet MapInstance::critical_points() const {
  CriticalSet set;
  const int base_coords = kind_ == FamilyKind::skew ? 1 : dim_;
  for (int i = 0; i < base_coords; ++i) {
    const auto& deriv = simple_deriv_[static_cast<std::size_t>(i)];
    const auto clusters = derivative_roots(deriv);
    check_critical(clusters, deriv);
    for (const auto& c : clusters) {
      CriticalComponent comp;
      comp.axis = (dim_ == 1) ? -1 : i;
      comp.point = Point(dim_);
      comp.point[i] = c.center;
      comp.multiplicity = c.multiplicity;
      set.components.push_back(comp);
    }
  }
  if (kind_ == FamilyKind::skew) {
    // Sampled zero set of d q / d z2 over a polar net of z1 values.
    constexpr int kRadii = 8;
    constexpr int kAngles = 32;
    for (int r = 0; r <= kRadii; ++r) {
      const int angles = r == 0 ? 1 : kAngles;
      for (int a = 0; a < angles; ++a) {
        const Complex z1 = std::polar(radius_ * r / kRadii, 2.0 * kPi * a / kAngles);
        const auto c = fiber_coefficients(z1);
        std::vector<Complex> deriv;
        for (std::size_t j = 1; j < c.size(); ++j) deriv.push_back(static_cast<double>(j) * c[j]);
        for (const auto& root : derivative_roots(deriv)) {
          if (std::abs(root.center) > radius_) continue;
          CriticalComponent comp;
          comp.axis = -1;
          comp.point = Point{z1, root.center};
          comp.multiplicity = root.multiplicity;
          set.components.push_back(comp);
        }
      }
    }
  }
  return set;
}

// ---------------------------------------------------------------------------
// MapFamily

MapFamily MapFamily::unicritical(int degree, ParamBox domain, double escape_radius) {
  MapFamily f;
  f.kind_ = FamilyKind::unicritical;
  f.param_dim_ = 1;
  f.domain_ = {domain};
  f.coords_ = {CoordinatePoly::unicritical(degree, 0)};
  f.validate();
  f.radius_ = escape_radius > 0.0 ? escape_radius : std::max(2.0, 2.0 * (1.0 + domain.max_modulus()));
  return f;
}

MapFamily MapFamily::general(std::vector<CoeffPoly> lower_coeffs, int param_dim, std::vector<ParamBox> domain,
                             double escape_radius) {
  MapFamily f;
  f.kind_ = FamilyKind::general;
  f.param_dim_ = param_dim;
  f.domain_ = std::move(domain);
  f.coords_ = {CoordinatePoly::monic(std::move(lower_coeffs))};
  f.validate();
  f.radius_ = escape_radius > 0.0 ? escape_radius : f.default_radius();
  return f;
}

MapFamily MapFamily::product(std::vector<CoordinatePoly> components, int param_dim, std::vector<ParamBox> domain,
                             double escape_radius) {
  MapFamily f;
  f.kind_ = FamilyKind::product;
  f.param_dim_ = param_dim;
  f.domain_ = std::move(domain);
  f.coords_ = std::move(components);
  f.validate();
  f.radius_ = escape_radius > 0.0 ? escape_radius : f.default_radius();
  return f;
}

MapFamily MapFamily::skew(CoordinatePoly base, CoordinatePoly fiber, int param_dim, std::vector<ParamBox> domain,
                          double escape_radius) {
  MapFamily f;
  f.kind_ = FamilyKind::skew;
  f.param_dim_ = param_dim;
  f.domain_ = std::move(domain);
  f.coords_ = {std::move(base), std::move(fiber)};
  f.validate();
  if (escape_radius > 0.0) {
    f.radius_ = escape_radius;
  } else {
    f.radius_ = 2.0;
    while (!f.certify_escape_radius(256, 3).ok) {
      f.radius_ *= 2.0;
      if (f.radius_ > 1e6) throw ValidationError("skew family: no escape radius certified up to 1e6");
    }
  }
  return f;
}

int MapFamily::degree() const {
  int d = 1;
  for (const auto& c : coords_) d *= c.degree();
  return d;
}

void MapFamily::validate() const {
  if (param_dim_ < 1 || param_dim_ > static_cast<int>(kMaxParamDim))
    throw ValidationError("parameter dimension must be 1 or 2");
  if (static_cast<int>(domain_.size()) != param_dim_)
    throw ValidationError("parameter domain needs one rectangle per parameter");
  for (const auto& box : domain_)
    if (!(box.re_min <= box.re_max && box.im_min <= box.im_max))
      throw ValidationError("parameter rectangle has min > max");
  if (coords_.empty() || coords_.size() > kMaxFiberDim) throw ValidationError("fiber dimension must be 1..4");
  if (kind_ == FamilyKind::skew && coords_.size() != 2) throw ValidationError("skew family needs two coordinates");
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    const auto& c = coords_[i];
    if (c.degree() < 1) throw ValidationError("coordinate polynomial must have degree >= 1");
    const bool fiber = kind_ == FamilyKind::skew && i == 1;
    for (const auto& coeff : c.coeffs) {
      if (coeff.max_param_index() >= param_dim_)
        throw ValidationError("coefficient uses parameter s" + std::to_string(coeff.max_param_index() + 1) +
                              " beyond the parameter dimension");
      if (!fiber && coeff.uses_z1()) throw ValidationError("only the skew fiber coordinate may depend on z1");
    }
    const auto& lead = c.coeffs.back();
    if (!fiber) {
      if (lead.uses_z1() || lead.max_param_index() >= 0 || lead.eval(Param(param_dim_)) != Complex(1.0, 0.0))
        throw ValidationError("coordinate polynomial must be monic");
      if (kind_ != FamilyKind::skew && c.degree() < 2)
        throw ValidationError("coordinate degree must be >= 2");
    } else if (lead.is_zero()) {
      throw ValidationError("skew fiber polynomial has zero leading coefficient");
    }
  }
  if (degree() < 2) throw ValidationError("topological degree must be >= 2");
}

double MapFamily::default_radius() const {
  const auto samples = domain_samples(9);
  double radius = 2.0;
  for (const auto& c : coords_) {
    double bound = 0.0;
    for (int j = 0; j < c.degree(); ++j) {
      double m = 0.0;
      for (const auto& s : samples) m = std::max(m, std::abs(c.coeffs[static_cast<std::size_t>(j)].eval(s)));
      bound += m;
    }
    radius = std::max(radius, 2.0 * (1.0 + 1.05 * bound));
  }
  return radius;
}

bool MapFamily::contains(const Param& s) const {
  if (s.dim() != param_dim_) return false;
  for (int i = 0; i < param_dim_; ++i) {
    const double scale = std::max(1.0, std::abs(s[i]));
    if (!domain_[static_cast<std::size_t>(i)].contains(s[i], 1e-12 * scale)) return false;
  }
  return true;
}

MapInstance MapFamily::at(const Param& s) const {
  if (!contains(s)) {
    std::ostringstream os;
    os << "parameter (";
    for (int i = 0; i < s.dim(); ++i) os << (i ? ", " : "") << s[i].real() << (s[i].imag() < 0 ? "" : "+") << s[i].imag() << "i";
    os << ") outside the parameter domain";
    throw DomainError(os.str());
  }
  MapInstance inst;
  inst.kind_ = kind_;
  inst.dim_ = fiber_dim();
  inst.degree_ = degree();
  inst.radius_ = radius_;
  inst.param_ = s;
  inst.simple_.resize(coords_.size());
  inst.simple_deriv_.resize(coords_.size());
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    const auto& c = coords_[i];
    inst.coord_degree_.push_back(c.degree());
    if (kind_ == FamilyKind::skew && i == 1) {
      for (const auto& coeff : c.coeffs) {
        inst.skew_.push_back(coeff.specialize(s));
        inst.skew_dz1_.push_back(coeff.derivative_z1().specialize(s));
      }
      continue;
    }
    auto& v = inst.simple_[i];
    for (const auto& coeff : c.coeffs) v.push_back(coeff.eval(s));
    auto& dv = inst.simple_deriv_[i];
    for (std::size_t j = 1; j < v.size(); ++j) dv.push_back(static_cast<double>(j) * v[j]);
  }
  return inst;
}

std::vector<Param> MapFamily::domain_samples(int per_axis) const {
  std::vector<std::vector<Complex>> axis_samples;
  for (const auto& box : domain_) {
    std::vector<Complex> pts;
    for (int a = 0; a < per_axis; ++a)
      for (int b = 0; b < per_axis; ++b) {
        const double tx = per_axis > 1 ? static_cast<double>(a) / (per_axis - 1) : 0.5;
        const double ty = per_axis > 1 ? static_cast<double>(b) / (per_axis - 1) : 0.5;
        pts.emplace_back(box.re_min + tx * (box.re_max - box.re_min), box.im_min + ty * (box.im_max - box.im_min));
      }
    axis_samples.push_back(std::move(pts));
  }
  std::vector<Param> out;
  if (param_dim_ == 1) {
    for (const auto& p : axis_samples[0]) out.push_back(Param{p});
  } else {
    for (const auto& p : axis_samples[0])
      for (const auto& q : axis_samples[1]) out.push_back(Param{p, q});
  }
  return out;
}

EscapeCertificate MapFamily::certify_escape_radius(int points_per_face, int param_samples_per_axis) const {
  EscapeCertificate cert;
  cert.worst_ratio = std::numeric_limits<double>::infinity();
  const int k = fiber_dim();
  // Net of the closed disc for the free coordinates of a face.
  std::vector<Complex> disc_net{0.0};
  for (double r : {0.5, 1.0})
    for (int a = 0; a < 8; ++a) disc_net.push_back(std::polar(r * radius_, 2.0 * kPi * (a + 0.5) / 8.0));
  std::size_t free_count = 1;
  for (int i = 1; i < k; ++i) free_count *= disc_net.size();
  const int angles = std::max(16, static_cast<int>((static_cast<std::size_t>(points_per_face) + free_count - 1) / free_count));

  for (const auto& s : domain_samples(param_samples_per_axis)) {
    const MapInstance f = at(s);
    for (int face = 0; face < k; ++face) {
      for (int a = 0; a < angles; ++a) {
        const Complex on_circle = std::polar(radius_, 2.0 * kPi * a / angles + 0.1);
        for (std::size_t idx = 0; idx < free_count; ++idx) {
          Point z(k);
          std::size_t rest = idx;
          for (int i = 0; i < k; ++i) {
            if (i == face) {
              z[i] = on_circle;
            } else {
              z[i] = disc_net[rest % disc_net.size()];
              rest /= disc_net.size();
            }
          }
          const double ratio = f.eval(z).max_norm() / radius_;
          ++cert.samples;
          if (ratio < cert.worst_ratio) {
            cert.worst_ratio = ratio;
            cert.worst_param = s;
            cert.worst_point = z;
          }
        }
      }
    }
  }
  cert.ok = cert.worst_ratio > 1.0;
  return cert;
}

Point generic_point(int dim, double radius) {
  Point z(dim);
  const double r = std::min(2.0, radius / 2.0);
  for (int i = 0; i < dim; ++i) z[i] = std::polar(r, 0.7);
  return z;
}

Point MapFamily::generic_base_point() const { return generic_point(fiber_dim(), radius_); }

}  // namespace plbif
