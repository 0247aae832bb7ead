#include "plbif/lyapunov.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "plbif/parallel.hpp"

namespace plbif {

OrthoFrame::OrthoFrame(int dim, int p) : dim_(dim), p_(p) {
  if (p < 1 || p > dim) throw ValidationError("frame size p must satisfy 1 <= p <= k");
  for (auto& v : v_) v = Point(dim);
}

OrthoFrame OrthoFrame::axes(int dim, std::span<const int> axes) {
  OrthoFrame frame(dim, static_cast<int>(axes.size()));
  for (std::size_t j = 0; j < axes.size(); ++j) frame.v_[j][axes[j]] = 1.0;
  return frame;
}

OrthoFrame OrthoFrame::random(int dim, int p, std::uint64_t seed) {
  OrthoFrame frame(dim, p);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < dim; ++i) frame.v_[static_cast<std::size_t>(j)][i] = Complex(normal(rng), normal(rng));
  frame.orthonormalize();
  return frame;
}

double OrthoFrame::orthonormalize() {
  // Modified Gram-Schmidt, two passes per vector.
  double log_scale = 0.0;
  for (int j = 0; j < p_; ++j) {
    Point& vj = v_[static_cast<std::size_t>(j)];
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i < j; ++i) {
        const Point& vi = v_[static_cast<std::size_t>(i)];
        Complex proj = 0.0;
        for (int c = 0; c < dim_; ++c) proj += std::conj(vi[c]) * vj[c];
        for (int c = 0; c < dim_; ++c) vj[c] -= proj * vi[c];
      }
    }
    const double r = std::sqrt(vj.squared_norm());
    if (!(r > 0.0)) return kNegInf;
    for (int c = 0; c < dim_; ++c) vj[c] /= r;
    log_scale += std::log(r);
  }
  return log_scale;
}

void OrthoFrame::push(const CMatrix& jac) {
  if (log_volume_ == kNegInf) return;
  for (int j = 0; j < p_; ++j) {
    Point& v = v_[static_cast<std::size_t>(j)];
    Point image(dim_);
    for (int r = 0; r < dim_; ++r) {
      Complex s = 0.0;
      for (int c = 0; c < dim_; ++c) s += jac(r, c) * v[c];
      image[r] = s;
    }
    v = image;
  }
  log_volume_ += orthonormalize();
}

double OrthoFrame::orthonormality_error() const {
  double worst = 0.0;
  for (int i = 0; i < p_; ++i)
    for (int j = 0; j < p_; ++j) {
      Complex s = 0.0;
      for (int c = 0; c < dim_; ++c) s += std::conj(v_[static_cast<std::size_t>(i)][c]) * v_[static_cast<std::size_t>(j)][c];
      worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  return worst;
}

namespace {

double log_abs(Complex z) {
  const double a = std::abs(z);
  return a == 0.0 ? kNegInf : std::log(a);
}

// Every p-subset of {0..k-1}.
std::vector<std::vector<int>> axis_subsets(int k, int p) {
  std::vector<std::vector<int>> out;
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    if (__builtin_popcount(mask) != p) continue;
    std::vector<int> axes;
    for (int i = 0; i < k; ++i)
      if (mask & (1u << i)) axes.push_back(i);
    out.push_back(axes);
  }
  return out;
}

}  // namespace

double psi_pn(const MapInstance& f, const Point& z, int n, int p, const PsiOptions& options) {
  const int k = f.dim();
  if (n < 1) throw ValidationError("psi_pn: n must be >= 1");
  if (p < 1 || p > k) throw ValidationError("psi_pn: p must satisfy 1 <= p <= k");
  const bool direct = k == 1 || p == k;
  std::vector<CMatrix> jacobians;
  if (!direct) jacobians.reserve(static_cast<std::size_t>(n));
  double direct_sum = 0.0;
  Point w = z;
  for (int i = 0; i < n; ++i) {
    if (!f.in_V(w))
      throw EscapeError(fmt::format("psi_pn: orbit of {} leaves V at step {}", format_point(z.span()), i), i);
    if (direct) {
      direct_sum += log_abs(k == 1 ? f.coordinate_derivative(0, w[0]) : f.jacobian_det(w));
    } else {
      jacobians.push_back(f.jacobian(w));
    }
    w = f.eval(w);
  }
  if (direct) return direct_sum / n;

  std::vector<OrthoFrame> frames;
  for (int r = 0; r < options.random_frames; ++r)
    frames.push_back(OrthoFrame::random(k, p, options.seed + static_cast<std::uint64_t>(r)));
  for (const auto& axes : axis_subsets(k, p)) frames.push_back(OrthoFrame::axes(k, axes));
  double best = kNegInf;
  for (auto& frame : frames) {
    for (const auto& jac : jacobians) frame.push(jac);
    best = std::max(best, frame.log_volume());
  }
  return best / n;
}

SpatialSums partial_sums_spatial(const MapInstance& f, const AtomCloud& cloud, int p, int n,
                                 const PsiOptions& options) {
  std::vector<double> a(cloud.size()), b(cloud.size());
  parallel_for(cloud.size(), [&](std::size_t i) {
    a[i] = psi_pn(f, cloud.point(i), n, p, options);
    b[i] = psi_pn(f, cloud.point(i), 2 * n, p, options);
  });
  const auto sa = sample_stats(cloud, a);
  const auto sb = sample_stats(cloud, b);
  return {sa.mean, sb.mean, sa.std_error, sb.std_error, std::max(sa.excluded_weight, sb.excluded_weight)};
}

SpatialSums partial_sums_spatial(const MapFamily& family, const Param& s, int p, int depth, int n,
                                 const CloudOptions& cloud_options, const PsiOptions& options) {
  const MapInstance f = family.at(s);
  return partial_sums_spatial(f, equilibrium_cloud(f, depth, cloud_options), p, n, options);
}

OrbitEstimate partial_sums_orbit(const MapInstance& f, const AtomCloud& cloud, int p, int orbit_length, int burn_in,
                                 std::size_t starts, const PsiOptions& options) {
  if (orbit_length < 1) throw ValidationError("partial_sums_orbit: orbit_length must be >= 1");
  if (burn_in < 0) throw ValidationError("partial_sums_orbit: burn_in must be >= 0");
  if (cloud.empty()) throw ValidationError("partial_sums_orbit: empty start cloud");
  const std::size_t count = std::min(std::max<std::size_t>(starts, 1), cloud.size());
  std::vector<double> values(count, 0.0);
  std::vector<char> ok(count, 0);
  parallel_for(count, [&](std::size_t s) {
    Point z = cloud.point(s * cloud.size() / count);
    for (int i = 0; i < burn_in; ++i) {
      if (!f.in_V(z)) return;
      z = f.eval(z);
    }
    try {
      const double v = psi_pn(f, z, orbit_length, p, options);
      if (!std::isfinite(v)) return;
      values[s] = v;
      ok[s] = 1;
    } catch (const EscapeError&) {
    }
  });
  OrbitEstimate est;
  std::vector<double> kept;
  for (std::size_t s = 0; s < count; ++s)
    if (ok[s]) kept.push_back(values[s]);
  est.used = kept.size();
  est.discarded = count - kept.size();
  if (est.discarded * 5 > count)
    throw NumericalError(fmt::format("partial_sums_orbit: {} of {} orbits discarded", est.discarded, count));
  est.value = pairwise_sum(kept.data(), kept.size()) / static_cast<double>(kept.size());
  double ss = 0.0;
  for (double v : kept) ss += (v - est.value) * (v - est.value);
  est.std_error = kept.size() > 1 ? std::sqrt(ss / static_cast<double>(kept.size() - 1) / static_cast<double>(kept.size())) : 0.0;
  return est;
}

IntegralResult sum_via_jacobian(const MapInstance& f, const AtomCloud& cloud) {
  return integrate(cloud, [&f](const Point& z) { return log_abs(f.jacobian_det(z)); });
}

std::vector<double> ExponentEstimate::chi() const {
  std::vector<double> out(L.size());
  for (std::size_t p = 0; p < L.size(); ++p) out[p] = L[p] - (p == 0 ? 0.0 : L[p - 1]);
  return out;
}

bool ExponentEstimate::ordered(double tol) const {
  const auto c = chi();
  for (std::size_t p = 1; p < c.size(); ++p)
    if (c[p] > c[p - 1] + tol) return false;
  return true;
}

bool ExponentEstimate::satisfies_degree_bound(int degree, double tol) const {
  return !L.empty() && L.back() >= 0.5 * std::log(static_cast<double>(degree)) - tol;
}

ExponentEstimate estimate_exponents(const MapInstance& f, const AtomCloud& cloud, const EstimateOptions& options) {
  ExponentEstimate est;
  const int k = f.dim();
  est.parameter = f.parameter();
  est.depth = cloud.metadata().depth;
  est.method = cloud.metadata().method;
  est.L.assign(static_cast<std::size_t>(k), 0.0);
  est.std_error.assign(static_cast<std::size_t>(k), 0.0);
  std::vector<double> logdet(cloud.size());
  parallel_for(cloud.size(), [&](std::size_t i) { logdet[i] = log_abs(f.jacobian_det(cloud.point(i))); });
  const auto top = sample_stats(cloud, logdet);
  est.L.back() = top.mean;
  est.std_error.back() = top.std_error;
  for (int p = 1; p < k; ++p) {
    const auto sums = partial_sums_spatial(f, cloud, p, options.n, options.psi);
    est.L[static_cast<std::size_t>(p - 1)] = sums.phi_2n;
    est.std_error[static_cast<std::size_t>(p - 1)] = sums.std_error_2n;
  }
  if (options.orbit_length > 0) {
    const auto orbit = partial_sums_orbit(f, cloud, 1, options.orbit_length, options.burn_in, options.orbit_starts,
                                          options.psi);
    est.orbit_length = options.orbit_length;
    est.spread = std::abs(orbit.value - est.L.front());
  }
  return est;
}

double truncated_sum(const ExponentEstimate& estimate, int p, double lambda) {
  if (p < 1 || p > estimate.k()) throw ValidationError("truncated_sum: p out of range");
  const double Lp = estimate.L[static_cast<std::size_t>(p - 1)];
  if (lambda == kNegInf) return Lp;
  double best = p * lambda;
  for (int j = 1; j <= p; ++j) best = std::max(best, estimate.L[static_cast<std::size_t>(j - 1)] + (p - j) * lambda);
  return best;
}

std::vector<std::pair<Complex, int>> critical_points_1d(const MapInstance& f) {
  if (f.dim() != 1) throw ValidationError("critical points as values need k = 1");
  std::vector<std::pair<Complex, int>> out;
  for (const auto& c : f.critical_points().components) out.emplace_back(c.point[0], c.multiplicity);
  return out;
}

IntegralResult critical_potential(const MapInstance& f, const AtomCloud& cloud, int j) {
  const auto crit = critical_points_1d(f);
  if (j < 0 || j >= static_cast<int>(crit.size()))
    throw ValidationError(fmt::format("critical_potential: index {} out of range ({} critical points)", j, crit.size()));
  return potential_1d(cloud, crit[static_cast<std::size_t>(j)].first);
}

}  // namespace plbif
