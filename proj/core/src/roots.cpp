#include "plbif/roots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "plbif/polynomial.hpp"

namespace plbif {

namespace {

std::int64_t rounded_key(double x) {
  const double scaled = std::round(x * 1e12);
  constexpr double kLimit = 9.0e18;
  return static_cast<std::int64_t>(std::clamp(scaled, -kLimit, kLimit));
}

bool is_binomial(std::span<const Complex> c) {
  for (std::size_t j = 1; j + 1 < c.size(); ++j)
    if (c[j] != Complex{}) return false;
  return true;
}

}  // namespace

bool canonical_less(Complex a, Complex b) {
  const auto ar = rounded_key(a.real()), br = rounded_key(b.real());
  if (ar != br) return ar < br;
  const auto ai = rounded_key(a.imag()), bi = rounded_key(b.imag());
  if (ai != bi) return ai < bi;
  return false;
}

bool canonical_less(std::span<const Complex> a, std::span<const Complex> b) {
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    if (canonical_less(a[i], b[i])) return true;
    if (canonical_less(b[i], a[i])) return false;
  }
  return false;
}

void canonical_sort(std::span<Complex> values) {
  std::stable_sort(values.begin(), values.end(), [](Complex a, Complex b) { return canonical_less(a, b); });
}

std::vector<Complex> binomial_roots(Complex leading, Complex constant, int degree) {
  std::vector<Complex> roots(static_cast<std::size_t>(degree));
  const Complex target = -constant / leading;
  if (target == Complex{}) return roots;
  const double radius = std::pow(std::abs(target), 1.0 / degree);
  const double base_angle = std::arg(target) / degree;
  for (int j = 0; j < degree; ++j) roots[static_cast<std::size_t>(j)] = std::polar(radius, base_angle + 2.0 * kPi * j / degree);
  return roots;
}

void merge_clusters(std::span<Complex> roots, double tol) {
  const std::size_t n = roots.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  bool any = false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(roots[i] - roots[j]) < tol) {
        parent[find(i)] = find(j);
        any = true;
      }
  if (!any) return;
  std::vector<Complex> sum(n, Complex{});
  std::vector<int> count(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    sum[find(i)] += roots[i];
    ++count[find(i)];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = find(i);
    if (count[r] > 1) roots[i] = sum[r] / static_cast<double>(count[r]);
  }
}

std::vector<RootCluster> group_roots(std::span<const Complex> roots, double tol) {
  std::vector<RootCluster> out;
  for (const auto& r : roots) {
    auto it = std::find_if(out.begin(), out.end(), [&](const RootCluster& c) { return std::abs(c.center - r) < tol; });
    if (it == out.end()) out.push_back({r, 1});
    else ++it->multiplicity;
  }
  return out;
}

RootResult polynomial_roots(std::span<const Complex> coeffs, const RootOptions& options) {
  // Drop vanishing leading coefficients.
  std::size_t size = coeffs.size();
  while (size > 1 && coeffs[size - 1] == Complex{}) --size;
  if (size <= 1) throw ValidationError("polynomial_roots: constant polynomial has no roots");
  const std::span<const Complex> c = coeffs.first(size);
  const int degree = static_cast<int>(size) - 1;

  RootResult result;
  if (is_binomial(c)) {
    result.roots = binomial_roots(c[size - 1], c[0], degree);
    result.converged = true;
  } else {
    // Monic normalization for the initial radius only.
    double max_coeff = 0.0;
    for (std::size_t j = 0; j + 1 < size; ++j) max_coeff = std::max(max_coeff, std::abs(c[j] / c[size - 1]));
    const double radius = 1.0 + max_coeff;
    result.roots.resize(static_cast<std::size_t>(degree));
    for (int j = 0; j < degree; ++j)
      result.roots[static_cast<std::size_t>(j)] = std::polar(radius, options.phase_offset + 2.0 * kPi * j / degree);

    auto ratio = [&](Complex z) {
      Complex p, dp;
      horner_with_derivative(c, z, p, dp);
      if (p == Complex{}) return Complex{};
      return p / dp;
    };
    std::vector<char> done;
    result.iterations = aberth_sweeps(std::span<Complex>(result.roots), ratio, options.max_iters, 4e-16, false, done);
    result.converged = std::all_of(done.begin(), done.end(), [](char d) { return d != 0; });

    for (auto& z : result.roots) {
      Complex p, dp;
      horner_with_derivative(c, z, p, dp);
      for (int step = 0; step < options.polish_steps && p != Complex{} && dp != Complex{}; ++step) {
        const Complex candidate = z - p / dp;
        Complex pc, dpc;
        horner_with_derivative(c, candidate, pc, dpc);
        if (!(std::abs(pc) < std::abs(p))) break;
        z = candidate;
        p = pc;
        dp = dpc;
      }
    }
    merge_clusters(result.roots, options.cluster_tol);
  }
  canonical_sort(result.roots);
  result.residuals.reserve(result.roots.size());
  for (const auto& z : result.roots) result.residuals.push_back(std::abs(horner(c, z)));
  return result;
}

}  // namespace plbif
