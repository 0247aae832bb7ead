#pragma once

#include <array>
#include <cassert>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace plbif {

using Complex = std::complex<double>;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

/// Fixed-capacity complex vector. Used for points of C^k (k <= 4) and
/// parameters of C^m (m <= 2) so that hot loops never allocate.
template <std::size_t Capacity>
class CVec {
 public:
  CVec() = default;
  explicit CVec(int dim) : dim_(dim) {
    assert(dim >= 0 && static_cast<std::size_t>(dim) <= Capacity);
  }
  CVec(std::initializer_list<Complex> values) : dim_(static_cast<int>(values.size())) {
    assert(values.size() <= Capacity);
    std::size_t i = 0;
    for (const auto& v : values) data_[i++] = v;
  }
  explicit CVec(std::span<const Complex> values) : dim_(static_cast<int>(values.size())) {
    assert(values.size() <= Capacity);
    for (std::size_t i = 0; i < values.size(); ++i) data_[i] = values[i];
  }

  static constexpr std::size_t capacity() { return Capacity; }
  int dim() const { return dim_; }

  Complex& operator[](int i) { return data_[static_cast<std::size_t>(i)]; }
  const Complex& operator[](int i) const { return data_[static_cast<std::size_t>(i)]; }

  std::span<Complex> span() { return {data_.data(), static_cast<std::size_t>(dim_)}; }
  std::span<const Complex> span() const { return {data_.data(), static_cast<std::size_t>(dim_)}; }

  /// Max-norm; the polydisc V is the ball of this norm.
  double max_norm() const {
    double m = 0.0;
    for (int i = 0; i < dim_; ++i) m = std::max(m, std::abs(data_[static_cast<std::size_t>(i)]));
    return m;
  }
  double squared_norm() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += std::norm(data_[static_cast<std::size_t>(i)]);
    return s;
  }

  friend bool operator==(const CVec& a, const CVec& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i)
      if (a[i] != b[i]) return false;
    return true;
  }

 private:
  std::array<Complex, Capacity> data_{};
  int dim_ = 0;
};

inline constexpr std::size_t kMaxFiberDim = 4;
inline constexpr std::size_t kMaxParamDim = 2;

using Point = CVec<kMaxFiberDim>;
using Param = CVec<kMaxParamDim>;

template <std::size_t N>
double max_distance(const CVec<N>& a, const CVec<N>& b) {
  assert(a.dim() == b.dim());
  double m = 0.0;
  for (int i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Small dense complex matrix, row-major, at most 4x4.
class CMatrix {
 public:
  CMatrix() = default;
  explicit CMatrix(int n) : n_(n) { assert(n >= 0 && n <= 4); }

  static CMatrix identity(int n) {
    CMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int size() const { return n_; }
  Complex& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * 4 + j)]; }
  const Complex& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * 4 + j)]; }

  friend CMatrix operator*(const CMatrix& x, const CMatrix& y) {
    assert(x.n_ == y.n_);
    CMatrix r(x.n_);
    for (int i = 0; i < x.n_; ++i)
      for (int j = 0; j < x.n_; ++j) {
        Complex s = 0.0;
        for (int l = 0; l < x.n_; ++l) s += x(i, l) * y(l, j);
        r(i, j) = s;
      }
    return r;
  }

  Complex determinant() const;

 private:
  std::array<Complex, 16> a_{};
  int n_ = 0;
};

// Error hierarchy. Validation-type errors (bad input, out of domain) and
// numerical failures are distinguished so the CLI can map them to exit codes.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Parameter outside the declared domain, or a point outside V.
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double worst_residual)
      : NumericalError(what), worst_residual_(worst_residual) {}
  double worst_residual() const { return worst_residual_; }

 private:
  double worst_residual_;
};

/// Tree expansion would exceed the node budget.
class BudgetError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EscapeError : public NumericalError {
 public:
  EscapeError(const std::string& what, int escape_time)
      : NumericalError(what), escape_time_(escape_time) {}
  int escape_time() const { return escape_time_; }

 private:
  int escape_time_;
};

/// Too much weight on atoms where a logarithmic observable is -inf.
class IntegrabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace plbif
