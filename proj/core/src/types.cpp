#include "plbif/types.hpp"

namespace plbif {

Complex CMatrix::determinant() const {
  // Gaussian elimination with partial pivoting on a copy.
  CMatrix m = *this;
  Complex det = 1.0;
  for (int col = 0; col < n_; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n_; ++r)
      if (std::abs(m(r, col)) > std::abs(m(pivot, col))) pivot = r;
    if (m(pivot, col) == Complex{}) return 0.0;
    if (pivot != col) {
      for (int c = 0; c < n_; ++c) std::swap(m(pivot, c), m(col, c));
      det = -det;
    }
    det *= m(col, col);
    for (int r = col + 1; r < n_; ++r) {
      const Complex f = m(r, col) / m(col, col);
      for (int c = col; c < n_; ++c) m(r, c) -= f * m(col, c);
    }
  }
  return det;
}

}  // namespace plbif
