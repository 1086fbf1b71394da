#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include <boost/multiprecision/gmp.hpp>

namespace wallsim {

/// Dense row-major square matrix, just enough for small determinants.
template <typename Scalar> class SquareMatrix {
public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n) : n_(n), data_(n * n, Scalar(0)) {}

  std::size_t size() const { return n_; }
  Scalar &operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  const Scalar &operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

private:
  std::size_t n_ = 0;
  std::vector<Scalar> data_;
};

namespace detail {
template <typename Scalar> auto magnitude(const Scalar &v) {
  using std::abs;
  using boost::multiprecision::abs;
  return abs(v);
}
} // namespace detail

/// LU with partial pivoting. Exact for rationals (any nonzero pivot is
/// exact), well conditioned enough in double for the small sizes used here.
/// The empty determinant is 1.
template <typename Scalar> Scalar determinant(SquareMatrix<Scalar> m) {
  const std::size_t n = m.size();
  Scalar det(1);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    auto best = detail::magnitude(m(col, col));
    for (std::size_t row = col + 1; row < n; ++row) {
      auto mag = detail::magnitude(m(row, col));
      if (mag > best) {
        best = mag;
        pivot = row;
      }
    }
    if (m(pivot, col) == Scalar(0))
      return Scalar(0);
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j)
        std::swap(m(pivot, j), m(col, j));
      det = -det;
    }
    det *= m(col, col);
    for (std::size_t row = col + 1; row < n; ++row) {
      if (m(row, col) == Scalar(0))
        continue;
      Scalar factor = m(row, col) / m(col, col);
      for (std::size_t j = col; j < n; ++j)
        m(row, j) -= factor * m(col, j);
    }
  }
  return det;
}

} // namespace wallsim
