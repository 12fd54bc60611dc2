#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace precipgen {

// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) {
    assert(i < rows && j < cols);
    return v[i * cols + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    assert(i < rows && j < cols);
    return v[i * cols + j];
  }
  double* row(std::size_t i) {
    assert(i < rows);
    return v.data() + i * cols;
  }
  const double* row(std::size_t i) const {
    assert(i < rows);
    return v.data() + i * cols;
  }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

// Dense row-major rank-3 tensor; the last index varies fastest.
struct Array3 {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::size_t n3 = 0;
  std::vector<double> v;

  Array3() = default;
  Array3(std::size_t a, std::size_t b, std::size_t c, double fill = 0.0)
      : n1(a), n2(b), n3(c), v(a * b * c, fill) {}

  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    assert(i < n1 && j < n2 && k < n3);
    return v[(i * n2 + j) * n3 + k];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    assert(i < n1 && j < n2 && k < n3);
    return v[(i * n2 + j) * n3 + k];
  }
  // Pointer to the contiguous slice [i][j][*].
  double* slice(std::size_t i, std::size_t j) {
    assert(i < n1 && j < n2);
    return v.data() + (i * n2 + j) * n3;
  }
  const double* slice(std::size_t i, std::size_t j) const {
    assert(i < n1 && j < n2);
    return v.data() + (i * n2 + j) * n3;
  }
  bool same_shape(const Array3& o) const { return n1 == o.n1 && n2 == o.n2 && n3 == o.n3; }
};

}  // namespace precipgen
