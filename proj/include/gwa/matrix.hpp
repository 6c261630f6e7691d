// Copyright 2026 The gwa Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GWA_MATRIX_HPP
#define GWA_MATRIX_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gwa/rng.hpp"

namespace gwa {

// Dense row-major matrix. Only what the attention path needs.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  T* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  const T* row(int r) const { return data_.data() + static_cast<std::size_t>(r) * cols_; }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: inner dimensions disagree");
  }
  Matrix<T> out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    const T* arow = a.row(i);
    T* orow = out.row(i);
    for (int k = 0; k < a.cols(); ++k) {
      const T aik = arow[k];
      const T* brow = b.row(k);
      for (int j = 0; j < b.cols(); ++j) {
        orow[j] += aik * brow[j];
      }
    }
  }
  return out;
}

template <typename T>
Matrix<T> random_normal_matrix(int rows, int cols, RngEngine& rng, T scale = T(1)) {
  Matrix<T> out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      out(r, c) = static_cast<T>(standard_normal(rng)) * scale;
    }
  }
  return out;
}

template <typename T>
bool all_finite(const Matrix<T>& m) {
  for (const T& v : m.data()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace gwa

#endif  // GWA_MATRIX_HPP
