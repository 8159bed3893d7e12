// Copyright (c) 2026 The accentts Authors
//
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

#ifndef ACCENTTS_CORE_MATRIX_HPP_
#define ACCENTTS_CORE_MATRIX_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace accentts {

// Dense row-major matrix of doubles. Vectors are represented as [n x 1]
// or [1 x n] matrices depending on context.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(Size(rows, cols), 0.0) {}
  Matrix(int rows, int cols, double fill)
      : rows_(rows), cols_(cols), data_(Size(rows, cols), fill) {}

  static Matrix FromRows(int rows, int cols, std::vector<double> values);
  static Matrix ColumnVector(const std::vector<double>& values);
  static Matrix RowVector(const std::vector<double>& values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double* row_ptr(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  const double* row_ptr(int r) const { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  bool all_finite() const;

  std::string shape_str() const;

 private:
  static std::size_t Size(int rows, int cols) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("matrix: negative dimension");
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// c = a * b
Matrix MatMul(const Matrix& a, const Matrix& b);
// c += a * b (c must already have the right shape)
void MatMulAcc(const Matrix& a, const Matrix& b, Matrix* c);
// c += a^T * b
void MatMulTransAAcc(const Matrix& a, const Matrix& b, Matrix* c);
// c += a * b^T
void MatMulTransBAcc(const Matrix& a, const Matrix& b, Matrix* c);

Matrix Transpose(const Matrix& a);

double L2Norm(const Matrix& a);
double MaxAbsDiff(const Matrix& a, const Matrix& b);
bool BitwiseEqual(const Matrix& a, const Matrix& b);

// Round every entry through IEEE-754 binary32. Parameter stores stay in this
// subset so that float32 checkpoints round-trip exactly.
void SnapToFloat32(Matrix* a);

}  // namespace accentts

#endif  // ACCENTTS_CORE_MATRIX_HPP_
