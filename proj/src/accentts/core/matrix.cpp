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

#include "accentts/core/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace accentts {

Matrix Matrix::FromRows(int rows, int cols, std::vector<double> values) {
  if (values.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::invalid_argument("matrix: value count does not match shape");
  }
  Matrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.data_ = std::move(values);
  return m;
}

Matrix Matrix::ColumnVector(const std::vector<double>& values) {
  return FromRows(static_cast<int>(values.size()), 1, values);
}

Matrix Matrix::RowVector(const std::vector<double>& values) {
  return FromRows(1, static_cast<int>(values.size()), values);
}

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Matrix::shape_str() const {
  return "[" + std::to_string(rows_) + " x " + std::to_string(cols_) + "]";
}

Matrix MatMul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  MatMulAcc(a, b, &c);
  return c;
}

void MatMulAcc(const Matrix& a, const Matrix& b, Matrix* c) {
  if (a.cols() != b.rows() || c->rows() != a.rows() || c->cols() != b.cols()) {
    throw std::invalid_argument("matmul: shape mismatch " + a.shape_str() + " * " +
                                b.shape_str() + " -> " + c->shape_str());
  }
  const int n = a.rows(), k = a.cols(), m = b.cols();
  for (int i = 0; i < n; ++i) {
    const double* arow = a.row_ptr(i);
    double* crow = c->row_ptr(i);
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b.row_ptr(p);
      for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

void MatMulTransAAcc(const Matrix& a, const Matrix& b, Matrix* c) {
  // c [a.cols x b.cols] += a^T * b
  if (a.rows() != b.rows() || c->rows() != a.cols() || c->cols() != b.cols()) {
    throw std::invalid_argument("matmul_ta: shape mismatch");
  }
  const int n = a.rows(), k = a.cols(), m = b.cols();
  for (int i = 0; i < n; ++i) {
    const double* arow = a.row_ptr(i);
    const double* brow = b.row_ptr(i);
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      double* crow = c->row_ptr(p);
      for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

void MatMulTransBAcc(const Matrix& a, const Matrix& b, Matrix* c) {
  // c [a.rows x b.rows] += a * b^T
  if (a.cols() != b.cols() || c->rows() != a.rows() || c->cols() != b.rows()) {
    throw std::invalid_argument("matmul_tb: shape mismatch");
  }
  const int n = a.rows(), k = a.cols(), m = b.rows();
  for (int i = 0; i < n; ++i) {
    const double* arow = a.row_ptr(i);
    double* crow = c->row_ptr(i);
    for (int j = 0; j < m; ++j) {
      const double* brow = b.row_ptr(j);
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

Matrix Transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) t.at(j, i) = a.at(i, j);
  }
  return t;
}

double L2Norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.raw()) s += v * v;
  return std::sqrt(s);
}

double MaxAbsDiff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::fabs(a.raw()[i] - b.raw()[i]));
  }
  return m;
}

bool BitwiseEqual(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) return false;
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void SnapToFloat32(Matrix* a) {
  for (double& v : a->raw()) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace accentts
