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

#ifndef ACCENTTS_CORE_AUTOGRAD_HPP_
#define ACCENTTS_CORE_AUTOGRAD_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "accentts/core/matrix.hpp"
#include "accentts/core/rng.hpp"

namespace accentts::ad {

// Reverse-mode automatic differentiation on a dynamically built tape.
// Every operation creates a Node holding its value and a closure that
// scatters the node's gradient into its parents. Backward() replays the
// tape in reverse creation order, which is a valid topological order.

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
  Matrix value;
  Matrix grad;  // allocated lazily, same shape as value
  bool requires_grad = false;
  std::int64_t id = 0;
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backprop;

  Matrix& ensure_grad() {
    if (grad.empty() && !value.empty()) grad = Matrix(value.rows(), value.cols());
    return grad;
  }
};

class Var {
 public:
  Var() = default;
  explicit Var(NodePtr n) : node_(std::move(n)) {}

  bool defined() const { return node_ != nullptr; }
  const Matrix& value() const { return node_->value; }
  const Matrix& grad() const { return node_->grad; }
  double scalar() const { return node_->value.at(0, 0); }
  int rows() const { return node_->value.rows(); }
  int cols() const { return node_->value.cols(); }
  Node* node() const { return node_.get(); }
  const NodePtr& ptr() const { return node_; }

 private:
  NodePtr node_;
};

Var Leaf(Matrix value, bool requires_grad = false);
Var Constant(Matrix value);
Var ScalarConstant(double v);

Var Add(const Var& a, const Var& b);
Var Sub(const Var& a, const Var& b);
Var Mul(const Var& a, const Var& b);
Var Scale(const Var& a, double s);
// y[t, c] = a[t, c] + b[0, c]
Var AddBroadcastRow(const Var& a, const Var& b);
Var MatMul(const Var& a, const Var& b);
Var Transpose(const Var& a);

Var Sigmoid(const Var& a);
Var Tanh(const Var& a);
Var Relu(const Var& a);
Var Softsign(const Var& a);
Var Exp(const Var& a);
Var Log(const Var& a);

// Row-wise softmax over the column axis.
Var SoftmaxRows(const Var& a);
// Softmax over every entry (used for attention weight vectors).
Var SoftmaxAll(const Var& a);

// Inverted dropout; identity when !train or p == 0.
Var Dropout(const Var& a, double p, Rng* rng, bool train);

Var SliceRows(const Var& a, int r0, int r1);
Var SliceCols(const Var& a, int c0, int c1);
Var Row(const Var& a, int r);
Var ConcatRows(const std::vector<Var>& parts);
Var ConcatCols(const std::vector<Var>& parts);
Var GatherRows(const Var& table, std::vector<int> indices);

// y = (x - mean_row) / sqrt(var_row + eps) * gain + bias, per row.
Var LayerNormRows(const Var& x, const Var& gain, const Var& bias, double eps = 1e-5);
// Same normalization, but statistics run down each column (over time for
// [T x C] sequences); gain/bias are per column.
Var NormColsOverRows(const Var& x, const Var& gain, const Var& bias, double eps = 1e-5);

// 1-D convolution along the row (time) axis with zero same-padding.
// x: [T x Cin], w: [K*Cin x Cout] (kernel-major), b: [1 x Cout], K odd.
Var Conv1dSame(const Var& x, const Var& w, const Var& b, int kernel);

Var SumAll(const Var& a);
Var MeanAll(const Var& a);
// Mean squared error over all entries.
Var Mse(const Var& a, const Var& b);
// Mean binary cross-entropy of logits against constant targets in [0, 1].
Var BceWithLogits(const Var& logits, const Matrix& targets);
// Mean token cross-entropy of row logits against class indices, skipping
// rows whose target equals ignore_index. Throws if every row is skipped.
Var CrossEntropyRows(const Var& logits, const std::vector<int>& targets, int ignore_index);

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);

// Accumulates seed into root's gradient and replays the tape. Gradients
// accumulate across calls until leaves are re-created or zeroed.
void Backward(const Var& root, double seed = 1.0);

}  // namespace accentts::ad

#endif  // ACCENTTS_CORE_AUTOGRAD_HPP_
