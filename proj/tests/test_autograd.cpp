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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>

#include "accentts/core/autograd.hpp"
#include "accentts/core/rng.hpp"

using namespace accentts;
namespace ad = accentts::ad;

namespace {

Matrix RandomMatrix(int rows, int cols, Rng* rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.raw()) v = rng->uniform(-scale, scale);
  return m;
}

// Finite-difference check of a scalar graph w.r.t. one leaf.
double MaxRelErr(const std::function<ad::Var(const std::vector<ad::Var>&)>& build,
                 std::vector<Matrix> inputs) {
  std::vector<ad::Var> leaves;
  for (auto& m : inputs) leaves.push_back(ad::Leaf(m, true));
  ad::Var out = build(leaves);
  ad::Backward(out);

  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double x0 = inputs[k].raw()[i];
      const double h = 1e-6 * std::max(1.0, std::fabs(x0));
      auto eval = [&](double x) {
        std::vector<ad::Var> ls;
        for (std::size_t q = 0; q < inputs.size(); ++q) {
          Matrix m = inputs[q];
          if (q == k) m.raw()[i] = x;
          ls.push_back(ad::Leaf(std::move(m), false));
        }
        return build(ls).scalar();
      };
      const double fd = (eval(x0 + h) - eval(x0 - h)) / (2.0 * h);
      const double analytic = leaves[k].grad().raw()[i];
      const double rel =
          std::fabs(analytic - fd) / std::max({std::fabs(fd), std::fabs(analytic), 1e-6});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("matmul/add/bias gradients match finite differences") {
  Rng rng(7);
  auto build = [](const std::vector<ad::Var>& v) {
    return ad::MeanAll(ad::Tanh(ad::AddBroadcastRow(ad::MatMul(v[0], v[1]), v[2])));
  };
  const double err = MaxRelErr(build, {RandomMatrix(3, 4, &rng), RandomMatrix(4, 5, &rng),
                                       RandomMatrix(1, 5, &rng)});
  CHECK(err < 1e-6);
}

TEST_CASE("elementwise op gradients") {
  Rng rng(8);
  auto build = [](const std::vector<ad::Var>& v) {
    const ad::Var a = ad::Sigmoid(v[0]);
    const ad::Var b = ad::Softsign(v[1]);
    return ad::MeanAll(ad::Mul(ad::Add(a, b), ad::Relu(v[2])));
  };
  const double err = MaxRelErr(build, {RandomMatrix(4, 3, &rng), RandomMatrix(4, 3, &rng),
                                       RandomMatrix(4, 3, &rng, 0.7)});
  CHECK(err < 1e-6);
}

TEST_CASE("softmax rows and softmax all gradients") {
  Rng rng(9);
  auto build_rows = [](const std::vector<ad::Var>& v) {
    return ad::MeanAll(ad::Mul(ad::SoftmaxRows(v[0]), v[1]));
  };
  CHECK(MaxRelErr(build_rows, {RandomMatrix(3, 5, &rng, 2.0), RandomMatrix(3, 5, &rng)}) <
        1e-6);
  auto build_all = [](const std::vector<ad::Var>& v) {
    return ad::MeanAll(ad::Mul(ad::SoftmaxAll(v[0]), v[1]));
  };
  CHECK(MaxRelErr(build_all, {RandomMatrix(4, 1, &rng, 2.0), RandomMatrix(4, 1, &rng)}) <
        1e-6);
}

TEST_CASE("slice/concat/transpose/gather gradients") {
  Rng rng(10);
  auto build = [](const std::vector<ad::Var>& v) {
    const ad::Var top = ad::SliceRows(v[0], 0, 2);
    const ad::Var right = ad::SliceCols(v[0], 1, 3);
    const ad::Var cat = ad::ConcatCols({top, ad::Transpose(right)});
    const ad::Var g = ad::GatherRows(v[1], {0, 2, 2, 1});
    return ad::Add(ad::MeanAll(cat), ad::MeanAll(ad::Exp(ad::Scale(g, 0.3))));
  };
  CHECK(MaxRelErr(build, {RandomMatrix(4, 3, &rng), RandomMatrix(3, 2, &rng)}) < 1e-6);
}

TEST_CASE("layer norm and time norm gradients") {
  Rng rng(11);
  auto build_ln = [](const std::vector<ad::Var>& v) {
    return ad::MeanAll(ad::Mul(ad::LayerNormRows(v[0], v[1], v[2]), v[3]));
  };
  CHECK(MaxRelErr(build_ln, {RandomMatrix(3, 6, &rng), RandomMatrix(1, 6, &rng),
                             RandomMatrix(1, 6, &rng), RandomMatrix(3, 6, &rng)}) < 1e-5);
  auto build_tn = [](const std::vector<ad::Var>& v) {
    return ad::MeanAll(ad::Mul(ad::NormColsOverRows(v[0], v[1], v[2]), v[3]));
  };
  CHECK(MaxRelErr(build_tn, {RandomMatrix(5, 3, &rng), RandomMatrix(1, 3, &rng),
                             RandomMatrix(1, 3, &rng), RandomMatrix(5, 3, &rng)}) < 1e-5);
}

TEST_CASE("conv1d gradients") {
  Rng rng(12);
  auto build = [](const std::vector<ad::Var>& v) {
    return ad::MeanAll(ad::Tanh(ad::Conv1dSame(v[0], v[1], v[2], 3)));
  };
  CHECK(MaxRelErr(build, {RandomMatrix(6, 2, &rng), RandomMatrix(3 * 2, 4, &rng),
                          RandomMatrix(1, 4, &rng)}) < 1e-6);
}

TEST_CASE("loss op gradients") {
  Rng rng(13);
  auto build_mse = [](const std::vector<ad::Var>& v) { return ad::Mse(v[0], v[1]); };
  CHECK(MaxRelErr(build_mse, {RandomMatrix(3, 4, &rng), RandomMatrix(3, 4, &rng)}) < 1e-6);

  Matrix targets(5, 1);
  Rng trng(14);
  for (double& v : targets.raw()) v = trng.uniform() < 0.5 ? 0.0 : 1.0;
  auto build_bce = [targets](const std::vector<ad::Var>& v) {
    return ad::BceWithLogits(v[0], targets);
  };
  CHECK(MaxRelErr(build_bce, {RandomMatrix(5, 1, &rng, 2.0)}) < 1e-6);

  const std::vector<int> labels{1, 0, 2, 0};
  auto build_ce = [labels](const std::vector<ad::Var>& v) {
    return ad::CrossEntropyRows(v[0], labels, /*ignore_index=*/0);
  };
  CHECK(MaxRelErr(build_ce, {RandomMatrix(4, 3, &rng, 2.0)}) < 1e-6);
}

TEST_CASE("cross entropy ignores pad and matches closed forms") {
  // Uniform logits over C classes -> loss = ln C.
  Matrix logits(2, 82);
  const ad::Var loss = ad::CrossEntropyRows(ad::Constant(logits), {5, 17}, 0);
  CHECK(loss.scalar() == doctest::Approx(std::log(82.0)).epsilon(1e-12));

  // All positions ignored is an error.
  CHECK_THROWS_AS(ad::CrossEntropyRows(ad::Constant(logits), {0, 0}, 0),
                  std::invalid_argument);
}

TEST_CASE("dropout is identity in eval mode and rescales in train mode") {
  Rng rng(15);
  Matrix x(50, 20, 1.0);
  const ad::Var eval_out = ad::Dropout(ad::Constant(x), 0.5, nullptr, false);
  CHECK(BitwiseEqual(eval_out.value(), x));

  Rng drop_rng(16);
  const ad::Var train_out = ad::Dropout(ad::Constant(x), 0.5, &drop_rng, true);
  double mean = 0.0;
  for (double v : train_out.value().raw()) mean += v;
  mean /= static_cast<double>(x.size());
  CHECK(mean == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("backward accumulates into shared leaves") {
  Matrix x(1, 1);
  x.at(0, 0) = 3.0;
  const ad::Var leaf = ad::Leaf(x, true);
  const ad::Var y = ad::Mul(leaf, leaf);  // d/dx x^2 = 2x
  ad::Backward(y);
  CHECK(leaf.grad().at(0, 0) == doctest::Approx(6.0));
  const ad::Var z = ad::Scale(leaf, 4.0);
  ad::Backward(z);
  CHECK(leaf.grad().at(0, 0) == doctest::Approx(10.0));  // 6 + 4
}
