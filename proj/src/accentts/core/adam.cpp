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

#include "accentts/core/adam.hpp"

#include <cmath>

namespace accentts {

void AdamOptimizer::Step(ParameterStore* store, const GradientBag& grads) {
  ++step_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (const auto& [key, grad] : grads) {
    const auto slash = key.find('/');
    if (slash == std::string::npos) throw std::invalid_argument("bad grad key: " + key);
    const std::string group = key.substr(0, slash);
    const std::string name = key.substr(slash + 1);
    if (!store->trainable(group)) continue;
    Matrix& param = store->mutable_param(group, name);
    if (!param.same_shape(grad)) {
      throw std::invalid_argument("gradient shape mismatch for " + key);
    }
    auto& mom = state_[key];
    if (mom.m.empty()) {
      mom.m = Matrix(param.rows(), param.cols());
      mom.v = Matrix(param.rows(), param.cols());
    }
    for (std::size_t i = 0; i < param.size(); ++i) {
      const double g = grad.raw()[i];
      mom.m.raw()[i] = beta1_ * mom.m.raw()[i] + (1.0 - beta1_) * g;
      mom.v.raw()[i] = beta2_ * mom.v.raw()[i] + (1.0 - beta2_) * g * g;
      const double mhat = mom.m.raw()[i] / bc1;
      const double vhat = mom.v.raw()[i] / bc2;
      param.raw()[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
    SnapToFloat32(&param);
  }
}

}  // namespace accentts
