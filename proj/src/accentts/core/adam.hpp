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

#ifndef ACCENTTS_CORE_ADAM_HPP_
#define ACCENTTS_CORE_ADAM_HPP_

#include <map>
#include <string>

#include "accentts/core/param_store.hpp"

namespace accentts {

// Adam with the usual defaults. State is keyed by "group/param"; frozen
// groups are never touched. Updated parameters are snapped back to the
// float32-representable subset (see ParameterStore).
class AdamOptimizer {
 public:
  explicit AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

  void Step(ParameterStore* store, const GradientBag& grads);

 private:
  struct Moments {
    Matrix m;
    Matrix v;
  };

  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  long step_ = 0;
  std::map<std::string, Moments> state_;
};

}  // namespace accentts

#endif  // ACCENTTS_CORE_ADAM_HPP_
