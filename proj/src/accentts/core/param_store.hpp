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

#ifndef ACCENTTS_CORE_PARAM_STORE_HPP_
#define ACCENTTS_CORE_PARAM_STORE_HPP_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "accentts/core/autograd.hpp"
#include "accentts/core/matrix.hpp"

namespace accentts {

struct ParamEntry {
  std::string name;
  Matrix value;
};

struct ParamGroup {
  std::string name;
  bool trainable = true;
  std::vector<ParamEntry> entries;
};

// Named, grouped trainable arrays with per-group freeze flags. Values are
// kept in the float32-representable subset of double (updates are snapped),
// so checkpoints written as raw float32 round-trip bit-exactly.
class ParameterStore {
 public:
  std::string model_kind;

  void set_config(const std::string& key, const std::string& value) { config_[key] = value; }
  bool has_config(const std::string& key) const { return config_.count(key) > 0; }
  const std::string& config(const std::string& key) const;
  int config_int(const std::string& key) const;
  double config_double(const std::string& key) const;
  const std::map<std::string, std::string>& config_map() const { return config_; }

  ParamGroup& add_group(const std::string& name);
  Matrix& add_param(const std::string& group, const std::string& name, int rows, int cols);

  bool has_group(const std::string& name) const;
  const ParamGroup& group(const std::string& name) const;
  ParamGroup& group(const std::string& name);
  const std::vector<ParamGroup>& groups() const { return groups_; }
  std::vector<ParamGroup>& groups() { return groups_; }
  std::vector<std::string> group_names() const;

  const Matrix& param(const std::string& group, const std::string& name) const;
  Matrix& mutable_param(const std::string& group, const std::string& name);

  void set_trainable(const std::string& group, bool trainable);
  bool trainable(const std::string& group) const;
  // Marks exactly the named groups trainable, everything else frozen.
  void apply_trainable_mask(const std::set<std::string>& trainable_groups);
  std::set<std::string> trainable_groups() const;
  std::set<std::string> frozen_groups() const;

  std::size_t total_params() const;
  void snap_all_to_float32();

  std::vector<std::string> history;

  // Checkpoint directory: a `meta` text file (version, model kind, config,
  // group layout, history) plus one raw little-endian float32 file per group.
  void Save(const std::string& dir) const;
  static ParameterStore Load(const std::string& dir);

 private:
  int group_index(const std::string& name) const;

  std::map<std::string, std::string> config_;
  std::vector<ParamGroup> groups_;
  std::map<std::string, int> index_;
};

bool BitwiseEqual(const ParameterStore& a, const ParameterStore& b);
bool GroupBitwiseEqual(const ParameterStore& a, const ParameterStore& b,
                       const std::string& group);

// Gradients keyed "group/param".
using GradientBag = std::map<std::string, Matrix>;

// Binds a ParameterStore to autograd leaves for one computation graph.
// Leaves require gradients only when `training` is set and the group is
// trainable; repeated lookups share the same leaf so gradients accumulate
// across a batch.
class ParamGraph {
 public:
  ParamGraph(const ParameterStore& store, bool training)
      : store_(&store), training_(training) {}

  ad::Var operator()(const std::string& group, const std::string& name);

  bool training() const { return training_; }
  void CollectGrads(GradientBag* bag) const;

 private:
  const ParameterStore* store_;
  bool training_;
  std::map<std::string, ad::Var> leaves_;
};

}  // namespace accentts

#endif  // ACCENTTS_CORE_PARAM_STORE_HPP_
