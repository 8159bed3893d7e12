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

#include "accentts/core/param_store.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "accentts/core/array_io.hpp"

namespace accentts {

namespace fs = std::filesystem;

namespace {
constexpr const char* kCheckpointVersion = "accentts-checkpoint-v1";

void CheckNameToken(const std::string& s, const char* what) {
  if (s.empty() || s.find_first_of(" \t\n") != std::string::npos) {
    throw std::invalid_argument(std::string(what) + " must be a non-empty token: '" + s + "'");
  }
}
}  // namespace

const std::string& ParameterStore::config(const std::string& key) const {
  auto it = config_.find(key);
  if (it == config_.end()) throw std::invalid_argument("missing config key: " + key);
  return it->second;
}

int ParameterStore::config_int(const std::string& key) const {
  return std::stoi(config(key));
}

double ParameterStore::config_double(const std::string& key) const {
  return std::stod(config(key));
}

ParamGroup& ParameterStore::add_group(const std::string& name) {
  CheckNameToken(name, "group name");
  if (index_.count(name)) throw std::invalid_argument("duplicate group: " + name);
  index_[name] = static_cast<int>(groups_.size());
  groups_.push_back(ParamGroup{name, true, {}});
  return groups_.back();
}

Matrix& ParameterStore::add_param(const std::string& group, const std::string& name,
                                  int rows, int cols) {
  CheckNameToken(name, "param name");
  ParamGroup& g = this->group(group);
  for (const auto& e : g.entries) {
    if (e.name == name) throw std::invalid_argument("duplicate param: " + group + "/" + name);
  }
  g.entries.push_back(ParamEntry{name, Matrix(rows, cols)});
  return g.entries.back().value;
}

bool ParameterStore::has_group(const std::string& name) const { return index_.count(name) > 0; }

int ParameterStore::group_index(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("no such group: " + name);
  return it->second;
}

const ParamGroup& ParameterStore::group(const std::string& name) const {
  return groups_[group_index(name)];
}

ParamGroup& ParameterStore::group(const std::string& name) {
  return groups_[group_index(name)];
}

std::vector<std::string> ParameterStore::group_names() const {
  std::vector<std::string> names;
  names.reserve(groups_.size());
  for (const auto& g : groups_) names.push_back(g.name);
  return names;
}

const Matrix& ParameterStore::param(const std::string& group, const std::string& name) const {
  for (const auto& e : this->group(group).entries) {
    if (e.name == name) return e.value;
  }
  throw std::invalid_argument("no such param: " + group + "/" + name);
}

Matrix& ParameterStore::mutable_param(const std::string& group, const std::string& name) {
  for (auto& e : this->group(group).entries) {
    if (e.name == name) return e.value;
  }
  throw std::invalid_argument("no such param: " + group + "/" + name);
}

void ParameterStore::set_trainable(const std::string& group, bool trainable) {
  this->group(group).trainable = trainable;
}

bool ParameterStore::trainable(const std::string& group) const {
  return this->group(group).trainable;
}

void ParameterStore::apply_trainable_mask(const std::set<std::string>& trainable_groups) {
  for (const std::string& name : trainable_groups) {
    if (!has_group(name)) throw std::invalid_argument("mask names unknown group: " + name);
  }
  for (auto& g : groups_) g.trainable = trainable_groups.count(g.name) > 0;
}

std::set<std::string> ParameterStore::trainable_groups() const {
  std::set<std::string> out;
  for (const auto& g : groups_) {
    if (g.trainable) out.insert(g.name);
  }
  return out;
}

std::set<std::string> ParameterStore::frozen_groups() const {
  std::set<std::string> out;
  for (const auto& g : groups_) {
    if (!g.trainable) out.insert(g.name);
  }
  return out;
}

std::size_t ParameterStore::total_params() const {
  std::size_t n = 0;
  for (const auto& g : groups_) {
    for (const auto& e : g.entries) n += e.value.size();
  }
  return n;
}

void ParameterStore::snap_all_to_float32() {
  for (auto& g : groups_) {
    for (auto& e : g.entries) SnapToFloat32(&e.value);
  }
}

void ParameterStore::Save(const std::string& dir) const {
  fs::create_directories(dir);
  std::ofstream meta(fs::path(dir) / "meta");
  if (!meta) throw std::runtime_error("cannot write checkpoint meta in " + dir);
  meta << kCheckpointVersion << "\n";
  meta << "model " << model_kind << "\n";
  for (const auto& [k, v] : config_) meta << "config " << k << " " << v << "\n";
  for (const auto& g : groups_) {
    meta << "group " << g.name << " " << (g.trainable ? 1 : 0) << "\n";
    for (const auto& e : g.entries) {
      meta << "array " << g.name << " " << e.name << " " << e.value.rows() << " "
           << e.value.cols() << "\n";
    }
  }
  for (const auto& h : history) meta << "history " << h << "\n";
  meta.close();

  for (const auto& g : groups_) {
    std::vector<const Matrix*> arrays;
    arrays.reserve(g.entries.size());
    for (const auto& e : g.entries) arrays.push_back(&e.value);
    WriteF32Raw((fs::path(dir) / (g.name + ".f32")).string(), arrays);
  }
}

ParameterStore ParameterStore::Load(const std::string& dir) {
  std::ifstream meta(fs::path(dir) / "meta");
  if (!meta) throw std::runtime_error("no checkpoint meta in " + dir);
  std::string line;
  if (!std::getline(meta, line) || line != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version in " + dir);
  }
  ParameterStore store;
  while (std::getline(meta, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "model") {
      ls >> store.model_kind;
    } else if (tag == "config") {
      std::string k, v;
      ls >> k >> v;
      store.set_config(k, v);
    } else if (tag == "group") {
      std::string name;
      int trainable = 1;
      ls >> name >> trainable;
      store.add_group(name).trainable = trainable != 0;
    } else if (tag == "array") {
      std::string gname, pname;
      int rows = 0, cols = 0;
      ls >> gname >> pname >> rows >> cols;
      if (!ls || rows < 0 || cols < 0) throw std::runtime_error("bad array line: " + line);
      store.add_param(gname, pname, rows, cols);
    } else if (tag == "history") {
      std::string rest;
      std::getline(ls, rest);
      if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
      store.history.push_back(rest);
    } else {
      throw std::runtime_error("unknown meta line: " + line);
    }
  }

  for (auto& g : store.groups_) {
    const std::string path = (fs::path(dir) / (g.name + ".f32")).string();
    std::vector<float> buf = ReadF32Raw(path);
    std::size_t expected = 0;
    for (const auto& e : g.entries) expected += e.value.size();
    if (buf.size() != expected) {
      throw std::runtime_error("group '" + g.name + "' array file has " +
                               std::to_string(buf.size()) + " floats, meta expects " +
                               std::to_string(expected));
    }
    std::size_t off = 0;
    for (auto& e : g.entries) {
      for (std::size_t i = 0; i < e.value.size(); ++i) {
        e.value.raw()[i] = static_cast<double>(buf[off + i]);
      }
      off += e.value.size();
    }
  }
  return store;
}

bool BitwiseEqual(const ParameterStore& a, const ParameterStore& b) {
  if (a.groups().size() != b.groups().size()) return false;
  for (std::size_t i = 0; i < a.groups().size(); ++i) {
    const auto& ga = a.groups()[i];
    const auto& gb = b.groups()[i];
    if (ga.name != gb.name || ga.entries.size() != gb.entries.size()) return false;
    for (std::size_t j = 0; j < ga.entries.size(); ++j) {
      if (ga.entries[j].name != gb.entries[j].name) return false;
      if (!accentts::BitwiseEqual(ga.entries[j].value, gb.entries[j].value)) return false;
    }
  }
  return true;
}

bool GroupBitwiseEqual(const ParameterStore& a, const ParameterStore& b,
                       const std::string& group) {
  const auto& ga = a.group(group);
  const auto& gb = b.group(group);
  if (ga.entries.size() != gb.entries.size()) return false;
  for (std::size_t j = 0; j < ga.entries.size(); ++j) {
    if (ga.entries[j].name != gb.entries[j].name) return false;
    if (!accentts::BitwiseEqual(ga.entries[j].value, gb.entries[j].value)) return false;
  }
  return true;
}

ad::Var ParamGraph::operator()(const std::string& group, const std::string& name) {
  const std::string key = group + "/" + name;
  auto it = leaves_.find(key);
  if (it != leaves_.end()) return it->second;
  const bool rg = training_ && store_->trainable(group);
  ad::Var leaf = ad::Leaf(store_->param(group, name), rg);
  leaves_.emplace(key, leaf);
  return leaf;
}

void ParamGraph::CollectGrads(GradientBag* bag) const {
  for (const auto& [key, var] : leaves_) {
    if (!var.node()->requires_grad || var.node()->grad.empty()) continue;
    auto it = bag->find(key);
    if (it == bag->end()) {
      (*bag)[key] = var.node()->grad;
    } else {
      Matrix& acc = it->second;
      for (std::size_t i = 0; i < acc.size(); ++i) acc.raw()[i] += var.node()->grad.raw()[i];
    }
  }
}

}  // namespace accentts
