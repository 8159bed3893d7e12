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

#ifndef ACCENTTS_WORKBENCH_CONFIG_HPP_
#define ACCENTTS_WORKBENCH_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace accentts::workbench {

// Flat key-value run configuration. File syntax: one `key = value` per
// line, `#` comments, and `include <path>` (relative to the including
// file). Later assignments win, so CLI overrides are applied last.
class Config {
 public:
  Config() = default;

  static Config FromFile(const std::string& path);
  void MergeFile(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  const std::string& str(const std::string& key) const;
  std::string str_or(const std::string& key, const std::string& fallback) const;
  int int_or(const std::string& key, int fallback) const;
  double dbl_or(const std::string& key, double fallback) const;
  bool bool_or(const std::string& key, bool fallback) const;
  std::uint64_t seed() const;  // throws when missing

  std::vector<std::string> list_or(const std::string& key,
                                   const std::vector<std::string>& fallback) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace accentts::workbench

#endif  // ACCENTTS_WORKBENCH_CONFIG_HPP_
