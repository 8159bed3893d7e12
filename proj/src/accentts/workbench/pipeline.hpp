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

#ifndef ACCENTTS_WORKBENCH_PIPELINE_HPP_
#define ACCENTTS_WORKBENCH_PIPELINE_HPP_

#include <map>
#include <string>
#include <vector>

#include "accentts/workbench/config.hpp"

namespace accentts::workbench {

// One pipeline run. `summary` mirrors what lands in <out>/report.json.
struct StageReport {
  std::string stage;
  std::string out_dir;
  std::map<std::string, double> metrics;   // aggregate metric means
  std::map<std::string, std::string> paths;  // artifacts written
};

// Stages: make-toy-corpus, lexicon-stats, pretrain-g2p, finetune-g2p,
// eval-g2p, pretrain-tts, finetune-tts, synthesize, evaluate.
// Throws std::invalid_argument on configuration/validation problems and
// std::runtime_error on runtime failures.
StageReport RunPipeline(const std::string& stage, const Config& cfg);

}  // namespace accentts::workbench

#endif  // ACCENTTS_WORKBENCH_PIPELINE_HPP_
