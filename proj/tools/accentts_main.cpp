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

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "accentts/workbench/config.hpp"
#include "accentts/workbench/pipeline.hpp"

namespace {

struct StageArgs {
  std::string config_path;
  std::string seed;
  std::string out;
  std::vector<std::string> options;  // key=value overrides
  std::map<std::string, std::string> named;
};

accentts::workbench::Config BuildConfig(const StageArgs& args) {
  accentts::workbench::Config cfg;
  if (!args.config_path.empty()) cfg.MergeFile(args.config_path);
  for (const auto& [key, value] : args.named) {
    if (!value.empty()) cfg.set(key, value);
  }
  for (const auto& opt : args.options) {
    const auto eq = opt.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("--opt expects key=value, got '" + opt + "'");
    }
    cfg.set(opt.substr(0, eq), opt.substr(eq + 1));
  }
  if (!args.seed.empty()) cfg.set("seed", args.seed);
  if (!args.out.empty()) cfg.set("out", args.out);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"accentts: accented text-to-speech workbench"};
  app.require_subcommand(1);

  const std::vector<std::string> stages = {
      "make-toy-corpus", "lexicon-stats", "pretrain-g2p", "finetune-g2p", "eval-g2p",
      "pretrain-tts",    "finetune-tts",  "synthesize",   "evaluate"};

  std::map<std::string, StageArgs> stage_args;
  for (const auto& stage : stages) {
    auto* sub = app.add_subcommand(stage, "run the " + stage + " stage");
    StageArgs& args = stage_args[stage];
    sub->add_option("--config", args.config_path, "key = value config file");
    sub->add_option("--seed", args.seed, "run seed (mandatory for stochastic stages)");
    sub->add_option("--out", args.out, "output directory");
    sub->add_option("--opt", args.options, "extra key=value override")->take_all();
    // Common conveniences; anything else goes through --opt.
    sub->add_option("--corpus", args.named["corpus"], "toy corpus directory");
    sub->add_option("--accent", args.named["accent"], "accent name");
    sub->add_option("--accents", args.named["accents"], "comma-separated accent names");
    sub->add_option("--init", args.named["init"], "initialization checkpoint");
    sub->add_option("--checkpoint", args.named["checkpoint"], "checkpoint to evaluate");
    sub->add_option("--g2p", args.named["g2p"], "g2p checkpoint directory");
    sub->add_option("--tts", args.named["tts"], "acoustic checkpoint directory");
    sub->add_option("--epochs", args.named["epochs"], "training epochs");
    sub->add_option("--text", args.named["text"], "inline text to synthesize");
    sub->add_option("--gen-manifest", args.named["gen_manifest"], "generated side manifest");
    sub->add_option("--gen-dir", args.named["gen_dir"], "generated wav directory");
    sub->add_option("--gen-align-dir", args.named["gen_align_dir"],
                    "generated alignment directory");
    sub->add_option("--gen-post-dir", args.named["gen_post_dir"],
                    "generated posteriorgram directory");
    sub->add_option("--lexicon-a", args.named["lexicon_a"], "reference lexicon TSV");
    sub->add_option("--lexicon-b", args.named["lexicon_b"], "comparison lexicon TSV");
    sub->add_option("--inventory", args.named["inventory"], "phoneme inventory TSV");
  }

  CLI11_PARSE(app, argc, argv);

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    const auto cfg = BuildConfig(stage_args[stage]);
    const auto report = accentts::workbench::RunPipeline(stage, cfg);
    std::cout << "stage " << report.stage << " done";
    if (!report.out_dir.empty()) std::cout << " -> " << report.out_dir;
    std::cout << "\n";
    for (const auto& [k, v] : report.metrics) std::cout << "  " << k << " = " << v << "\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
