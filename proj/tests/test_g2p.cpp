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

#include "accentts/g2p/g2p.hpp"
#include "common/test_util.hpp"

using namespace accentts;

namespace {

g2p::G2PConfig SmallConfig() {
  g2p::G2PConfig cfg;
  cfg.model_dim = 32;
  cfg.encoder_layers = 2;
  cfg.decoder_layers = 2;
  cfg.heads = 4;
  cfg.ff_dim = 48;
  cfg.dropout = 0.1;
  cfg.grapheme_vocab = 12;
  cfg.phoneme_vocab = 14;
  cfg.accent_table_size = 3;
  cfg.accent_dim = 8;
  cfg.max_decode_len = 24;
  return cfg;
}

lexicon::G2PExample MakeExample(std::vector<int> graphemes, std::vector<int> emissions,
                                int accent) {
  lexicon::G2PExample ex;
  ex.id = "ex";
  ex.graphemes = std::move(graphemes);
  ex.phonemes.push_back(1);  // BOS
  for (int p : emissions) ex.phonemes.push_back(p);
  ex.phonemes.push_back(2);  // EOS
  ex.accent = {accent, "a" + std::to_string(accent)};
  return ex;
}

}  // namespace

TEST_CASE("init is deterministic and matches the configured shapes") {
  const auto cfg = SmallConfig();
  const ParameterStore a = g2p::InitG2p(cfg, 99);
  const ParameterStore b = g2p::InitG2p(cfg, 99);
  CHECK(BitwiseEqual(a, b));
  const ParameterStore c = g2p::InitG2p(cfg, 100);
  CHECK(!BitwiseEqual(a, c));

  // Default configuration: output projection [256 x 82], pre-net projection
  // input width 256 + 32 = 288.
  g2p::G2PConfig full;
  full.grapheme_vocab = 30;
  full.accent_table_size = 5;
  const ParameterStore d = g2p::InitG2p(full, 1);
  CHECK(d.param(g2p::kOutputProjection, "proj.w").rows() == 256);
  CHECK(d.param(g2p::kOutputProjection, "proj.w").cols() == 82);
  CHECK(d.param(g2p::kPrenetProjection, "proj.w").rows() == 288);
  CHECK(d.param(g2p::kPrenetProjection, "proj.w").cols() == 256);
  CHECK(d.param(g2p::kPrenetAccentEmbedding, "table").cols() == 32);
}

TEST_CASE("forward shapes, accent conditioning and errors") {
  const ParameterStore store = g2p::InitG2p(SmallConfig(), 7);
  const std::vector<int> graphemes{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 1};
  const std::vector<int> phon_in{1, 4, 5, 6, 7, 8, 9, 10, 11};  // BOS + 8

  const Matrix logits = g2p::Forward(store, graphemes, phon_in, 0);
  CHECK(logits.rows() == 9);
  CHECK(logits.cols() == 14);

  const Matrix other_accent = g2p::Forward(store, graphemes, phon_in, 1);
  CHECK(!BitwiseEqual(logits, other_accent));

  CHECK_THROWS_AS(g2p::Forward(store, {}, phon_in, 0), std::invalid_argument);
  CHECK_THROWS_AS(g2p::Forward(store, {99}, phon_in, 0), std::invalid_argument);
  CHECK_THROWS_AS(g2p::Forward(store, graphemes, phon_in, 7), std::invalid_argument);
}

TEST_CASE("teacher-forced logits are causal") {
  const ParameterStore store = g2p::InitG2p(SmallConfig(), 21);
  const std::vector<int> graphemes{2, 3, 4, 5, 6};
  std::vector<int> phon_in{1, 4, 5, 6, 7, 8};
  const Matrix base = g2p::Forward(store, graphemes, phon_in, 0);
  // Perturb suffix positions; logits at earlier steps must not move.
  for (std::size_t flip = 2; flip < phon_in.size(); ++flip) {
    std::vector<int> perturbed = phon_in;
    perturbed[flip] = perturbed[flip] == 9 ? 10 : 9;
    const Matrix out = g2p::Forward(store, graphemes, perturbed, 0);
    for (std::size_t t = 0; t < flip; ++t) {
      for (int c = 0; c < base.cols(); ++c) {
        CHECK(out.at(static_cast<int>(t), c) ==
              doctest::Approx(base.at(static_cast<int>(t), c)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("g2p_loss closed forms") {
  // Uniform logits over the 82-way default output.
  Matrix uniform(5, 82);
  CHECK(g2p::Loss(uniform, {5, 6, 7, 8, 9}, 0) ==
        doctest::Approx(std::log(82.0)).epsilon(1e-12));

  // Margin on the correct class drives the loss to zero.
  double prev = 1e9;
  for (double margin : {2.0, 6.0, 12.0}) {
    Matrix logits(2, 5);
    logits.at(0, 3) = margin;
    logits.at(1, 1) = margin;
    const double loss = g2p::Loss(logits, {3, 1}, 0);
    CHECK(loss < prev);
    prev = loss;
  }
  CHECK(prev < 1e-4);

  // Hand-computed two-token, three-class case.
  Matrix logits(2, 3);
  logits.at(0, 0) = 1.0;
  logits.at(0, 1) = 2.0;
  logits.at(0, 2) = 0.5;
  logits.at(1, 0) = -1.0;
  logits.at(1, 1) = 0.0;
  logits.at(1, 2) = 1.5;
  auto nll = [](double a, double b, double c, int y) {
    const double z = std::exp(a) + std::exp(b) + std::exp(c);
    const double p = y == 0 ? std::exp(a) : (y == 1 ? std::exp(b) : std::exp(c));
    return -std::log(p / z);
  };
  const double expected =
      0.5 * (nll(1.0, 2.0, 0.5, 1) + nll(-1.0, 0.0, 1.5, 2));
  CHECK(g2p::Loss(logits, {1, 2}, 0) == doctest::Approx(expected).epsilon(1e-12));

  // PAD-only targets are an error.
  CHECK_THROWS_AS(g2p::Loss(logits, {0, 0}, 0), std::invalid_argument);
}

TEST_CASE("training defaults") {
  const g2p::TrainHyper hyper;
  CHECK(hyper.lr == doctest::Approx(5e-4));
  CHECK(hyper.batch == 128);
  CHECK(hyper.epochs == 100);
  const g2p::G2PConfig cfg;
  CHECK(cfg.model_dim == 256);
  CHECK(cfg.encoder_layers == 3);
  CHECK(cfg.decoder_layers == 3);
  CHECK(cfg.heads == 8);
  CHECK(cfg.ff_dim == 512);
  CHECK(cfg.dropout == doctest::Approx(0.1));
  CHECK(cfg.phoneme_vocab == 82);
  CHECK(cfg.accent_dim == 32);
}

TEST_CASE("trainable masks partition the groups") {
  const auto pretrain = g2p::TrainableMask("pretrain");
  const auto finetune = g2p::TrainableMask("finetune");
  CHECK(pretrain.size() == 7);
  CHECK(finetune ==
        std::set<std::string>{g2p::kPrenetAccentEmbedding, g2p::kPrenetPhonemeEmbedding,
                              g2p::kPrenetProjection, g2p::kOutputProjection});
  CHECK(finetune.count(g2p::kEncoderStack) == 0);
  for (const auto& g : finetune) CHECK(pretrain.count(g));
  CHECK_THROWS_AS(g2p::TrainableMask("warmup"), std::invalid_argument);

  ParameterStore store = g2p::InitG2p(SmallConfig(), 3);
  store.apply_trainable_mask(finetune);
  const auto frozen = store.frozen_groups();
  CHECK(frozen == std::set<std::string>{g2p::kGraphemeEmbedding, g2p::kEncoderStack,
                                        g2p::kDecoderStack});
}

TEST_CASE("decode is deterministic and respects max_len") {
  const ParameterStore store = g2p::InitG2p(SmallConfig(), 11);
  const std::vector<int> graphemes{2, 3, 4};
  const auto a = g2p::Decode(store, graphemes, 0, 10);
  const auto b = g2p::Decode(store, graphemes, 0, 10);
  CHECK(a.phonemes == b.phonemes);
  CHECK(a.truncated == b.truncated);
  CHECK(a.phonemes.size() <= 10);
}

TEST_CASE("bottleneck shapes, determinism and accent sensitivity") {
  const ParameterStore store = g2p::InitG2p(SmallConfig(), 13);
  const std::vector<int> graphemes{2, 3, 4, 5};
  // Framed sequence of length 10 -> 9 teacher steps.
  const std::vector<int> framed{1, 4, 5, 6, 7, 8, 9, 10, 11, 2};
  const auto bn = g2p::ExtractBottleneck(store, graphemes, 0, framed);
  CHECK(bn.features.rows() == 9);
  CHECK(bn.features.cols() == 32);
  CHECK(bn.features.all_finite());

  const auto again = g2p::ExtractBottleneck(store, graphemes, 0, framed);
  CHECK(BitwiseEqual(bn.features, again.features));

  const auto other = g2p::ExtractBottleneck(store, graphemes, 1, framed);
  CHECK(!BitwiseEqual(bn.features, other.features));

  // Inference mode: rows equal decode length + 1 (the EOS step).
  const auto decoded = g2p::Decode(store, graphemes, 0, -1);
  const auto free_run = g2p::ExtractBottleneck(store, graphemes, 0, std::nullopt);
  if (!decoded.truncated) {
    CHECK(free_run.features.rows() ==
          static_cast<int>(decoded.phonemes.size()) + 1);
  }
}

TEST_CASE("analytic gradients match finite differences (output projection)") {
  g2p::G2PConfig cfg = SmallConfig();
  cfg.model_dim = 16;
  cfg.heads = 2;
  cfg.ff_dim = 24;
  cfg.grapheme_vocab = 8;
  cfg.phoneme_vocab = 10;
  cfg.accent_table_size = 2;
  cfg.accent_dim = 4;
  const ParameterStore store = g2p::InitG2p(cfg, 5);
  const auto ex = MakeExample({1, 2, 3, 4, 5}, {4, 5, 6, 7}, 1);

  const auto [loss, grads] = g2p::LossAndGradients(store, ex);
  CHECK(loss > 0.0);
  GradientBag proj_only;
  for (const auto& [key, grad] : grads) {
    if (key.rfind(std::string(g2p::kOutputProjection) + "/", 0) == 0) proj_only[key] = grad;
  }
  REQUIRE(proj_only.size() == 2);
  const auto report = testutil::CheckGradients(
      store,
      [&](const ParameterStore& s) {
        const std::vector<int> phon_in(ex.phonemes.begin(), ex.phonemes.end() - 1);
        const std::vector<int> targets(ex.phonemes.begin() + 1, ex.phonemes.end());
        return g2p::Loss(g2p::Forward(s, ex.graphemes, phon_in, ex.accent.id), targets, 0);
      },
      proj_only);
  CHECK(report.max_group_rel_err < 1e-4);
}

TEST_CASE("training memorizes a toy pair and freezes masked groups") {
  g2p::G2PConfig cfg = SmallConfig();
  cfg.dropout = 0.0;
  ParameterStore store = g2p::InitG2p(cfg, 31);

  // One-pair corpus: "ab" -> [p4, p5].
  const auto ex = MakeExample({2, 3}, {4, 5}, 0);
  g2p::TrainHyper hyper;
  hyper.lr = 5e-3;
  hyper.batch = 4;
  hyper.epochs = 80;
  hyper.seed = 7;
  const auto history = g2p::Train(&store, {ex}, "pretrain", hyper, {});
  CHECK(history.epochs.size() == 80);
  CHECK(history.epochs.back().train_loss < history.epochs.front().train_loss);

  const auto decoded = g2p::Decode(store, ex.graphemes, 0, 8);
  CHECK(decoded.phonemes == std::vector<int>{4, 5});

  // Fine-tuning must leave frozen groups bitwise untouched.
  ParameterStore before = store;
  g2p::TrainHyper ft = hyper;
  ft.epochs = 3;
  g2p::Train(&store, {ex}, "finetune", ft, {});
  CHECK(GroupBitwiseEqual(before, store, g2p::kGraphemeEmbedding));
  CHECK(GroupBitwiseEqual(before, store, g2p::kEncoderStack));
  CHECK(GroupBitwiseEqual(before, store, g2p::kDecoderStack));

  CHECK_THROWS_AS(g2p::Train(&store, {}, "pretrain", hyper, {}), std::invalid_argument);
}

TEST_CASE("accent swap flips the transcription of a probe word") {
  g2p::G2PConfig cfg = SmallConfig();
  cfg.dropout = 0.0;
  cfg.grapheme_vocab = 8;
  cfg.phoneme_vocab = 12;
  cfg.accent_table_size = 2;
  ParameterStore store = g2p::InitG2p(cfg, 77);

  // Two accents with disjoint transcriptions of the probe "grapheme 2,3":
  // accent 0 says [5, 6], accent 1 says [5, 7]. Filler words anchor the
  // rest of the mapping.
  std::vector<lexicon::G2PExample> corpus;
  corpus.push_back(MakeExample({2, 3}, {5, 6}, 0));
  corpus.push_back(MakeExample({2, 3}, {5, 7}, 1));
  corpus.push_back(MakeExample({4, 5}, {8, 9}, 0));
  corpus.push_back(MakeExample({4, 5}, {8, 9}, 1));
  corpus.push_back(MakeExample({6, 7}, {10, 11}, 0));
  corpus.push_back(MakeExample({6, 7}, {10, 11}, 1));

  g2p::TrainHyper hyper;
  hyper.lr = 4e-3;
  hyper.batch = 6;
  hyper.epochs = 150;
  hyper.seed = 13;
  g2p::Train(&store, corpus, "pretrain", hyper, {});

  const auto under_a = g2p::Decode(store, {2, 3}, 0, 8);
  const auto under_b = g2p::Decode(store, {2, 3}, 1, 8);
  CHECK(under_a.phonemes == std::vector<int>{5, 6});
  CHECK(under_b.phonemes == std::vector<int>{5, 7});
}

TEST_CASE("checkpoint round trip is bit exact") {
  const std::string dir = testutil::TempDir("g2p_ckpt");
  ParameterStore store = g2p::InitG2p(SmallConfig(), 17);
  store.history.push_back("g2p stage=pretrain epoch=1 train=1.0 val=1.1");
  store.Save(dir);
  const ParameterStore back = ParameterStore::Load(dir);
  CHECK(BitwiseEqual(store, back));
  CHECK(back.model_kind == "g2p");
  CHECK(back.config_int("model_dim") == 32);
  REQUIRE(back.history.size() == 1);
  CHECK(back.history[0] == store.history[0]);

  // Forward passes agree bit for bit after reload.
  const std::vector<int> graphemes{2, 3, 4};
  const std::vector<int> phon_in{1, 4, 5};
  CHECK(BitwiseEqual(g2p::Forward(store, graphemes, phon_in, 0),
                     g2p::Forward(back, graphemes, phon_in, 0)));
}
