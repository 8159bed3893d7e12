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

#ifndef ACCENTTS_G2P_G2P_HPP_
#define ACCENTTS_G2P_G2P_HPP_

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "accentts/core/adam.hpp"
#include "accentts/core/param_store.hpp"
#include "accentts/lexicon/lexicon.hpp"

namespace accentts::g2p {

// Parameter group names; the fine-tuning mask addresses these.
inline constexpr const char* kGraphemeEmbedding = "grapheme_embedding";
inline constexpr const char* kEncoderStack = "encoder_stack";
inline constexpr const char* kPrenetPhonemeEmbedding = "prenet_phoneme_embedding";
inline constexpr const char* kPrenetAccentEmbedding = "prenet_accent_embedding";
inline constexpr const char* kPrenetProjection = "prenet_projection";
inline constexpr const char* kDecoderStack = "decoder_stack";
inline constexpr const char* kOutputProjection = "output_projection";

struct G2PConfig {
  int model_dim = 256;
  int encoder_layers = 3;
  int decoder_layers = 3;
  int heads = 8;
  int ff_dim = 512;
  double dropout = 0.1;
  int grapheme_vocab = 0;     // set from the character vocabulary
  int phoneme_vocab = 82;     // matches the inventory size
  int accent_table_size = 0;  // rows exist for every accent up front
  int accent_dim = 32;
  int max_decode_len = 200;
  int pad_index = 0;
  int bos_index = 1;
  int eos_index = 2;
  int wb_index = 3;

  void Validate() const;
  void ToStore(ParameterStore* store) const;
  static G2PConfig FromStore(const ParameterStore& store);
};

// Deterministic initialization: uniform scaled by fan-in for matrices,
// zeros for biases, ones for normalization gains. All groups trainable.
ParameterStore InitG2p(const G2PConfig& config, std::uint64_t seed);

// Teacher-forced forward; returns unnormalized scores [len(phonemes_in) x V].
Matrix Forward(const ParameterStore& store, const std::vector<int>& graphemes,
               const std::vector<int>& phonemes_in, int accent_id);

// Mean token cross-entropy excluding PAD positions.
double Loss(const Matrix& logits, const std::vector<int>& targets, int pad_index);

struct DecodeResult {
  std::vector<int> phonemes;  // without BOS/EOS
  bool truncated = false;
};

// Greedy autoregressive decode from BOS; stops at EOS or max_len.
DecodeResult Decode(const ParameterStore& store, const std::vector<int>& graphemes,
                    int accent_id, int max_len = -1);

// Final decoder-layer hidden states (pre output-projection), one row per
// emitted step. `framed_phonemes` is the BOS...EOS target sequence for the
// teacher-forced path; when absent the model decodes greedily first.
struct BottleneckResult {
  Matrix features;  // [steps x model_dim]
  std::vector<int> phonemes;
  bool truncated = false;
};
BottleneckResult ExtractBottleneck(const ParameterStore& store,
                                   const std::vector<int>& graphemes, int accent_id,
                                   const std::optional<std::vector<int>>& framed_phonemes);

// pretrain -> every group; finetune -> pre-net embeddings, pre-net
// projection and the output projection only.
std::set<std::string> TrainableMask(const std::string& stage);

struct TrainHyper {
  double lr = 5e-4;
  int batch = 128;
  int epochs = 100;
  std::uint64_t seed = 0;
};

struct EpochStats {
  int epoch;
  double train_loss;
  double val_loss;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  int best_epoch = -1;
  double best_val_loss = 0.0;
};

// Teacher-forced training with the stage mask applied; returns the
// checkpoint with the lowest validation loss. An empty validation corpus
// falls back to validating on the training corpus.
TrainHistory Train(ParameterStore* store, const std::vector<lexicon::G2PExample>& corpus,
                   const std::string& stage, const TrainHyper& hyper,
                   const std::vector<lexicon::G2PExample>& validation);

// Mean per-example token cross-entropy in eval mode.
double EvalLoss(const ParameterStore& store, const std::vector<lexicon::G2PExample>& corpus);

// Loss plus analytic gradients for one example with dropout disabled;
// gradients cover the currently trainable groups.
std::pair<double, GradientBag> LossAndGradients(const ParameterStore& store,
                                                const lexicon::G2PExample& example);

}  // namespace accentts::g2p

#endif  // ACCENTTS_G2P_G2P_HPP_
