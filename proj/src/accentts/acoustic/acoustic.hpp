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

#ifndef ACCENTTS_ACOUSTIC_ACOUSTIC_HPP_
#define ACCENTTS_ACOUSTIC_ACOUSTIC_HPP_

#include <set>
#include <string>
#include <vector>

#include "accentts/core/adam.hpp"
#include "accentts/core/param_store.hpp"
#include "accentts/lexicon/lexicon.hpp"

namespace accentts::acoustic {

inline constexpr const char* kTextEncoder = "text_encoder";
inline constexpr const char* kSpeakerProjection = "speaker_projection";
inline constexpr const char* kPitchPredictor = "pitch_predictor";
inline constexpr const char* kPitchEmbedding = "pitch_embedding";
inline constexpr const char* kDurationPredictor = "duration_predictor";
inline constexpr const char* kDurationProjection = "duration_projection";
inline constexpr const char* kAttention = "attention";
inline constexpr const char* kDecoder = "decoder";
inline constexpr const char* kPostnet = "postnet";

struct AcousticConfig {
  int bottleneck_dim = 256;  // G2P decoder width
  int enc_dim = 512;         // input projection + conv channels
  int enc_convs = 3;
  int enc_kernel = 5;
  int birnn_dim = 512;  // BiLSTM output width; the memory width
  int dec_rnn_dim = 1024;
  int prenet_dim = 256;
  int mel_bins = 80;
  int postnet_convs = 5;  // 4 hidden + 1 output
  int postnet_kernel = 5;
  int postnet_channels = 512;
  int attn_dim = 128;
  int attn_loc_kernel = 31;
  int attn_loc_channels = 32;
  int pred_dim1 = 512;  // pitch/duration predictor conv channels
  int pred_dim2 = 256;
  int pred_kernel = 3;
  double pred_dropout = 0.5;
  double prenet_dropout = 0.5;
  double rnn_dropout = 0.1;
  int pitch_bins = 256;
  int pitch_embed_dim = 512;  // must equal birnn_dim
  int speaker_dim = 256;
  double pitch_clip = 4.0;  // quantization covers [-clip, clip]
  double stop_threshold = 0.5;
  int max_frames_factor = 10;  // inference cap: factor x phoneme count

  void Validate() const;
  void ToStore(ParameterStore* store) const;
  static AcousticConfig FromStore(const ParameterStore& store);
};

ParameterStore InitAcoustic(const AcousticConfig& config, std::uint64_t seed);

struct EncodeResult {
  Matrix enc_out;  // [T x birnn_dim]
  Matrix enc_spk;  // enc_out + broadcast speaker projection
};
EncodeResult EncodeText(const ParameterStore& store, const Matrix& bottleneck,
                        const Matrix& speaker);

// One normalized-F0 / log-duration scalar per phoneme position (eval mode).
std::vector<double> PredictPitch(const ParameterStore& store, const Matrix& enc_spk);
std::vector<double> PredictDuration(const ParameterStore& store, const Matrix& enc_spk);

// Uniform binning of [-clip, clip]; out-of-range values clamp to edge bins.
std::vector<int> QuantizePitch(const std::vector<double>& f0_norm, int pitch_bins = 256,
                               double clip = 4.0);

// exp(log-duration) rounded to whole frames, clamped to >= 1.
std::vector<double> DurationToFrames(const std::vector<double>& logdur);

struct DecodeOutput {
  Matrix mel_pre;      // [N x mel_bins]
  Matrix mel_post;     // mel_pre + postnet residual
  Matrix stop_logits;  // [N x 1]
  Matrix alignment;    // [N x T]
  bool truncated = false;
};

// mode "teacher" requires gt_mel and ground-truth prosody; mode "infer"
// feeds back predictions and stops on the stop token or the frame cap.
DecodeOutput DecodeMel(const ParameterStore& store, const Matrix& enc_spk,
                       const std::vector<double>& pitch, const std::vector<double>& logdur,
                       const std::string& mode, const Matrix* gt_mel);

struct LossWeights {
  double alpha = 1.0;  // mel (pre + post)
  double beta = 1.0;   // stop token
  double gamma = 1.0;  // pitch
  double delta = 1.0;  // duration
};

struct LossComponents {
  double mel = 0.0;
  double stop = 0.0;
  double pitch = 0.0;
  double duration = 0.0;
  double total = 0.0;
};

LossComponents AcousticLoss(const DecodeOutput& outputs, const Matrix& gt_mel,
                            const std::vector<double>& gt_stop,
                            const std::vector<double>& gt_pitch,
                            const std::vector<double>& gt_logdur,
                            const std::vector<double>& pred_pitch,
                            const std::vector<double>& pred_logdur,
                            const LossWeights& weights);

// pretrain -> every group; finetune -> predictors, pitch embedding,
// duration projection, attention and decoder; text encoder, speaker
// projection and post-net stay frozen.
std::set<std::string> TrainableMask(const std::string& stage);

struct UttExample {
  std::string id;
  Matrix bottleneck;  // [T x bottleneck_dim]
  Matrix speaker;     // [1 x speaker_dim]
  Matrix gt_mel;      // [N x mel_bins]
  std::vector<double> gt_stop;    // [N], 1.0 on the final frame
  std::vector<double> gt_pitch;   // [T], normalized
  std::vector<double> gt_logdur;  // [T]
};

struct TrainHyper {
  double lr = 1e-3;
  int batch = 32;
  int epochs = 800;
  std::uint64_t seed = 0;
  LossWeights weights;
};

struct EpochStats {
  int epoch;
  double total, mel, stop, pitch, duration;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
};

TrainHistory Train(ParameterStore* store, const std::vector<UttExample>& dataset,
                   const std::string& stage, const TrainHyper& hyper);

// Total loss plus analytic gradients for one utterance with dropout
// disabled (teacher mode); gradients cover the trainable groups.
std::pair<double, GradientBag> LossAndGradients(const ParameterStore& store,
                                                const UttExample& utt,
                                                const LossWeights& weights);

// The matching eval-path loss used by finite-difference checks.
double EvalExampleLoss(const ParameterStore& store, const UttExample& utt,
                       const LossWeights& weights);

struct SynthesisResult {
  Matrix mel;                 // post-net output
  Matrix mel_pre;
  std::vector<int> phonemes;  // decoded, without BOS/EOS
  std::vector<double> pred_pitch;   // normalized, per phoneme step
  std::vector<double> pred_logdur;  // natural-log frames, per phoneme step
  Matrix alignment;
  bool g2p_truncated = false;
  bool mel_truncated = false;
};

// Full pipeline: g2p decode -> bottleneck -> text encoder -> predictors ->
// inference-mode mel decoding.
SynthesisResult Synthesize(const ParameterStore& g2p_store, const ParameterStore& ac_store,
                           const std::string& text, const lexicon::CharVocab& chars,
                           int accent_id, const Matrix& speaker);

}  // namespace accentts::acoustic

#endif  // ACCENTTS_ACOUSTIC_ACOUSTIC_HPP_
