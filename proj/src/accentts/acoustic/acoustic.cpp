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

#include "accentts/acoustic/acoustic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "accentts/g2p/g2p.hpp"

namespace accentts::acoustic {

using ad::Var;

void AcousticConfig::Validate() const {
  if (bottleneck_dim < 1 || enc_dim < 1 || birnn_dim < 2 || dec_rnn_dim < 1 ||
      prenet_dim < 1 || mel_bins < 1 || attn_dim < 1 || pred_dim1 < 1 || pred_dim2 < 1 ||
      postnet_channels < 1 || speaker_dim < 1) {
    throw std::invalid_argument("acoustic config: bad dimension");
  }
  if (birnn_dim % 2 != 0) {
    throw std::invalid_argument("acoustic config: birnn_dim must be even");
  }
  if (pitch_embed_dim != birnn_dim) {
    throw std::invalid_argument(
        "acoustic config: pitch_embed_dim must equal birnn_dim for additive fusion");
  }
  if (enc_convs < 1 || postnet_convs < 2) {
    throw std::invalid_argument("acoustic config: need conv layers");
  }
  if (enc_kernel % 2 == 0 || postnet_kernel % 2 == 0 || pred_kernel % 2 == 0 ||
      attn_loc_kernel % 2 == 0) {
    throw std::invalid_argument("acoustic config: kernels must be odd");
  }
  if (pitch_bins < 2 || pitch_clip <= 0.0) {
    throw std::invalid_argument("acoustic config: bad pitch quantization");
  }
  if (max_frames_factor < 1) {
    throw std::invalid_argument("acoustic config: bad max_frames_factor");
  }
}

void AcousticConfig::ToStore(ParameterStore* store) const {
  auto set_int = [store](const char* k, int v) { store->set_config(k, std::to_string(v)); };
  auto set_dbl = [store](const char* k, double v) { store->set_config(k, std::to_string(v)); };
  set_int("bottleneck_dim", bottleneck_dim);
  set_int("enc_dim", enc_dim);
  set_int("enc_convs", enc_convs);
  set_int("enc_kernel", enc_kernel);
  set_int("birnn_dim", birnn_dim);
  set_int("dec_rnn_dim", dec_rnn_dim);
  set_int("prenet_dim", prenet_dim);
  set_int("mel_bins", mel_bins);
  set_int("postnet_convs", postnet_convs);
  set_int("postnet_kernel", postnet_kernel);
  set_int("postnet_channels", postnet_channels);
  set_int("attn_dim", attn_dim);
  set_int("attn_loc_kernel", attn_loc_kernel);
  set_int("attn_loc_channels", attn_loc_channels);
  set_int("pred_dim1", pred_dim1);
  set_int("pred_dim2", pred_dim2);
  set_int("pred_kernel", pred_kernel);
  set_dbl("pred_dropout", pred_dropout);
  set_dbl("prenet_dropout", prenet_dropout);
  set_dbl("rnn_dropout", rnn_dropout);
  set_int("pitch_bins", pitch_bins);
  set_int("pitch_embed_dim", pitch_embed_dim);
  set_int("speaker_dim", speaker_dim);
  set_dbl("pitch_clip", pitch_clip);
  set_dbl("stop_threshold", stop_threshold);
  set_int("max_frames_factor", max_frames_factor);
}

AcousticConfig AcousticConfig::FromStore(const ParameterStore& store) {
  AcousticConfig cfg;
  cfg.bottleneck_dim = store.config_int("bottleneck_dim");
  cfg.enc_dim = store.config_int("enc_dim");
  cfg.enc_convs = store.config_int("enc_convs");
  cfg.enc_kernel = store.config_int("enc_kernel");
  cfg.birnn_dim = store.config_int("birnn_dim");
  cfg.dec_rnn_dim = store.config_int("dec_rnn_dim");
  cfg.prenet_dim = store.config_int("prenet_dim");
  cfg.mel_bins = store.config_int("mel_bins");
  cfg.postnet_convs = store.config_int("postnet_convs");
  cfg.postnet_kernel = store.config_int("postnet_kernel");
  cfg.postnet_channels = store.config_int("postnet_channels");
  cfg.attn_dim = store.config_int("attn_dim");
  cfg.attn_loc_kernel = store.config_int("attn_loc_kernel");
  cfg.attn_loc_channels = store.config_int("attn_loc_channels");
  cfg.pred_dim1 = store.config_int("pred_dim1");
  cfg.pred_dim2 = store.config_int("pred_dim2");
  cfg.pred_kernel = store.config_int("pred_kernel");
  cfg.pred_dropout = store.config_double("pred_dropout");
  cfg.prenet_dropout = store.config_double("prenet_dropout");
  cfg.rnn_dropout = store.config_double("rnn_dropout");
  cfg.pitch_bins = store.config_int("pitch_bins");
  cfg.pitch_embed_dim = store.config_int("pitch_embed_dim");
  cfg.speaker_dim = store.config_int("speaker_dim");
  cfg.pitch_clip = store.config_double("pitch_clip");
  cfg.stop_threshold = store.config_double("stop_threshold");
  cfg.max_frames_factor = store.config_int("max_frames_factor");
  cfg.Validate();
  return cfg;
}

namespace {

void InitUniform(Matrix* m, double bound, Rng* rng) {
  for (double& v : m->raw()) v = rng->uniform(-bound, bound);
  SnapToFloat32(m);
}

void AddLinear(ParameterStore* store, const std::string& group, const std::string& prefix,
               int in, int out, Rng* rng) {
  Matrix& w = store->add_param(group, prefix + ".w", in, out);
  InitUniform(&w, 1.0 / std::sqrt(static_cast<double>(in)), rng);
  store->add_param(group, prefix + ".b", 1, out);
}

void AddConv(ParameterStore* store, const std::string& group, const std::string& prefix,
             int kernel, int cin, int cout, Rng* rng) {
  Matrix& w = store->add_param(group, prefix + ".w", kernel * cin, cout);
  InitUniform(&w, 1.0 / std::sqrt(static_cast<double>(kernel * cin)), rng);
  store->add_param(group, prefix + ".b", 1, cout);
}

void AddNorm(ParameterStore* store, const std::string& group, const std::string& prefix,
             int dim) {
  store->add_param(group, prefix + ".gain", 1, dim).fill(1.0);
  store->add_param(group, prefix + ".bias", 1, dim);
}

void AddLstm(ParameterStore* store, const std::string& group, const std::string& prefix,
             int in, int hidden, Rng* rng) {
  Matrix& wx = store->add_param(group, prefix + ".wx", in, 4 * hidden);
  InitUniform(&wx, 1.0 / std::sqrt(static_cast<double>(in)), rng);
  Matrix& wh = store->add_param(group, prefix + ".wh", hidden, 4 * hidden);
  InitUniform(&wh, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
  store->add_param(group, prefix + ".b", 1, 4 * hidden);
}

Var Linear(ParamGraph& pg, const std::string& group, const std::string& prefix,
           const Var& x) {
  return ad::AddBroadcastRow(ad::MatMul(x, pg(group, prefix + ".w")),
                             pg(group, prefix + ".b"));
}

Var Conv(ParamGraph& pg, const std::string& group, const std::string& prefix, const Var& x,
         int kernel) {
  return ad::Conv1dSame(x, pg(group, prefix + ".w"), pg(group, prefix + ".b"), kernel);
}

// Per-channel normalization over time with learned scale/shift. Stateless
// stand-in for the batch-normalized conv stacks; deterministic in both
// training and eval.
Var TimeNorm(ParamGraph& pg, const std::string& group, const std::string& prefix,
             const Var& x) {
  return ad::NormColsOverRows(x, pg(group, prefix + ".gain"), pg(group, prefix + ".bias"));
}

Var ChannelNorm(ParamGraph& pg, const std::string& group, const std::string& prefix,
                const Var& x) {
  return ad::LayerNormRows(x, pg(group, prefix + ".gain"), pg(group, prefix + ".bias"));
}

struct LstmState {
  Var h;
  Var c;
};

LstmState LstmInit(int hidden) {
  return {ad::Constant(Matrix(1, hidden)), ad::Constant(Matrix(1, hidden))};
}

LstmState LstmStep(ParamGraph& pg, const std::string& group, const std::string& prefix,
                   const Var& x, const LstmState& prev, int hidden) {
  const Var gates = ad::AddBroadcastRow(
      ad::Add(ad::MatMul(x, pg(group, prefix + ".wx")),
              ad::MatMul(prev.h, pg(group, prefix + ".wh"))),
      pg(group, prefix + ".b"));
  const Var i = ad::Sigmoid(ad::SliceCols(gates, 0, hidden));
  const Var f = ad::Sigmoid(ad::SliceCols(gates, hidden, 2 * hidden));
  const Var g = ad::Tanh(ad::SliceCols(gates, 2 * hidden, 3 * hidden));
  const Var o = ad::Sigmoid(ad::SliceCols(gates, 3 * hidden, 4 * hidden));
  LstmState next;
  next.c = ad::Add(ad::Mul(f, prev.c), ad::Mul(i, g));
  next.h = ad::Mul(o, ad::Tanh(next.c));
  return next;
}

struct BuildEnv {
  const AcousticConfig* cfg;
  ParamGraph* pg;
  Rng* rng;
  bool train;
};

Var Drop(const BuildEnv& env, const Var& x, double p) {
  return ad::Dropout(x, p, env.rng, env.train);
}

struct EncodeVars {
  Var enc_out;
  Var enc_spk;
};

EncodeVars BuildEncode(const BuildEnv& env, const Matrix& bottleneck, const Matrix& speaker) {
  ParamGraph& pg = *env.pg;
  const AcousticConfig& cfg = *env.cfg;
  if (bottleneck.rows() < 1 || bottleneck.cols() != cfg.bottleneck_dim) {
    throw std::invalid_argument("encode_text: bottleneck must be [T x " +
                                std::to_string(cfg.bottleneck_dim) + "]");
  }
  if (!bottleneck.all_finite()) {
    throw std::invalid_argument("encode_text: non-finite bottleneck input");
  }
  if (speaker.rows() != 1 || speaker.cols() != cfg.speaker_dim) {
    throw std::invalid_argument("encode_text: speaker must be [1 x " +
                                std::to_string(cfg.speaker_dim) + "]");
  }
  if (!speaker.all_finite()) {
    throw std::invalid_argument("encode_text: non-finite speaker embedding");
  }
  Var x = ad::Softsign(Linear(pg, kTextEncoder, "in_proj", ad::Constant(bottleneck)));
  for (int l = 0; l < cfg.enc_convs; ++l) {
    const std::string p = "conv" + std::to_string(l);
    x = ad::Relu(TimeNorm(pg, kTextEncoder, p + ".norm",
                          Conv(pg, kTextEncoder, p, x, cfg.enc_kernel)));
  }
  const int t_len = bottleneck.rows();
  const int half = cfg.birnn_dim / 2;
  std::vector<Var> fwd(t_len), bwd(t_len);
  LstmState fs = LstmInit(half);
  for (int t = 0; t < t_len; ++t) {
    fs = LstmStep(pg, kTextEncoder, "lstm_fwd", ad::Row(x, t), fs, half);
    fwd[t] = fs.h;
  }
  LstmState bs = LstmInit(half);
  for (int t = t_len - 1; t >= 0; --t) {
    bs = LstmStep(pg, kTextEncoder, "lstm_bwd", ad::Row(x, t), bs, half);
    bwd[t] = bs.h;
  }
  EncodeVars out;
  out.enc_out = ad::ConcatCols({ad::ConcatRows(fwd), ad::ConcatRows(bwd)});
  const Var spk =
      ad::Softsign(Linear(pg, kSpeakerProjection, "proj", ad::Constant(speaker)));
  out.enc_spk = ad::AddBroadcastRow(out.enc_out, spk);
  return out;
}

// Shared pitch/duration predictor topology; `group` picks the parameters.
Var BuildPredictor(const BuildEnv& env, const std::string& group, const Var& enc_spk) {
  ParamGraph& pg = *env.pg;
  const AcousticConfig& cfg = *env.cfg;
  Var h = ChannelNorm(pg, group, "ln1",
                      ad::Relu(Conv(pg, group, "conv1", enc_spk, cfg.pred_kernel)));
  h = Drop(env, h, cfg.pred_dropout);
  h = ChannelNorm(pg, group, "ln2", ad::Relu(Conv(pg, group, "conv2", h, cfg.pred_kernel)));
  h = Drop(env, h, cfg.pred_dropout);
  return Linear(pg, group, "fc", h);  // [T x 1]
}

struct DecodeVars {
  Var mel_pre;
  Var mel_post;
  Var stop_logits;
  Matrix alignment;
  bool truncated = false;
};

Var BuildMemory(const BuildEnv& env, const Var& enc_spk, const std::vector<double>& pitch,
                const std::vector<double>& logdur) {
  ParamGraph& pg = *env.pg;
  const AcousticConfig& cfg = *env.cfg;
  const int t_len = enc_spk.rows();
  if (static_cast<int>(pitch.size()) != t_len ||
      static_cast<int>(logdur.size()) != t_len) {
    throw std::invalid_argument("decode_mel: prosody length must match phoneme count");
  }
  const std::vector<int> bins = QuantizePitch(pitch, cfg.pitch_bins, cfg.pitch_clip);
  const Var pitch_emb = ad::GatherRows(pg(kPitchEmbedding, "table"), bins);
  const Var dur_in = ad::Constant(Matrix::ColumnVector(logdur));
  const Var dur_emb = ad::Relu(Linear(pg, kDurationProjection, "proj", dur_in));
  return ad::Add(ad::Add(enc_spk, pitch_emb), dur_emb);
}

DecodeVars BuildDecode(const BuildEnv& env, const Var& memory, const std::string& mode,
                       const Matrix* gt_mel) {
  ParamGraph& pg = *env.pg;
  const AcousticConfig& cfg = *env.cfg;
  const bool teacher = mode == "teacher";
  if (!teacher && mode != "infer") {
    throw std::invalid_argument("decode_mel: mode must be 'teacher' or 'infer'");
  }
  if (teacher) {
    if (gt_mel == nullptr) throw std::invalid_argument("decode_mel: teacher mode needs gt_mel");
    if (gt_mel->rows() < 1 || gt_mel->cols() != cfg.mel_bins) {
      throw std::invalid_argument("decode_mel: gt_mel must be [N x mel_bins]");
    }
  }
  const int t_len = memory.rows();
  const int max_frames = teacher ? gt_mel->rows() : cfg.max_frames_factor * t_len;

  const Var pm = Linear(pg, kAttention, "mem", memory);  // [T x attn_dim]
  LstmState s1 = LstmInit(cfg.dec_rnn_dim);
  LstmState s2 = LstmInit(cfg.dec_rnn_dim);
  Var context = ad::Constant(Matrix(1, cfg.birnn_dim));
  Var attn = ad::Constant(Matrix(t_len, 1));
  Var attn_cum = ad::Constant(Matrix(t_len, 1));
  Var prev = ad::Constant(Matrix(1, cfg.mel_bins));  // go frame

  std::vector<Var> mel_rows, stop_rows;
  DecodeVars out;
  out.alignment = Matrix(0, 0);
  std::vector<Matrix> align_rows;
  out.truncated = !teacher;

  for (int frame = 0; frame < max_frames; ++frame) {
    Var pn = Drop(env, ad::Relu(Linear(pg, kDecoder, "prenet1", prev)), cfg.prenet_dropout);
    pn = Drop(env, ad::Relu(Linear(pg, kDecoder, "prenet2", pn)), cfg.prenet_dropout);
    s1 = LstmStep(pg, kDecoder, "lstm1", ad::ConcatCols({pn, context}), s1, cfg.dec_rnn_dim);
    const Var h1 = Drop(env, s1.h, cfg.rnn_dropout);

    const Var query = Linear(pg, kAttention, "query", h1);  // [1 x attn_dim]
    const Var loc_feats = ad::ConcatCols({attn, attn_cum});  // [T x 2]
    const Var loc = Linear(pg, kAttention, "loc_fc",
                           Conv(pg, kAttention, "loc_conv", loc_feats, cfg.attn_loc_kernel));
    const Var energies =
        ad::MatMul(ad::Tanh(ad::AddBroadcastRow(ad::Add(pm, loc), query)),
                   pg(kAttention, "v.w"));  // [T x 1]
    attn = ad::SoftmaxAll(energies);
    attn_cum = ad::Add(attn_cum, attn);
    context = ad::MatMul(ad::Transpose(attn), memory);  // [1 x birnn]

    s2 = LstmStep(pg, kDecoder, "lstm2", ad::ConcatCols({h1, context}), s2, cfg.dec_rnn_dim);
    const Var h2 = Drop(env, s2.h, cfg.rnn_dropout);
    const Var proj_in = ad::ConcatCols({h2, context});
    const Var mel_t = Linear(pg, kDecoder, "mel", proj_in);
    const Var stop_t = Linear(pg, kDecoder, "stop", proj_in);
    mel_rows.push_back(mel_t);
    stop_rows.push_back(stop_t);
    align_rows.push_back(Transpose(attn.value()));

    if (teacher) {
      prev = ad::Constant(Matrix::FromRows(
          1, cfg.mel_bins,
          std::vector<double>(gt_mel->row_ptr(frame), gt_mel->row_ptr(frame) + cfg.mel_bins)));
    } else {
      prev = mel_t;
      const double stop_prob = 1.0 / (1.0 + std::exp(-stop_t.value().at(0, 0)));
      if (stop_prob > cfg.stop_threshold) {
        out.truncated = false;
        break;
      }
    }
  }

  out.mel_pre = ad::ConcatRows(mel_rows);
  out.stop_logits = ad::ConcatRows(stop_rows);
  // Post-net residual refinement.
  Var p = out.mel_pre;
  for (int l = 0; l < cfg.postnet_convs; ++l) {
    const std::string prefix = "conv" + std::to_string(l);
    p = TimeNorm(pg, kPostnet, prefix + ".norm", Conv(pg, kPostnet, prefix, p,
                                                      cfg.postnet_kernel));
    if (l + 1 < cfg.postnet_convs) p = ad::Tanh(p);
  }
  out.mel_post = ad::Add(out.mel_pre, p);

  const int n_frames = static_cast<int>(align_rows.size());
  out.alignment = Matrix(n_frames, t_len);
  for (int r = 0; r < n_frames; ++r) {
    std::copy(align_rows[r].row_ptr(0), align_rows[r].row_ptr(0) + t_len,
              out.alignment.row_ptr(r));
  }
  return out;
}

std::vector<double> ColumnToVector(const Matrix& m) {
  std::vector<double> out(m.rows());
  for (int r = 0; r < m.rows(); ++r) out[r] = m.at(r, 0);
  return out;
}

struct LossVars {
  Var total;
  LossComponents values;
};

LossVars BuildLoss(const Var& mel_pre, const Var& mel_post, const Var& stop_logits,
                   const Var& pred_pitch, const Var& pred_logdur, const Matrix& gt_mel,
                   const std::vector<double>& gt_stop, const std::vector<double>& gt_pitch,
                   const std::vector<double>& gt_logdur, const LossWeights& weights) {
  if (mel_pre.rows() != gt_mel.rows()) {
    throw std::invalid_argument("acoustic_loss: mel frame count mismatch");
  }
  if (static_cast<int>(gt_stop.size()) != stop_logits.rows()) {
    throw std::invalid_argument("acoustic_loss: stop target length mismatch");
  }
  if (pred_pitch.rows() != static_cast<int>(gt_pitch.size()) ||
      pred_logdur.rows() != static_cast<int>(gt_logdur.size())) {
    throw std::invalid_argument("acoustic_loss: prosody target length mismatch");
  }
  const Var gt = ad::Constant(gt_mel);
  const Var mel_term = ad::Add(ad::Mse(mel_pre, gt), ad::Mse(mel_post, gt));
  const Var stop_term = ad::BceWithLogits(stop_logits, Matrix::ColumnVector(gt_stop));
  const Var pitch_term = ad::Mse(pred_pitch, ad::Constant(Matrix::ColumnVector(gt_pitch)));
  const Var dur_term = ad::Mse(pred_logdur, ad::Constant(Matrix::ColumnVector(gt_logdur)));
  LossVars out;
  out.total = ad::Add(ad::Add(ad::Scale(mel_term, weights.alpha),
                              ad::Scale(stop_term, weights.beta)),
                      ad::Add(ad::Scale(pitch_term, weights.gamma),
                              ad::Scale(dur_term, weights.delta)));
  out.values.mel = mel_term.scalar();
  out.values.stop = stop_term.scalar();
  out.values.pitch = pitch_term.scalar();
  out.values.duration = dur_term.scalar();
  out.values.total = out.total.scalar();
  return out;
}

}  // namespace

ParameterStore InitAcoustic(const AcousticConfig& config, std::uint64_t seed) {
  config.Validate();
  ParameterStore store;
  store.model_kind = "acoustic";
  config.ToStore(&store);
  Rng rng(Rng::mix(seed, StableHash("acoustic-init")));

  store.add_group(kTextEncoder);
  AddLinear(&store, kTextEncoder, "in_proj", config.bottleneck_dim, config.enc_dim, &rng);
  for (int l = 0; l < config.enc_convs; ++l) {
    const std::string p = "conv" + std::to_string(l);
    AddConv(&store, kTextEncoder, p, config.enc_kernel, config.enc_dim, config.enc_dim, &rng);
    AddNorm(&store, kTextEncoder, p + ".norm", config.enc_dim);
  }
  const int half = config.birnn_dim / 2;
  AddLstm(&store, kTextEncoder, "lstm_fwd", config.enc_dim, half, &rng);
  AddLstm(&store, kTextEncoder, "lstm_bwd", config.enc_dim, half, &rng);

  store.add_group(kSpeakerProjection);
  AddLinear(&store, kSpeakerProjection, "proj", config.speaker_dim, config.birnn_dim, &rng);

  for (const char* group : {kPitchPredictor, kDurationPredictor}) {
    store.add_group(group);
    AddConv(&store, group, "conv1", config.pred_kernel, config.birnn_dim, config.pred_dim1,
            &rng);
    AddNorm(&store, group, "ln1", config.pred_dim1);
    AddConv(&store, group, "conv2", config.pred_kernel, config.pred_dim1, config.pred_dim2,
            &rng);
    AddNorm(&store, group, "ln2", config.pred_dim2);
    AddLinear(&store, group, "fc", config.pred_dim2, 1, &rng);
  }

  store.add_group(kPitchEmbedding);
  Matrix& pe = store.add_param(kPitchEmbedding, "table", config.pitch_bins,
                               config.pitch_embed_dim);
  InitUniform(&pe, 1.0 / std::sqrt(static_cast<double>(config.pitch_embed_dim)), &rng);

  store.add_group(kDurationProjection);
  AddLinear(&store, kDurationProjection, "proj", 1, config.birnn_dim, &rng);

  store.add_group(kAttention);
  AddLinear(&store, kAttention, "mem", config.birnn_dim, config.attn_dim, &rng);
  AddLinear(&store, kAttention, "query", config.dec_rnn_dim, config.attn_dim, &rng);
  AddConv(&store, kAttention, "loc_conv", config.attn_loc_kernel, 2,
          config.attn_loc_channels, &rng);
  AddLinear(&store, kAttention, "loc_fc", config.attn_loc_channels, config.attn_dim, &rng);
  Matrix& v = store.add_param(kAttention, "v.w", config.attn_dim, 1);
  InitUniform(&v, 1.0 / std::sqrt(static_cast<double>(config.attn_dim)), &rng);

  store.add_group(kDecoder);
  AddLinear(&store, kDecoder, "prenet1", config.mel_bins, config.prenet_dim, &rng);
  AddLinear(&store, kDecoder, "prenet2", config.prenet_dim, config.prenet_dim, &rng);
  AddLstm(&store, kDecoder, "lstm1", config.prenet_dim + config.birnn_dim, config.dec_rnn_dim,
          &rng);
  AddLstm(&store, kDecoder, "lstm2", config.dec_rnn_dim + config.birnn_dim,
          config.dec_rnn_dim, &rng);
  AddLinear(&store, kDecoder, "mel", config.dec_rnn_dim + config.birnn_dim, config.mel_bins,
            &rng);
  AddLinear(&store, kDecoder, "stop", config.dec_rnn_dim + config.birnn_dim, 1, &rng);

  store.add_group(kPostnet);
  for (int l = 0; l < config.postnet_convs; ++l) {
    const std::string p = "conv" + std::to_string(l);
    const int cin = l == 0 ? config.mel_bins : config.postnet_channels;
    const int cout = l + 1 == config.postnet_convs ? config.mel_bins : config.postnet_channels;
    AddConv(&store, kPostnet, p, config.postnet_kernel, cin, cout, &rng);
    AddNorm(&store, kPostnet, p + ".norm", cout);
  }
  return store;
}

EncodeResult EncodeText(const ParameterStore& store, const Matrix& bottleneck,
                        const Matrix& speaker) {
  const AcousticConfig cfg = AcousticConfig::FromStore(store);
  ParamGraph pg(store, /*training=*/false);
  BuildEnv env{&cfg, &pg, nullptr, false};
  EncodeVars vars = BuildEncode(env, bottleneck, speaker);
  return {vars.enc_out.value(), vars.enc_spk.value()};
}

std::vector<double> PredictPitch(const ParameterStore& store, const Matrix& enc_spk) {
  const AcousticConfig cfg = AcousticConfig::FromStore(store);
  if (!enc_spk.all_finite()) throw std::invalid_argument("predict_pitch: non-finite input");
  ParamGraph pg(store, /*training=*/false);
  BuildEnv env{&cfg, &pg, nullptr, false};
  return ColumnToVector(BuildPredictor(env, kPitchPredictor, ad::Constant(enc_spk)).value());
}

std::vector<double> PredictDuration(const ParameterStore& store, const Matrix& enc_spk) {
  const AcousticConfig cfg = AcousticConfig::FromStore(store);
  if (!enc_spk.all_finite()) throw std::invalid_argument("predict_duration: non-finite input");
  ParamGraph pg(store, /*training=*/false);
  BuildEnv env{&cfg, &pg, nullptr, false};
  return ColumnToVector(
      BuildPredictor(env, kDurationPredictor, ad::Constant(enc_spk)).value());
}

std::vector<int> QuantizePitch(const std::vector<double>& f0_norm, int pitch_bins,
                               double clip) {
  std::vector<int> bins(f0_norm.size());
  for (std::size_t i = 0; i < f0_norm.size(); ++i) {
    if (!std::isfinite(f0_norm[i])) {
      throw std::invalid_argument("quantize_pitch: non-finite value");
    }
    const double unit = (f0_norm[i] + clip) / (2.0 * clip);
    const int b = static_cast<int>(std::floor(unit * pitch_bins));
    bins[i] = std::clamp(b, 0, pitch_bins - 1);
  }
  return bins;
}

std::vector<double> DurationToFrames(const std::vector<double>& logdur) {
  std::vector<double> frames(logdur.size());
  for (std::size_t i = 0; i < logdur.size(); ++i) {
    frames[i] = std::max(1.0, std::round(std::exp(logdur[i])));
  }
  return frames;
}

DecodeOutput DecodeMel(const ParameterStore& store, const Matrix& enc_spk,
                       const std::vector<double>& pitch, const std::vector<double>& logdur,
                       const std::string& mode, const Matrix* gt_mel) {
  const AcousticConfig cfg = AcousticConfig::FromStore(store);
  ParamGraph pg(store, /*training=*/false);
  BuildEnv env{&cfg, &pg, nullptr, false};
  const Var memory = BuildMemory(env, ad::Constant(enc_spk), pitch, logdur);
  DecodeVars vars = BuildDecode(env, memory, mode, gt_mel);
  DecodeOutput out;
  out.mel_pre = vars.mel_pre.value();
  out.mel_post = vars.mel_post.value();
  out.stop_logits = vars.stop_logits.value();
  out.alignment = vars.alignment;
  out.truncated = vars.truncated;
  return out;
}

LossComponents AcousticLoss(const DecodeOutput& outputs, const Matrix& gt_mel,
                            const std::vector<double>& gt_stop,
                            const std::vector<double>& gt_pitch,
                            const std::vector<double>& gt_logdur,
                            const std::vector<double>& pred_pitch,
                            const std::vector<double>& pred_logdur,
                            const LossWeights& weights) {
  if (pred_pitch.size() != gt_pitch.size() || pred_logdur.size() != gt_logdur.size()) {
    throw std::invalid_argument("acoustic_loss: prediction/target length mismatch");
  }
  const LossVars loss = BuildLoss(
      ad::Constant(outputs.mel_pre), ad::Constant(outputs.mel_post),
      ad::Constant(outputs.stop_logits),
      ad::Constant(Matrix::ColumnVector(pred_pitch)),
      ad::Constant(Matrix::ColumnVector(pred_logdur)), gt_mel, gt_stop, gt_pitch, gt_logdur,
      weights);
  return loss.values;
}

std::set<std::string> TrainableMask(const std::string& stage) {
  if (stage == "pretrain") {
    return {kTextEncoder,      kSpeakerProjection, kPitchPredictor,
            kPitchEmbedding,   kDurationPredictor, kDurationProjection,
            kAttention,        kDecoder,           kPostnet};
  }
  if (stage == "finetune") {
    return {kDurationPredictor, kDurationProjection, kAttention,
            kPitchPredictor,    kPitchEmbedding,     kDecoder};
  }
  throw std::invalid_argument("acoustic_trainable_mask: unknown stage '" + stage + "'");
}

TrainHistory Train(ParameterStore* store, const std::vector<UttExample>& dataset,
                   const std::string& stage, const TrainHyper& hyper) {
  if (dataset.empty()) throw std::invalid_argument("train_acoustic: empty dataset");
  const AcousticConfig cfg = AcousticConfig::FromStore(*store);
  for (const auto& utt : dataset) {
    const int t_len = utt.bottleneck.rows();
    if (static_cast<int>(utt.gt_pitch.size()) != t_len ||
        static_cast<int>(utt.gt_logdur.size()) != t_len) {
      throw std::invalid_argument("train_acoustic: prosody length mismatch in '" + utt.id +
                                  "'");
    }
    if (static_cast<int>(utt.gt_stop.size()) != utt.gt_mel.rows()) {
      throw std::invalid_argument("train_acoustic: stop length mismatch in '" + utt.id + "'");
    }
  }
  store->apply_trainable_mask(TrainableMask(stage));

  Rng rng(Rng::mix(hyper.seed, StableHash("acoustic-train-" + stage)));
  Rng shuffle_rng = rng.fork(1);
  Rng dropout_rng = rng.fork(2);
  AdamOptimizer opt(hyper.lr);

  TrainHistory history;
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  const int batch_size = std::max(1, hyper.batch);

  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.uniform_int(i)]);
    }
    LossComponents epoch_sums;
    std::size_t cursor = 0;
    while (cursor < order.size()) {
      const std::size_t batch_end = std::min(cursor + batch_size, order.size());
      const double inv_batch = 1.0 / static_cast<double>(batch_end - cursor);
      ParamGraph pg(*store, /*training=*/true);
      BuildEnv env{&cfg, &pg, &dropout_rng, true};
      for (std::size_t i = cursor; i < batch_end; ++i) {
        const auto& utt = dataset[order[i]];
        const EncodeVars enc = BuildEncode(env, utt.bottleneck, utt.speaker);
        const Var pred_pitch = BuildPredictor(env, kPitchPredictor, enc.enc_spk);
        const Var pred_dur = BuildPredictor(env, kDurationPredictor, enc.enc_spk);
        const Var memory = BuildMemory(env, enc.enc_spk, utt.gt_pitch, utt.gt_logdur);
        DecodeVars dec = BuildDecode(env, memory, "teacher", &utt.gt_mel);
        const LossVars loss =
            BuildLoss(dec.mel_pre, dec.mel_post, dec.stop_logits, pred_pitch, pred_dur,
                      utt.gt_mel, utt.gt_stop, utt.gt_pitch, utt.gt_logdur, hyper.weights);
        epoch_sums.total += loss.values.total;
        epoch_sums.mel += loss.values.mel;
        epoch_sums.stop += loss.values.stop;
        epoch_sums.pitch += loss.values.pitch;
        epoch_sums.duration += loss.values.duration;
        ad::Backward(loss.total, inv_batch);
      }
      GradientBag grads;
      pg.CollectGrads(&grads);
      opt.Step(store, grads);
      cursor = batch_end;
    }
    const double n = static_cast<double>(dataset.size());
    EpochStats stats{epoch, epoch_sums.total / n, epoch_sums.mel / n, epoch_sums.stop / n,
                     epoch_sums.pitch / n, epoch_sums.duration / n};
    history.epochs.push_back(stats);
    std::ostringstream line;
    line << "acoustic stage=" << stage << " epoch=" << epoch << " total=" << stats.total
         << " mel=" << stats.mel << " stop=" << stats.stop << " pitch=" << stats.pitch
         << " dur=" << stats.duration;
    store->history.push_back(line.str());
  }
  return history;
}

std::pair<double, GradientBag> LossAndGradients(const ParameterStore& store,
                                                const UttExample& utt,
                                                const LossWeights& weights) {
  const AcousticConfig cfg = AcousticConfig::FromStore(store);
  ParamGraph pg(store, /*training=*/true);
  BuildEnv env{&cfg, &pg, nullptr, false};
  const EncodeVars enc = BuildEncode(env, utt.bottleneck, utt.speaker);
  const Var pred_pitch = BuildPredictor(env, kPitchPredictor, enc.enc_spk);
  const Var pred_dur = BuildPredictor(env, kDurationPredictor, enc.enc_spk);
  const Var memory = BuildMemory(env, enc.enc_spk, utt.gt_pitch, utt.gt_logdur);
  DecodeVars dec = BuildDecode(env, memory, "teacher", &utt.gt_mel);
  const LossVars loss =
      BuildLoss(dec.mel_pre, dec.mel_post, dec.stop_logits, pred_pitch, pred_dur, utt.gt_mel,
                utt.gt_stop, utt.gt_pitch, utt.gt_logdur, weights);
  ad::Backward(loss.total);
  GradientBag bag;
  pg.CollectGrads(&bag);
  return {loss.values.total, bag};
}

double EvalExampleLoss(const ParameterStore& store, const UttExample& utt,
                       const LossWeights& weights) {
  const EncodeResult enc = EncodeText(store, utt.bottleneck, utt.speaker);
  const std::vector<double> pred_pitch = PredictPitch(store, enc.enc_spk);
  const std::vector<double> pred_dur = PredictDuration(store, enc.enc_spk);
  const DecodeOutput out =
      DecodeMel(store, enc.enc_spk, utt.gt_pitch, utt.gt_logdur, "teacher", &utt.gt_mel);
  return AcousticLoss(out, utt.gt_mel, utt.gt_stop, utt.gt_pitch, utt.gt_logdur, pred_pitch,
                      pred_dur, weights)
      .total;
}

SynthesisResult Synthesize(const ParameterStore& g2p_store, const ParameterStore& ac_store,
                           const std::string& text, const lexicon::CharVocab& chars,
                           int accent_id, const Matrix& speaker) {
  const AcousticConfig cfg = AcousticConfig::FromStore(ac_store);
  const std::string norm = lexicon::NormalizeText(text);
  if (norm.empty()) throw std::invalid_argument("synthesize: empty text");
  const std::vector<int> graphemes = chars.Encode(norm);

  const g2p::BottleneckResult bn =
      g2p::ExtractBottleneck(g2p_store, graphemes, accent_id, std::nullopt);
  if (bn.features.cols() != cfg.bottleneck_dim) {
    throw std::invalid_argument(
        "synthesize: G2P hidden width does not match acoustic bottleneck_dim");
  }
  const EncodeResult enc = EncodeText(ac_store, bn.features, speaker);
  SynthesisResult out;
  out.phonemes = bn.phonemes;
  out.g2p_truncated = bn.truncated;
  out.pred_pitch = PredictPitch(ac_store, enc.enc_spk);
  out.pred_logdur = PredictDuration(ac_store, enc.enc_spk);
  DecodeOutput dec =
      DecodeMel(ac_store, enc.enc_spk, out.pred_pitch, out.pred_logdur, "infer", nullptr);
  out.mel = std::move(dec.mel_post);
  out.mel_pre = std::move(dec.mel_pre);
  out.alignment = std::move(dec.alignment);
  out.mel_truncated = dec.truncated;
  return out;
}

}  // namespace accentts::acoustic
