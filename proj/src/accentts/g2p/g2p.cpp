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

#include "accentts/g2p/g2p.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace accentts::g2p {

using ad::Var;

void G2PConfig::Validate() const {
  if (model_dim <= 0 || heads <= 0 || model_dim % heads != 0) {
    throw std::invalid_argument("g2p config: model_dim must be divisible by heads");
  }
  if (encoder_layers < 1 || decoder_layers < 1) {
    throw std::invalid_argument("g2p config: need at least one encoder/decoder layer");
  }
  if (grapheme_vocab < 2) throw std::invalid_argument("g2p config: grapheme_vocab unset");
  if (phoneme_vocab < lexicon::PhonemeInventory::num_specials() + 1) {
    throw std::invalid_argument("g2p config: phoneme_vocab too small");
  }
  if (accent_table_size < 1) throw std::invalid_argument("g2p config: accent_table_size unset");
  if (accent_dim < 1 || ff_dim < 1 || max_decode_len < 1) {
    throw std::invalid_argument("g2p config: bad dimension");
  }
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("g2p config: bad dropout");
}

void G2PConfig::ToStore(ParameterStore* store) const {
  auto set_int = [store](const char* k, int v) { store->set_config(k, std::to_string(v)); };
  set_int("model_dim", model_dim);
  set_int("encoder_layers", encoder_layers);
  set_int("decoder_layers", decoder_layers);
  set_int("heads", heads);
  set_int("ff_dim", ff_dim);
  store->set_config("dropout", std::to_string(dropout));
  set_int("grapheme_vocab", grapheme_vocab);
  set_int("phoneme_vocab", phoneme_vocab);
  set_int("accent_table_size", accent_table_size);
  set_int("accent_dim", accent_dim);
  set_int("max_decode_len", max_decode_len);
  set_int("pad_index", pad_index);
  set_int("bos_index", bos_index);
  set_int("eos_index", eos_index);
  set_int("wb_index", wb_index);
}

G2PConfig G2PConfig::FromStore(const ParameterStore& store) {
  G2PConfig cfg;
  cfg.model_dim = store.config_int("model_dim");
  cfg.encoder_layers = store.config_int("encoder_layers");
  cfg.decoder_layers = store.config_int("decoder_layers");
  cfg.heads = store.config_int("heads");
  cfg.ff_dim = store.config_int("ff_dim");
  cfg.dropout = store.config_double("dropout");
  cfg.grapheme_vocab = store.config_int("grapheme_vocab");
  cfg.phoneme_vocab = store.config_int("phoneme_vocab");
  cfg.accent_table_size = store.config_int("accent_table_size");
  cfg.accent_dim = store.config_int("accent_dim");
  cfg.max_decode_len = store.config_int("max_decode_len");
  cfg.pad_index = store.config_int("pad_index");
  cfg.bos_index = store.config_int("bos_index");
  cfg.eos_index = store.config_int("eos_index");
  cfg.wb_index = store.config_int("wb_index");
  cfg.Validate();
  return cfg;
}

namespace {

void InitUniform(Matrix* m, double bound, Rng* rng) {
  for (double& v : m->raw()) v = rng->uniform(-bound, bound);
  SnapToFloat32(m);
}

// Weight [in x out]: uniform +- 1/sqrt(in). Embedding [vocab x dim]:
// uniform +- 1/sqrt(dim).
void AddLinear(ParameterStore* store, const std::string& group, const std::string& prefix,
               int in, int out, Rng* rng) {
  Matrix& w = store->add_param(group, prefix + ".w", in, out);
  InitUniform(&w, 1.0 / std::sqrt(static_cast<double>(in)), rng);
  store->add_param(group, prefix + ".b", 1, out);
}

void AddNorm(ParameterStore* store, const std::string& group, const std::string& prefix,
             int dim) {
  Matrix& gain = store->add_param(group, prefix + ".gain", 1, dim);
  gain.fill(1.0);
  store->add_param(group, prefix + ".bias", 1, dim);
}

void AddAttention(ParameterStore* store, const std::string& group, const std::string& prefix,
                  int dim, Rng* rng) {
  AddLinear(store, group, prefix + ".q", dim, dim, rng);
  AddLinear(store, group, prefix + ".k", dim, dim, rng);
  AddLinear(store, group, prefix + ".v", dim, dim, rng);
  AddLinear(store, group, prefix + ".o", dim, dim, rng);
}

Matrix PositionalEncoding(int len, int dim) {
  Matrix pe(len, dim);
  for (int t = 0; t < len; ++t) {
    for (int i = 0; i < dim; i += 2) {
      const double angle = t / std::pow(10000.0, static_cast<double>(i) / dim);
      pe.at(t, i) = std::sin(angle);
      if (i + 1 < dim) pe.at(t, i + 1) = std::cos(angle);
    }
  }
  return pe;
}

Matrix CausalMask(int len) {
  Matrix mask(len, len);
  for (int i = 0; i < len; ++i) {
    for (int j = i + 1; j < len; ++j) mask.at(i, j) = -1e30;
  }
  return mask;
}

Var Linear(ParamGraph& pg, const std::string& group, const std::string& prefix,
           const Var& x) {
  return ad::AddBroadcastRow(ad::MatMul(x, pg(group, prefix + ".w")),
                             pg(group, prefix + ".b"));
}

Var Norm(ParamGraph& pg, const std::string& group, const std::string& prefix, const Var& x) {
  return ad::LayerNormRows(x, pg(group, prefix + ".gain"), pg(group, prefix + ".bias"));
}

struct ForwardEnv {
  const G2PConfig* cfg;
  ParamGraph* pg;
  Rng* rng;
  bool train;
};

Var Drop(const ForwardEnv& env, const Var& x) {
  return ad::Dropout(x, env.cfg->dropout, env.rng, env.train);
}

Var MultiHeadAttention(const ForwardEnv& env, const std::string& group,
                       const std::string& prefix, const Var& q_in, const Var& kv_in,
                       const Matrix* mask) {
  ParamGraph& pg = *env.pg;
  const int dim = env.cfg->model_dim;
  const int heads = env.cfg->heads;
  const int dh = dim / heads;
  const Var q = Linear(pg, group, prefix + ".q", q_in);
  const Var k = Linear(pg, group, prefix + ".k", kv_in);
  const Var v = Linear(pg, group, prefix + ".v", kv_in);
  std::vector<Var> ctx;
  ctx.reserve(heads);
  for (int h = 0; h < heads; ++h) {
    const Var qh = ad::SliceCols(q, h * dh, (h + 1) * dh);
    const Var kh = ad::SliceCols(k, h * dh, (h + 1) * dh);
    const Var vh = ad::SliceCols(v, h * dh, (h + 1) * dh);
    Var scores = ad::Scale(ad::MatMul(qh, ad::Transpose(kh)), 1.0 / std::sqrt(dh));
    if (mask != nullptr) scores = ad::Add(scores, ad::Constant(*mask));
    ctx.push_back(ad::MatMul(ad::SoftmaxRows(scores), vh));
  }
  return Linear(pg, group, prefix + ".o", ad::ConcatCols(ctx));
}

Var FeedForward(const ForwardEnv& env, const std::string& group, const std::string& prefix,
                const Var& x) {
  ParamGraph& pg = *env.pg;
  const Var h = Drop(env, ad::Relu(Linear(pg, group, prefix + ".ff1", x)));
  return Drop(env, Linear(pg, group, prefix + ".ff2", h));
}

Var Encode(const ForwardEnv& env, const std::vector<int>& graphemes) {
  ParamGraph& pg = *env.pg;
  const G2PConfig& cfg = *env.cfg;
  Var x = ad::GatherRows(pg(kGraphemeEmbedding, "table"), graphemes);
  x = ad::Add(x, ad::Constant(PositionalEncoding(static_cast<int>(graphemes.size()),
                                                 cfg.model_dim)));
  x = Drop(env, x);
  for (int l = 0; l < cfg.encoder_layers; ++l) {
    const std::string p = "l" + std::to_string(l);
    const Var attn = Drop(env, MultiHeadAttention(env, kEncoderStack, p + ".self", x, x,
                                                  nullptr));
    x = Norm(pg, kEncoderStack, p + ".ln1", ad::Add(x, attn));
    const Var ff = FeedForward(env, kEncoderStack, p, x);
    x = Norm(pg, kEncoderStack, p + ".ln2", ad::Add(x, ff));
  }
  return x;
}

// Decoder hidden states [T x model_dim] for teacher inputs `phonemes_in`.
Var DecodeHidden(const ForwardEnv& env, const Var& enc_out,
                 const std::vector<int>& phonemes_in, int accent_id) {
  ParamGraph& pg = *env.pg;
  const G2PConfig& cfg = *env.cfg;
  const int t_len = static_cast<int>(phonemes_in.size());
  const Var phon_emb = ad::GatherRows(pg(kPrenetPhonemeEmbedding, "table"), phonemes_in);
  const Var acc_emb = ad::GatherRows(pg(kPrenetAccentEmbedding, "table"),
                                     std::vector<int>(t_len, accent_id));
  Var x = Linear(pg, kPrenetProjection, "proj", ad::ConcatCols({phon_emb, acc_emb}));
  x = ad::Add(x, ad::Constant(PositionalEncoding(t_len, cfg.model_dim)));
  x = Drop(env, x);
  const Matrix mask = CausalMask(t_len);
  for (int l = 0; l < cfg.decoder_layers; ++l) {
    const std::string p = "l" + std::to_string(l);
    const Var self_attn =
        Drop(env, MultiHeadAttention(env, kDecoderStack, p + ".self", x, x, &mask));
    x = Norm(pg, kDecoderStack, p + ".ln1", ad::Add(x, self_attn));
    const Var cross =
        Drop(env, MultiHeadAttention(env, kDecoderStack, p + ".cross", x, enc_out, nullptr));
    x = Norm(pg, kDecoderStack, p + ".ln2", ad::Add(x, cross));
    const Var ff = FeedForward(env, kDecoderStack, p, x);
    x = Norm(pg, kDecoderStack, p + ".ln3", ad::Add(x, ff));
  }
  return x;
}

void CheckIndices(const std::vector<int>& seq, int vocab, const char* what) {
  for (int v : seq) {
    if (v < 0 || v >= vocab) {
      throw std::invalid_argument(std::string(what) + " index " + std::to_string(v) +
                                  " out of vocabulary (size " + std::to_string(vocab) + ")");
    }
  }
}

struct G2pGraph {
  Var hidden;
  Var logits;
};

G2pGraph BuildG2p(ParamGraph& pg, const G2PConfig& cfg, const std::vector<int>& graphemes,
                  const std::vector<int>& phonemes_in, int accent_id, Rng* rng, bool train) {
  if (graphemes.empty()) throw std::invalid_argument("g2p: empty grapheme input");
  if (phonemes_in.empty()) throw std::invalid_argument("g2p: empty decoder input");
  CheckIndices(graphemes, cfg.grapheme_vocab, "grapheme");
  CheckIndices(phonemes_in, cfg.phoneme_vocab, "phoneme");
  if (accent_id < 0 || accent_id >= cfg.accent_table_size) {
    throw std::invalid_argument("g2p: accent id out of table");
  }
  ForwardEnv env{&cfg, &pg, rng, train};
  G2pGraph out;
  const Var enc = Encode(env, graphemes);
  out.hidden = DecodeHidden(env, enc, phonemes_in, accent_id);
  out.logits = Linear(pg, kOutputProjection, "proj", out.hidden);
  return out;
}

}  // namespace

ParameterStore InitG2p(const G2PConfig& config, std::uint64_t seed) {
  config.Validate();
  ParameterStore store;
  store.model_kind = "g2p";
  config.ToStore(&store);
  Rng rng(Rng::mix(seed, StableHash("g2p-init")));

  store.add_group(kGraphemeEmbedding);
  Matrix& ge = store.add_param(kGraphemeEmbedding, "table", config.grapheme_vocab,
                               config.model_dim);
  InitUniform(&ge, 1.0 / std::sqrt(static_cast<double>(config.model_dim)), &rng);

  store.add_group(kEncoderStack);
  for (int l = 0; l < config.encoder_layers; ++l) {
    const std::string p = "l" + std::to_string(l);
    AddAttention(&store, kEncoderStack, p + ".self", config.model_dim, &rng);
    AddNorm(&store, kEncoderStack, p + ".ln1", config.model_dim);
    AddLinear(&store, kEncoderStack, p + ".ff1", config.model_dim, config.ff_dim, &rng);
    AddLinear(&store, kEncoderStack, p + ".ff2", config.ff_dim, config.model_dim, &rng);
    AddNorm(&store, kEncoderStack, p + ".ln2", config.model_dim);
  }

  store.add_group(kPrenetPhonemeEmbedding);
  Matrix& pe = store.add_param(kPrenetPhonemeEmbedding, "table", config.phoneme_vocab,
                               config.model_dim);
  InitUniform(&pe, 1.0 / std::sqrt(static_cast<double>(config.model_dim)), &rng);

  store.add_group(kPrenetAccentEmbedding);
  Matrix& ae = store.add_param(kPrenetAccentEmbedding, "table", config.accent_table_size,
                               config.accent_dim);
  InitUniform(&ae, 1.0 / std::sqrt(static_cast<double>(config.accent_dim)), &rng);

  store.add_group(kPrenetProjection);
  AddLinear(&store, kPrenetProjection, "proj", config.model_dim + config.accent_dim,
            config.model_dim, &rng);

  store.add_group(kDecoderStack);
  for (int l = 0; l < config.decoder_layers; ++l) {
    const std::string p = "l" + std::to_string(l);
    AddAttention(&store, kDecoderStack, p + ".self", config.model_dim, &rng);
    AddNorm(&store, kDecoderStack, p + ".ln1", config.model_dim);
    AddAttention(&store, kDecoderStack, p + ".cross", config.model_dim, &rng);
    AddNorm(&store, kDecoderStack, p + ".ln2", config.model_dim);
    AddLinear(&store, kDecoderStack, p + ".ff1", config.model_dim, config.ff_dim, &rng);
    AddLinear(&store, kDecoderStack, p + ".ff2", config.ff_dim, config.model_dim, &rng);
    AddNorm(&store, kDecoderStack, p + ".ln3", config.model_dim);
  }

  store.add_group(kOutputProjection);
  AddLinear(&store, kOutputProjection, "proj", config.model_dim, config.phoneme_vocab, &rng);
  return store;
}

Matrix Forward(const ParameterStore& store, const std::vector<int>& graphemes,
               const std::vector<int>& phonemes_in, int accent_id) {
  const G2PConfig cfg = G2PConfig::FromStore(store);
  ParamGraph pg(store, /*training=*/false);
  return BuildG2p(pg, cfg, graphemes, phonemes_in, accent_id, nullptr, false).logits.value();
}

double Loss(const Matrix& logits, const std::vector<int>& targets, int pad_index) {
  if (static_cast<int>(targets.size()) != logits.rows()) {
    throw std::invalid_argument("g2p_loss: logits/targets length mismatch");
  }
  return ad::CrossEntropyRows(ad::Constant(logits), targets, pad_index).scalar();
}

DecodeResult Decode(const ParameterStore& store, const std::vector<int>& graphemes,
                    int accent_id, int max_len) {
  const G2PConfig cfg = G2PConfig::FromStore(store);
  if (max_len <= 0) max_len = cfg.max_decode_len;
  DecodeResult result;
  std::vector<int> phon_in{cfg.bos_index};
  ParamGraph pg(store, /*training=*/false);
  for (int step = 0; step < max_len; ++step) {
    const Matrix logits =
        BuildG2p(pg, cfg, graphemes, phon_in, accent_id, nullptr, false).logits.value();
    const double* last = logits.row_ptr(logits.rows() - 1);
    const int next = static_cast<int>(
        std::max_element(last, last + logits.cols()) - last);
    if (next == cfg.eos_index) return result;
    result.phonemes.push_back(next);
    phon_in.push_back(next);
  }
  result.truncated = true;
  return result;
}

BottleneckResult ExtractBottleneck(const ParameterStore& store,
                                   const std::vector<int>& graphemes, int accent_id,
                                   const std::optional<std::vector<int>>& framed_phonemes) {
  const G2PConfig cfg = G2PConfig::FromStore(store);
  BottleneckResult result;
  std::vector<int> framed;
  if (framed_phonemes.has_value()) {
    framed = *framed_phonemes;
    if (framed.size() < 2 || framed.front() != cfg.bos_index ||
        framed.back() != cfg.eos_index) {
      throw std::invalid_argument("extract_bottleneck: framed sequence must be BOS...EOS");
    }
    result.phonemes.assign(framed.begin() + 1, framed.end() - 1);
  } else {
    const DecodeResult dec = Decode(store, graphemes, accent_id, -1);
    result.phonemes = dec.phonemes;
    result.truncated = dec.truncated;
    framed.push_back(cfg.bos_index);
    framed.insert(framed.end(), dec.phonemes.begin(), dec.phonemes.end());
    if (!dec.truncated) framed.push_back(cfg.eos_index);
  }
  // Teacher inputs are the framed sequence shy of its last token; hidden
  // state t corresponds to the step that emits framed[t + 1].
  const std::vector<int> phon_in(framed.begin(), framed.end() - (framed.empty() ? 0 : 1));
  ParamGraph pg(store, /*training=*/false);
  result.features =
      BuildG2p(pg, cfg, graphemes, phon_in, accent_id, nullptr, false).hidden.value();
  return result;
}

std::set<std::string> TrainableMask(const std::string& stage) {
  if (stage == "pretrain") {
    return {kGraphemeEmbedding,       kEncoderStack,     kPrenetPhonemeEmbedding,
            kPrenetAccentEmbedding,   kPrenetProjection, kDecoderStack,
            kOutputProjection};
  }
  if (stage == "finetune") {
    return {kPrenetAccentEmbedding, kPrenetPhonemeEmbedding, kPrenetProjection,
            kOutputProjection};
  }
  throw std::invalid_argument("g2p_trainable_mask: unknown stage '" + stage + "'");
}

std::pair<double, GradientBag> LossAndGradients(const ParameterStore& store,
                                                const lexicon::G2PExample& example) {
  const G2PConfig cfg = G2PConfig::FromStore(store);
  if (example.phonemes.size() < 2) {
    throw std::invalid_argument("loss_and_gradients: example lacks BOS/EOS framing");
  }
  const std::vector<int> phon_in(example.phonemes.begin(), example.phonemes.end() - 1);
  const std::vector<int> targets(example.phonemes.begin() + 1, example.phonemes.end());
  ParamGraph pg(store, /*training=*/true);
  const G2pGraph graph =
      BuildG2p(pg, cfg, example.graphemes, phon_in, example.accent.id, nullptr, false);
  const Var loss = ad::CrossEntropyRows(graph.logits, targets, cfg.pad_index);
  ad::Backward(loss);
  GradientBag bag;
  pg.CollectGrads(&bag);
  return {loss.scalar(), bag};
}

double EvalLoss(const ParameterStore& store, const std::vector<lexicon::G2PExample>& corpus) {
  const G2PConfig cfg = G2PConfig::FromStore(store);
  double total = 0.0;
  for (const auto& ex : corpus) {
    const std::vector<int> phon_in(ex.phonemes.begin(), ex.phonemes.end() - 1);
    const std::vector<int> targets(ex.phonemes.begin() + 1, ex.phonemes.end());
    const Matrix logits = Forward(store, ex.graphemes, phon_in, ex.accent.id);
    total += Loss(logits, targets, cfg.pad_index);
  }
  return total / static_cast<double>(corpus.size());
}

TrainHistory Train(ParameterStore* store, const std::vector<lexicon::G2PExample>& corpus,
                   const std::string& stage, const TrainHyper& hyper,
                   const std::vector<lexicon::G2PExample>& validation) {
  if (corpus.empty()) throw std::invalid_argument("train_g2p: empty corpus");
  for (const auto& ex : corpus) {
    if (ex.phonemes.size() < 2) {
      throw std::invalid_argument("train_g2p: example '" + ex.id + "' lacks BOS/EOS framing");
    }
  }
  const G2PConfig cfg = G2PConfig::FromStore(*store);
  store->apply_trainable_mask(TrainableMask(stage));
  const std::vector<lexicon::G2PExample>& val = validation.empty() ? corpus : validation;

  Rng rng(Rng::mix(hyper.seed, StableHash("g2p-train-" + stage)));
  Rng shuffle_rng = rng.fork(1);
  Rng dropout_rng = rng.fork(2);
  AdamOptimizer opt(hyper.lr);

  TrainHistory history;
  ParameterStore best = *store;
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = -1;

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  const int batch_size = std::max(1, hyper.batch);

  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.uniform_int(i)]);
    }
    double train_loss = 0.0;
    std::size_t cursor = 0;
    while (cursor < order.size()) {
      const std::size_t batch_end = std::min(cursor + batch_size, order.size());
      const double inv_batch = 1.0 / static_cast<double>(batch_end - cursor);
      ParamGraph pg(*store, /*training=*/true);
      for (std::size_t i = cursor; i < batch_end; ++i) {
        const auto& ex = corpus[order[i]];
        const std::vector<int> phon_in(ex.phonemes.begin(), ex.phonemes.end() - 1);
        const std::vector<int> targets(ex.phonemes.begin() + 1, ex.phonemes.end());
        const G2pGraph graph =
            BuildG2p(pg, cfg, ex.graphemes, phon_in, ex.accent.id, &dropout_rng, true);
        const Var loss = ad::CrossEntropyRows(graph.logits, targets, cfg.pad_index);
        train_loss += loss.scalar();
        ad::Backward(loss, inv_batch);
      }
      GradientBag grads;
      pg.CollectGrads(&grads);
      opt.Step(store, grads);
      cursor = batch_end;
    }
    train_loss /= static_cast<double>(corpus.size());
    const double val_loss = EvalLoss(*store, val);
    history.epochs.push_back({epoch, train_loss, val_loss});
    std::ostringstream line;
    line << "g2p stage=" << stage << " epoch=" << epoch << " train=" << train_loss
         << " val=" << val_loss;
    store->history.push_back(line.str());
    if (val_loss < best_val) {
      best_val = val_loss;
      best_epoch = epoch;
      best = *store;
    }
  }
  // Keep the checkpoint with the lowest validation loss.
  std::vector<std::string> full_history = store->history;
  *store = std::move(best);
  store->history = std::move(full_history);
  history.best_epoch = best_epoch;
  history.best_val_loss = best_val;
  return history;
}

}  // namespace accentts::g2p
