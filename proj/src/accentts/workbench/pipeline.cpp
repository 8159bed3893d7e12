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

#include "accentts/workbench/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "json.hpp"

#include "accentts/acoustic/acoustic.hpp"
#include "accentts/core/array_io.hpp"
#include "accentts/g2p/g2p.hpp"
#include "accentts/lexicon/lexicon.hpp"
#include "accentts/metrics/metrics.hpp"
#include "accentts/signal/signal.hpp"
#include "accentts/workbench/toy_corpus.hpp"

namespace accentts::workbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void RequireDir(const std::string& path, const char* what) {
  if (!fs::is_directory(path)) {
    throw std::invalid_argument(std::string(what) + " directory does not exist: " + path);
  }
}

std::string OutDir(const Config& cfg) {
  const std::string out = cfg.str("out");
  fs::create_directories(out);
  return out;
}

void WriteReport(const std::string& out_dir, const json& report) {
  std::ofstream f(fs::path(out_dir) / "report.json");
  f << report.dump(2) << "\n";
}

json PartitionJson(const ParameterStore& store) {
  json j;
  j["trainable"] = store.trainable_groups();
  j["frozen"] = store.frozen_groups();
  return j;
}

std::vector<std::string> ReadLines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open text file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

// --- G2P stage helpers ----------------------------------------------------

struct G2pData {
  std::vector<lexicon::G2PExample> train;
  std::vector<lexicon::G2PExample> val;
  int dropped = 0;
};

// Deterministic multi-word sentences drawn from a word list, so utterance
// training always stays inside the stage's lexicon coverage.
std::vector<std::string> GenerateSentences(const std::vector<std::string>& words, int count,
                                           std::uint64_t seed) {
  Rng rng(Rng::mix(seed, StableHash("g2p-sentences")));
  std::vector<std::string> sentences;
  sentences.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int n_words = 2 + static_cast<int>(rng.uniform_int(3));
    std::ostringstream text;
    for (int w = 0; w < n_words; ++w) {
      if (w) text << " ";
      text << words[rng.uniform_int(words.size())];
    }
    sentences.push_back(text.str());
  }
  return sentences;
}

// Word lists become single-word sentences, optionally augmented with
// generated multi-word utterances; a deterministic every-k-th split carves
// out validation examples.
G2pData BuildWordExamples(const ToyCorpus& corpus, const std::vector<std::string>& accents,
                          const std::string& words_file, std::pair<int, int> bounds,
                          double val_fraction, int sentences_per_accent,
                          std::uint64_t seed) {
  G2pData data;
  const auto words = ReadLines((fs::path(corpus.dir) / words_file).string());
  std::vector<std::string> texts = words;
  if (sentences_per_accent > 0) {
    const auto sentences = GenerateSentences(words, sentences_per_accent, seed);
    texts.insert(texts.end(), sentences.begin(), sentences.end());
  }
  const int stride = val_fraction > 0.0
                         ? std::max(2, static_cast<int>(std::lround(1.0 / val_fraction)))
                         : 0;
  for (const auto& accent_name : accents) {
    const int accent_id = corpus.accent_id(accent_name);
    lexicon::LexiconLoadResult loaded = lexicon::LoadLexicon(
        (fs::path(corpus.dir) / ("lexicon_" + accent_name + ".tsv")).string(),
        {accent_id, accent_name}, corpus.inventory);
    lexicon::CorpusBuildResult built =
        lexicon::BuildG2pCorpus(texts, loaded.lexicon, loaded.lexicon.accent, bounds,
                                corpus.chars, corpus.inventory);
    data.dropped += built.dropped_oov + built.dropped_length;
    for (std::size_t i = 0; i < built.examples.size(); ++i) {
      auto& ex = built.examples[i];
      ex.id = accent_name + "_" + ex.id;
      if (stride > 0 && static_cast<int>(i) % stride == stride - 1) {
        data.val.push_back(std::move(ex));
      } else {
        data.train.push_back(std::move(ex));
      }
    }
  }
  if (data.train.empty()) throw std::invalid_argument("g2p corpus is empty after filtering");
  return data;
}

g2p::G2PConfig G2pConfigFromCfg(const Config& cfg, const ToyCorpus& corpus) {
  g2p::G2PConfig mc;
  mc.model_dim = cfg.int_or("model_dim", 256);
  mc.encoder_layers = cfg.int_or("encoder_layers", 3);
  mc.decoder_layers = cfg.int_or("decoder_layers", 3);
  mc.heads = cfg.int_or("heads", 8);
  mc.ff_dim = cfg.int_or("ff_dim", 512);
  mc.dropout = cfg.dbl_or("dropout", 0.1);
  mc.accent_dim = cfg.int_or("accent_dim", 32);
  mc.max_decode_len = cfg.int_or("max_decode_len", 200);
  mc.grapheme_vocab = corpus.chars.size();
  mc.phoneme_vocab = corpus.inventory.size();
  mc.accent_table_size = static_cast<int>(corpus.accents.size());
  mc.pad_index = corpus.inventory.pad();
  mc.bos_index = corpus.inventory.bos();
  mc.eos_index = corpus.inventory.eos();
  mc.wb_index = corpus.inventory.wb();
  mc.Validate();
  return mc;
}

void WriteG2pLossCsv(const std::string& path, const g2p::TrainHistory& history) {
  std::ofstream f(path);
  f << "epoch,train_loss,val_loss\n";
  for (const auto& e : history.epochs) {
    f << e.epoch << "," << e.train_loss << "," << e.val_loss << "\n";
  }
}

void WriteAcousticLossCsv(const std::string& path, const acoustic::TrainHistory& history) {
  std::ofstream f(path);
  f << "epoch,total,mel,stop,pitch,duration\n";
  for (const auto& e : history.epochs) {
    f << e.epoch << "," << e.total << "," << e.mel << "," << e.stop << "," << e.pitch << ","
      << e.duration << "\n";
  }
}

// --- TTS stage helpers ----------------------------------------------------

struct PreparedDataset {
  std::vector<acoustic::UttExample> items;
  signal::NormStats stats;
  std::string manifest_path;
};

std::vector<signal::AlignmentSegment> ToSegments(
    const std::vector<signal::AlignmentEntry>& entries,
    const lexicon::PhonemeInventory& inv) {
  std::vector<signal::AlignmentSegment> segments;
  segments.reserve(entries.size());
  for (const auto& e : entries) {
    segments.push_back({inv.index(e.symbol), e.start_frame, e.end_frame});
  }
  return segments;
}

// Extracts mel/F0/duration targets and teacher-forced bottlenecks for every
// matching utterance. When `stats` is absent the F0 normalization is fit on
// this dataset (pre-training pass) and returned for reuse.
PreparedDataset PrepareTtsDataset(const ToyCorpus& corpus,
                                  const std::vector<std::string>& accents,
                                  const std::string& split,
                                  const ParameterStore& g2p_store,
                                  const std::optional<signal::NormStats>& stats,
                                  const std::string& out_dir, bool trim) {
  std::set<int> accent_ids;
  for (const auto& name : accents) accent_ids.insert(corpus.accent_id(name));

  struct Raw {
    const ToyUtterance* utt;
    Matrix mel;
    std::vector<double> phoneme_f0;
    std::vector<double> logdur;
    std::vector<int> framed;
    std::vector<signal::AlignmentSegment> segments;
  };
  std::vector<Raw> raws;
  for (const auto& utt : corpus.utterances) {
    if (!accent_ids.count(utt.accent_id) || utt.split != split) continue;
    Raw raw;
    raw.utt = &utt;
    signal::Waveform wave = signal::ReadWav((fs::path(corpus.dir) / utt.wav_path).string());
    if (trim) wave = signal::TrimSilence(wave);
    raw.mel = signal::MelSpectrogram(wave);
    const auto entries =
        signal::ReadAlignmentTsv((fs::path(corpus.dir) / utt.align_path).string());
    raw.segments = ToSegments(entries, corpus.inventory);
    signal::ValidateSegments(raw.segments, raw.mel.rows());
    const signal::F0Contour contour = signal::EstimateF0(wave);
    const std::vector<double> interp = signal::InterpolateUnvoiced(contour);
    raw.phoneme_f0 = signal::PhonemeAverageF0(interp, raw.segments);
    raw.logdur = signal::DurationsFromAlignment(raw.segments);
    raw.framed.push_back(corpus.inventory.bos());
    for (const auto& seg : raw.segments) raw.framed.push_back(seg.phoneme);
    raws.push_back(std::move(raw));
  }
  if (raws.empty()) throw std::invalid_argument("tts dataset: no matching utterances");

  // F0 normalization stats over the whole preparation set.
  std::vector<double> all_f0;
  for (const auto& raw : raws) {
    all_f0.insert(all_f0.end(), raw.phoneme_f0.begin(), raw.phoneme_f0.end());
  }
  PreparedDataset out;
  out.stats = signal::F0StatsAndNormalize(all_f0, stats).second;

  const fs::path feat_dir = fs::path(out_dir) / "features";
  fs::create_directories(feat_dir);
  std::ofstream manifest(fs::path(out_dir) / "dataset.jsonl");
  for (auto& raw : raws) {
    acoustic::UttExample item;
    item.id = raw.utt->utt_id;
    const auto bn = g2p::ExtractBottleneck(
        g2p_store, corpus.chars.Encode(lexicon::NormalizeText(raw.utt->text)),
        raw.utt->accent_id, raw.framed);
    item.bottleneck = bn.features;
    if (item.bottleneck.rows() != static_cast<int>(raw.segments.size())) {
      throw std::runtime_error("tts dataset: bottleneck/alignment length mismatch in " +
                               item.id);
    }
    item.speaker =
        ReadF32Array((fs::path(corpus.dir) / corpus.speaker_files.at(raw.utt->speaker)).string());
    item.gt_mel = std::move(raw.mel);
    item.gt_stop.assign(item.gt_mel.rows(), 0.0);
    item.gt_stop.back() = 1.0;
    item.gt_pitch = signal::F0StatsAndNormalize(raw.phoneme_f0, out.stats).first;
    item.gt_logdur = std::move(raw.logdur);

    const fs::path utt_dir = feat_dir / item.id;
    fs::create_directories(utt_dir);
    WriteF32Array((utt_dir / "bottleneck.f32").string(), item.bottleneck);
    WriteF32Array((utt_dir / "mel.f32").string(), item.gt_mel);
    WriteF32Array((utt_dir / "f0.f32").string(), Matrix::ColumnVector(item.gt_pitch));
    WriteF32Array((utt_dir / "dur.f32").string(), Matrix::ColumnVector(item.gt_logdur));
    WriteF32Array((utt_dir / "stop.f32").string(), Matrix::ColumnVector(item.gt_stop));
    json rec = {
        {"utt_id", item.id},
        {"bottleneck_path", (utt_dir / "bottleneck.f32").string()},
        {"speaker_path",
         (fs::path(corpus.dir) / corpus.speaker_files.at(raw.utt->speaker)).string()},
        {"mel_path", (utt_dir / "mel.f32").string()},
        {"f0_path", (utt_dir / "f0.f32").string()},
        {"dur_path", (utt_dir / "dur.f32").string()},
        {"stop_path", (utt_dir / "stop.f32").string()}};
    manifest << rec.dump() << "\n";
    out.items.push_back(std::move(item));
  }
  out.manifest_path = (fs::path(out_dir) / "dataset.jsonl").string();
  return out;
}

acoustic::AcousticConfig AcousticConfigFromCfg(const Config& cfg, int bottleneck_dim) {
  acoustic::AcousticConfig mc;
  mc.bottleneck_dim = bottleneck_dim;
  mc.enc_dim = cfg.int_or("enc_dim", 512);
  mc.enc_convs = cfg.int_or("enc_convs", 3);
  mc.enc_kernel = cfg.int_or("enc_kernel", 5);
  mc.birnn_dim = cfg.int_or("birnn_dim", 512);
  mc.dec_rnn_dim = cfg.int_or("dec_rnn_dim", 1024);
  mc.prenet_dim = cfg.int_or("prenet_dim", 256);
  mc.mel_bins = cfg.int_or("mel_bins", 80);
  mc.postnet_convs = cfg.int_or("postnet_convs", 5);
  mc.postnet_kernel = cfg.int_or("postnet_kernel", 5);
  mc.postnet_channels = cfg.int_or("postnet_channels", 512);
  mc.attn_dim = cfg.int_or("attn_dim", 128);
  mc.attn_loc_kernel = cfg.int_or("attn_loc_kernel", 31);
  mc.attn_loc_channels = cfg.int_or("attn_loc_channels", 32);
  mc.pred_dim1 = cfg.int_or("pred_dim1", 512);
  mc.pred_dim2 = cfg.int_or("pred_dim2", 256);
  mc.pred_kernel = cfg.int_or("pred_kernel", 3);
  mc.pitch_bins = cfg.int_or("pitch_bins", 256);
  mc.pitch_embed_dim = cfg.int_or("pitch_embed_dim", mc.birnn_dim);
  mc.speaker_dim = cfg.int_or("speaker_dim", 256);
  mc.max_frames_factor = cfg.int_or("max_frames_factor", 10);
  mc.Validate();
  return mc;
}

acoustic::LossWeights WeightsFromCfg(const Config& cfg) {
  acoustic::LossWeights w;
  w.alpha = cfg.dbl_or("alpha", 1.0);
  w.beta = cfg.dbl_or("beta", 1.0);
  w.gamma = cfg.dbl_or("gamma", 1.0);
  w.delta = cfg.dbl_or("delta", 1.0);
  return w;
}

signal::NormStats StatsFromStore(const ParameterStore& store) {
  if (!store.has_config("f0_stats_mean") || !store.has_config("f0_stats_std")) {
    throw std::runtime_error("checkpoint carries no F0 normalization stats");
  }
  return {store.config_double("f0_stats_mean"), store.config_double("f0_stats_std")};
}

// --- Stage implementations -------------------------------------------------

StageReport MakeToyCorpusStage(const Config& cfg) {
  const std::string out = OutDir(cfg);
  ToyCorpusSizes sizes;
  sizes.words = cfg.int_or("toy.words", sizes.words);
  sizes.heldout_words = cfg.int_or("toy.heldout_words", sizes.heldout_words);
  sizes.finetune_words = cfg.int_or("toy.finetune_words", sizes.finetune_words);
  sizes.utterances_per_accent = cfg.int_or("toy.utterances", sizes.utterances_per_accent);
  sizes.test_utterances_per_accent =
      cfg.int_or("toy.test_utterances", sizes.test_utterances_per_accent);
  sizes.min_words_per_utterance = cfg.int_or("toy.min_words", sizes.min_words_per_utterance);
  sizes.max_words_per_utterance = cfg.int_or("toy.max_words", sizes.max_words_per_utterance);
  const ToyCorpusSummary summary =
      MakeToyCorpus(ToyAccentSpec::Default(), sizes, cfg.seed(), out);

  StageReport report{"make-toy-corpus", out, {}, {}};
  report.metrics["accents"] = summary.num_accents;
  report.metrics["utterances"] = summary.num_utterances;
  report.metrics["words"] = summary.num_words;
  report.paths["utterances_manifest"] = summary.utterances_manifest;
  json j = {{"stage", report.stage},
            {"accents", summary.num_accents},
            {"utterances", summary.num_utterances},
            {"words", summary.num_words},
            {"lexicons", summary.lexicon_paths}};
  WriteReport(out, j);
  return report;
}

StageReport LexiconStatsStage(const Config& cfg) {
  const std::string out = OutDir(cfg);
  const auto inv = lexicon::PhonemeInventory::LoadTsv(cfg.str("inventory"));
  const auto a = lexicon::LoadLexicon(cfg.str("lexicon_a"), {0, "a"}, inv);
  const auto b = lexicon::LoadLexicon(cfg.str("lexicon_b"), {1, "b"}, inv);
  const auto stats = lexicon::CompareLexicons(a.lexicon, b.lexicon, inv);

  StageReport report{"lexicon-stats", out, {}, {}};
  report.metrics["shared_word_pct"] = stats.shared_word_pct;
  report.metrics["accented_word_pct"] = stats.accented_word_pct;
  report.metrics["vowel_variation_pct"] = stats.vowel_variation_pct;
  report.metrics["consonant_variation_pct"] = stats.consonant_variation_pct;
  json j = {{"stage", report.stage},
            {"shared_word_pct", stats.shared_word_pct},
            {"accented_word_pct", stats.accented_word_pct},
            {"vowel_variation_pct", stats.vowel_variation_pct},
            {"consonant_variation_pct", stats.consonant_variation_pct},
            {"common_words", stats.common_words},
            {"accented_words", stats.accented_words}};
  WriteReport(out, j);
  std::cout << "shared " << stats.shared_word_pct << "% accented " << stats.accented_word_pct
            << "% vowel-var " << stats.vowel_variation_pct << "% consonant-var "
            << stats.consonant_variation_pct << "%\n";
  return report;
}

std::vector<std::string> DefaultPretrainAccents(const ToyCorpus& corpus) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i + 1 < corpus.accents.size(); ++i) {
    names.push_back(corpus.accents[i].name);
  }
  if (names.empty()) names.push_back(corpus.accents.front().name);
  return names;
}

StageReport PretrainG2pStage(const Config& cfg) {
  const std::string out = OutDir(cfg);
  RequireDir(cfg.str("corpus"), "corpus");
  const ToyCorpus corpus = ToyCorpus::Open(cfg.str("corpus"));
  const auto accents = cfg.list_or("accents", DefaultPretrainAccents(corpus));
  const std::pair<int, int> bounds{cfg.int_or("len_min", 10), cfg.int_or("len_max", 200)};
  G2pData data = BuildWordExamples(corpus, accents, cfg.str_or("words_file", "words_train.txt"),
                                   bounds, cfg.dbl_or("val_fraction", 0.1),
                                   cfg.int_or("sentences_per_accent", 0), cfg.seed());

  lexicon::WriteCorpusManifest((fs::path(out) / "corpus_train.jsonl").string(), data.train);
  lexicon::WriteCorpusManifest((fs::path(out) / "corpus_val.jsonl").string(), data.val);

  ParameterStore store = g2p::InitG2p(G2pConfigFromCfg(cfg, corpus), cfg.seed());
  g2p::TrainHyper hyper;
  hyper.lr = cfg.dbl_or("lr", 5e-4);
  hyper.batch = cfg.int_or("batch", 128);
  hyper.epochs = cfg.int_or("epochs", 100);
  hyper.seed = cfg.seed();
  const g2p::TrainHistory history = g2p::Train(&store, data.train, "pretrain", hyper, data.val);

  const std::string ckpt = (fs::path(out) / "checkpoint").string();
  store.Save(ckpt);
  WriteG2pLossCsv((fs::path(out) / "loss.csv").string(), history);

  StageReport report{"pretrain-g2p", out, {}, {}};
  report.paths["checkpoint"] = ckpt;
  report.metrics["best_epoch"] = history.best_epoch;
  report.metrics["best_val_loss"] = history.best_val_loss;
  json j = {{"stage", report.stage},
            {"checkpoint", ckpt},
            {"train_examples", data.train.size()},
            {"val_examples", data.val.size()},
            {"best_epoch", history.best_epoch},
            {"best_val_loss", history.best_val_loss},
            {"partition", PartitionJson(store)}};
  WriteReport(out, j);
  return report;
}

StageReport FinetuneG2pStage(const Config& cfg) {
  const std::string out = OutDir(cfg);
  RequireDir(cfg.str("corpus"), "corpus");
  RequireDir(cfg.str("init"), "init checkpoint");
  const ToyCorpus corpus = ToyCorpus::Open(cfg.str("corpus"));
  const std::string accent = cfg.str_or("accent", corpus.accents.back().name);
  const std::pair<int, int> bounds{cfg.int_or("len_min", 10), cfg.int_or("len_max", 200)};
  G2pData data =
      BuildWordExamples(corpus, {accent}, cfg.str_or("words_file", "words_finetune.txt"),
                        bounds, cfg.dbl_or("val_fraction", 0.1),
                        cfg.int_or("sentences_per_accent", 0), cfg.seed());

  lexicon::WriteCorpusManifest((fs::path(out) / "corpus_train.jsonl").string(), data.train);

  ParameterStore store = ParameterStore::Load(cfg.str("init"));
  g2p::TrainHyper hyper;
  hyper.lr = cfg.dbl_or("lr", 5e-4);
  hyper.batch = cfg.int_or("batch", 128);
  hyper.epochs = cfg.int_or("epochs", 50);
  hyper.seed = cfg.seed();
  const g2p::TrainHistory history = g2p::Train(&store, data.train, "finetune", hyper, data.val);

  const std::string ckpt = (fs::path(out) / "checkpoint").string();
  store.Save(ckpt);
  WriteG2pLossCsv((fs::path(out) / "loss.csv").string(), history);

  StageReport report{"finetune-g2p", out, {}, {}};
  report.paths["checkpoint"] = ckpt;
  report.metrics["best_epoch"] = history.best_epoch;
  report.metrics["best_val_loss"] = history.best_val_loss;
  json j = {{"stage", report.stage},
            {"checkpoint", ckpt},
            {"accent", accent},
            {"train_examples", data.train.size()},
            {"best_epoch", history.best_epoch},
            {"best_val_loss", history.best_val_loss},
            {"partition", PartitionJson(store)}};
  WriteReport(out, j);
  return report;
}

StageReport EvalG2pStage(const Config& cfg) {
  const std::string out = OutDir(cfg);
  RequireDir(cfg.str("corpus"), "corpus");
  RequireDir(cfg.str("checkpoint"), "checkpoint");
  const ToyCorpus corpus = ToyCorpus::Open(cfg.str("corpus"));
  const std::string accent = cfg.str_or("accent", corpus.accents.back().name);
  const std::pair<int, int> bounds{cfg.int_or("len_min", 10), cfg.int_or("len_max", 200)};
  G2pData data =
      BuildWordExamples(corpus, {accent}, cfg.str_or("words_file", "words_heldout.txt"),
                        bounds, /*val_fraction=*/0.0,
                        cfg.int_or("sentences_per_accent", 0), 0);
  const ParameterStore store = ParameterStore::Load(cfg.str("checkpoint"));

  long total_edits = 0, total_ref = 0;
  long word_edits = 0, word_ref = 0;
  std::ofstream metrics_file(fs::path(out) / "metrics.jsonl");
  for (const auto& ex : data.train) {
    const std::vector<int> ref(ex.phonemes.begin() + 1, ex.phonemes.end() - 1);
    const auto decoded = g2p::Decode(store, ex.graphemes, ex.accent.id, -1);
    const double per = metrics::Per(ref, decoded.phonemes);
    const double wer = metrics::Wer(ref, decoded.phonemes, corpus.inventory.wb());
    total_edits += metrics::Levenshtein(ref, decoded.phonemes);
    total_ref += static_cast<long>(ref.size());
    const auto ref_words = 1 + std::count(ref.begin(), ref.end(), corpus.inventory.wb());
    word_ref += ref_words;
    word_edits += static_cast<long>(std::lround(wer * ref_words));
    metrics_file << json{{"utt_id", ex.id}, {"metric", "per"}, {"value", per}}.dump() << "\n";
    metrics_file << json{{"utt_id", ex.id}, {"metric", "wer"}, {"value", wer}}.dump() << "\n";
  }
  const double per = total_ref > 0 ? static_cast<double>(total_edits) / total_ref : 0.0;
  const double wer = word_ref > 0 ? static_cast<double>(word_edits) / word_ref : 0.0;

  StageReport report{"eval-g2p", out, {}, {}};
  report.metrics["per"] = per;
  report.metrics["wer"] = wer;
  report.paths["metrics"] = (fs::path(out) / "metrics.jsonl").string();
  json j = {{"stage", report.stage}, {"accent", accent},       {"per", per},
            {"wer", wer},            {"examples", data.train.size()}};
  WriteReport(out, j);
  std::cout << "eval-g2p accent=" << accent << " per=" << per << " wer=" << wer << "\n";
  return report;
}

StageReport PretrainTtsStage(const Config& cfg) {
  const std::string out = OutDir(cfg);
  RequireDir(cfg.str("corpus"), "corpus");
  RequireDir(cfg.str("g2p"), "g2p checkpoint");
  const ToyCorpus corpus = ToyCorpus::Open(cfg.str("corpus"));
  const auto accents = cfg.list_or("accents", DefaultPretrainAccents(corpus));
  const ParameterStore g2p_store = ParameterStore::Load(cfg.str("g2p"));

  PreparedDataset data =
      PrepareTtsDataset(corpus, accents, "train", g2p_store, std::nullopt, out,
                        cfg.bool_or("trim", false));

  acoustic::AcousticConfig mc =
      AcousticConfigFromCfg(cfg, g2p_store.config_int("model_dim"));
  ParameterStore store = acoustic::InitAcoustic(mc, cfg.seed());
  store.set_config("f0_stats_mean", std::to_string(data.stats.mean));
  store.set_config("f0_stats_std", std::to_string(data.stats.std));

  acoustic::TrainHyper hyper;
  hyper.lr = cfg.dbl_or("lr", 1e-3);
  hyper.batch = cfg.int_or("batch", 32);
  hyper.epochs = cfg.int_or("epochs", 800);
  hyper.seed = cfg.seed();
  hyper.weights = WeightsFromCfg(cfg);
  const acoustic::TrainHistory history = acoustic::Train(&store, data.items, "pretrain", hyper);

  const std::string ckpt = (fs::path(out) / "checkpoint").string();
  store.Save(ckpt);
  WriteAcousticLossCsv((fs::path(out) / "loss.csv").string(), history);

  StageReport report{"pretrain-tts", out, {}, {}};
  report.paths["checkpoint"] = ckpt;
  report.paths["dataset"] = data.manifest_path;
  report.metrics["first_epoch_loss"] = history.epochs.front().total;
  report.metrics["final_epoch_loss"] = history.epochs.back().total;
  json j = {{"stage", report.stage},
            {"checkpoint", ckpt},
            {"utterances", data.items.size()},
            {"f0_stats", {{"mean", data.stats.mean}, {"std", data.stats.std}}},
            {"first_epoch_loss", history.epochs.front().total},
            {"final_epoch_loss", history.epochs.back().total},
            {"partition", PartitionJson(store)}};
  WriteReport(out, j);
  return report;
}

StageReport FinetuneTtsStage(const Config& cfg) {
  const std::string out = OutDir(cfg);
  RequireDir(cfg.str("corpus"), "corpus");
  RequireDir(cfg.str("init"), "init checkpoint");
  RequireDir(cfg.str("g2p"), "g2p checkpoint");
  const ToyCorpus corpus = ToyCorpus::Open(cfg.str("corpus"));
  const std::string accent = cfg.str_or("accent", corpus.accents.back().name);
  const ParameterStore g2p_store = ParameterStore::Load(cfg.str("g2p"));

  ParameterStore store = ParameterStore::Load(cfg.str("init"));
  const signal::NormStats stats = StatsFromStore(store);
  PreparedDataset data =
      PrepareTtsDataset(corpus, {accent}, "train", g2p_store, stats, out,
                        cfg.bool_or("trim", false));
  const int max_utts = cfg.int_or("max_utterances", 0);
  if (max_utts > 0 && static_cast<int>(data.items.size()) > max_utts) {
    data.items.resize(max_utts);
  }

  acoustic::TrainHyper hyper;
  hyper.lr = cfg.dbl_or("lr", 1e-4);
  hyper.batch = cfg.int_or("batch", 8);
  hyper.epochs = cfg.int_or("epochs", 100);
  hyper.seed = cfg.seed();
  hyper.weights = WeightsFromCfg(cfg);
  const acoustic::TrainHistory history = acoustic::Train(&store, data.items, "finetune", hyper);

  const std::string ckpt = (fs::path(out) / "checkpoint").string();
  store.Save(ckpt);
  WriteAcousticLossCsv((fs::path(out) / "loss.csv").string(), history);

  StageReport report{"finetune-tts", out, {}, {}};
  report.paths["checkpoint"] = ckpt;
  report.metrics["first_epoch_loss"] = history.epochs.front().total;
  report.metrics["final_epoch_loss"] = history.epochs.back().total;
  json j = {{"stage", report.stage},
            {"checkpoint", ckpt},
            {"accent", accent},
            {"utterances", data.items.size()},
            {"first_epoch_loss", history.epochs.front().total},
            {"final_epoch_loss", history.epochs.back().total},
            {"partition", PartitionJson(store)}};
  WriteReport(out, j);
  return report;
}

StageReport SynthesizeStage(const Config& cfg) {
  const std::string out = OutDir(cfg);
  RequireDir(cfg.str("corpus"), "corpus");
  RequireDir(cfg.str("g2p"), "g2p checkpoint");
  RequireDir(cfg.str("tts"), "tts checkpoint");
  const ToyCorpus corpus = ToyCorpus::Open(cfg.str("corpus"));
  const std::string accent = cfg.str_or("accent", corpus.accents.back().name);
  const int accent_id = corpus.accent_id(accent);
  const ParameterStore g2p_store = ParameterStore::Load(cfg.str("g2p"));
  const ParameterStore ac_store = ParameterStore::Load(cfg.str("tts"));

  // Texts: an explicit file, an inline `text`, or the accent's test split.
  struct Job {
    std::string utt_id;
    std::string text;
    std::string speaker;
  };
  std::vector<Job> jobs;
  if (cfg.has("text")) {
    jobs.push_back({"inline0", cfg.str("text"), cfg.str_or("speaker", "")});
  } else if (cfg.has("texts_file")) {
    const auto lines = ReadLines(cfg.str("texts_file"));
    for (std::size_t i = 0; i < lines.size(); ++i) {
      jobs.push_back({"text" + std::to_string(i), lines[i], cfg.str_or("speaker", "")});
    }
  } else {
    const std::string split = cfg.str_or("split", "test");
    for (const auto& utt : corpus.utterances) {
      if (utt.accent_id == accent_id && utt.split == split) {
        jobs.push_back({utt.utt_id, utt.text, utt.speaker});
      }
    }
  }
  if (jobs.empty()) throw std::invalid_argument("synthesize: nothing to synthesize");

  // Speaker fallback: the corpus speaker tied to the accent.
  const std::string default_speaker = corpus.speaker_for_accent(accent_id);
  const signal::NormStats stats =
      ac_store.has_config("f0_stats_mean")
          ? signal::NormStats{ac_store.config_double("f0_stats_mean"),
                              ac_store.config_double("f0_stats_std")}
          : signal::NormStats{0.0, 1.0};

  const int gl_iters = cfg.int_or("griffin_lim_iters", 32);
  std::ofstream manifest(fs::path(out) / "gen.jsonl");
  int count = 0;
  for (const auto& job : jobs) {
    std::string speaker = job.speaker.empty() ? cfg.str_or("speaker", "") : job.speaker;
    if (speaker.empty()) speaker = default_speaker;
    const Matrix spk_emb = ReadF32Array(
        (fs::path(corpus.dir) / corpus.speaker_files.at(speaker)).string());
    const acoustic::SynthesisResult syn = acoustic::Synthesize(
        g2p_store, ac_store, job.text, corpus.chars, accent_id, spk_emb);

    const std::string mel_rel = job.utt_id + ".mel.f32";
    const std::string wav_rel = job.utt_id + ".wav";
    WriteF32Array((fs::path(out) / mel_rel).string(), syn.mel);
    signal::WriteWav((fs::path(out) / wav_rel).string(),
                     signal::InvertMel(syn.mel, gl_iters));

    // Predicted prosody per phoneme step: F0 back in Hz plus duration frames.
    std::vector<double> pred_f0_hz(syn.pred_pitch.size());
    for (std::size_t i = 0; i < syn.pred_pitch.size(); ++i) {
      pred_f0_hz[i] = syn.pred_pitch[i] * stats.std + stats.mean;
    }
    const std::vector<double> pred_frames = acoustic::DurationToFrames(syn.pred_logdur);
    std::vector<std::string> phoneme_symbols;
    for (int p : syn.phonemes) phoneme_symbols.push_back(corpus.inventory.symbol(p));

    {
      std::ofstream f0csv(fs::path(out) / (job.utt_id + ".prosody.csv"));
      f0csv << "step,phoneme,pred_f0_hz,pred_dur_frames\n";
      const std::size_t steps = syn.pred_pitch.size();
      for (std::size_t i = 0; i < steps; ++i) {
        const std::string sym = i < phoneme_symbols.size()
                                    ? phoneme_symbols[i]
                                    : std::string(lexicon::PhonemeInventory::kEosSymbol);
        f0csv << i << "," << sym << "," << pred_f0_hz[i] << "," << pred_frames[i] << "\n";
      }
    }

    json rec = {{"utt_id", job.utt_id},
                {"text", job.text},
                {"accent", accent},
                {"speaker", speaker},
                {"mel", mel_rel},
                {"wav", wav_rel},
                {"phonemes", phoneme_symbols},
                {"pred_dur_frames", pred_frames},
                {"pred_f0_hz", pred_f0_hz},
                {"g2p_truncated", syn.g2p_truncated},
                {"mel_truncated", syn.mel_truncated}};
    manifest << rec.dump() << "\n";
    ++count;
  }

  StageReport report{"synthesize", out, {}, {}};
  report.metrics["utterances"] = count;
  report.paths["manifest"] = (fs::path(out) / "gen.jsonl").string();
  json j = {{"stage", report.stage}, {"utterances", count}, {"accent", accent}};
  WriteReport(out, j);
  return report;
}

struct GenRecord {
  std::string utt_id;
  std::string mel_path;  // may be empty
  std::string wav_path;
  std::vector<double> pred_dur_frames;  // may be empty
};

std::map<std::string, GenRecord> LoadGenSide(const Config& cfg, const ToyCorpus& corpus) {
  std::map<std::string, GenRecord> gen;
  if (cfg.has("gen_manifest")) {
    const std::string path = cfg.str("gen_manifest");
    const fs::path base = fs::path(path).parent_path();
    for (const auto& line : ReadLines(path)) {
      json rec = json::parse(line, nullptr, false);
      if (rec.is_discarded()) throw std::runtime_error("evaluate: bad gen manifest record");
      GenRecord g;
      g.utt_id = rec.at("utt_id").get<std::string>();
      if (rec.contains("mel")) g.mel_path = (base / rec.at("mel").get<std::string>()).string();
      g.wav_path = (base / rec.at("wav").get<std::string>()).string();
      if (rec.contains("pred_dur_frames")) {
        g.pred_dur_frames = rec.at("pred_dur_frames").get<std::vector<double>>();
      }
      gen[g.utt_id] = std::move(g);
    }
  } else if (cfg.has("gen_dir")) {
    const std::string dir = cfg.str("gen_dir");
    RequireDir(dir, "gen");
    for (const auto& utt : corpus.utterances) {
      const fs::path wav = fs::path(dir) / (utt.utt_id + ".wav");
      if (fs::exists(wav)) {
        GenRecord g;
        g.utt_id = utt.utt_id;
        g.wav_path = wav.string();
        gen[g.utt_id] = std::move(g);
      }
    }
  } else {
    throw std::invalid_argument("evaluate: need gen_manifest or gen_dir");
  }
  if (gen.empty()) throw std::invalid_argument("evaluate: generated side is empty");
  return gen;
}

StageReport EvaluateStage(const Config& cfg) {
  const std::string out = OutDir(cfg);
  RequireDir(cfg.str("corpus"), "corpus");
  const ToyCorpus corpus = ToyCorpus::Open(cfg.str("corpus"));
  const std::string accent = cfg.str_or("accent", corpus.accents.back().name);
  const int accent_id = corpus.accent_id(accent);
  const std::string split = cfg.str_or("split", "test");
  const auto gen = LoadGenSide(cfg, corpus);

  struct Sums {
    double total = 0.0;
    int count = 0;
    void add(double v) {
      total += v;
      ++count;
    }
    double mean() const { return count > 0 ? total / count : 0.0; }
  };
  std::map<std::string, Sums> agg;
  std::ofstream metrics_file(fs::path(out) / "metrics.jsonl");
  auto emit = [&](const std::string& utt, const std::string& metric, double value) {
    metrics_file << json{{"utt_id", utt}, {"metric", metric}, {"value", value}}.dump()
                 << "\n";
    agg[metric].add(value);
  };

  int evaluated = 0;
  for (const auto& utt : corpus.utterances) {
    if (utt.accent_id != accent_id || utt.split != split) continue;
    auto it = gen.find(utt.utt_id);
    if (it == gen.end()) continue;
    const GenRecord& g = it->second;

    const signal::Waveform ref_wave =
        signal::ReadWav((fs::path(corpus.dir) / utt.wav_path).string());
    const Matrix ref_mel = signal::MelSpectrogram(ref_wave);
    const signal::F0Contour ref_f0 = signal::EstimateF0(ref_wave);

    const signal::Waveform gen_wave = signal::ReadWav(g.wav_path);
    const Matrix gen_mel =
        g.mel_path.empty() ? signal::MelSpectrogram(gen_wave) : ReadF32Array(g.mel_path);
    const signal::F0Contour gen_f0 = signal::EstimateF0(gen_wave);

    const metrics::DtwPath path = metrics::DtwAlign(ref_mel, gen_mel);
    emit(utt.utt_id, "frame_disturbance", metrics::FrameDisturbance(path));

    // The F0 metrics run over the mel alignment path; the F0 contours are
    // clipped to the mel frame counts for safety.
    const int ref_n = std::min<int>(ref_mel.rows(), static_cast<int>(ref_f0.values.size()));
    const int gen_n = std::min<int>(gen_mel.rows(), static_cast<int>(gen_f0.values.size()));
    metrics::DtwPath clipped;
    for (const auto& [i, j] : path.pairs) {
      if (i < ref_n && j < gen_n) clipped.pairs.emplace_back(i, j);
    }
    if (!clipped.pairs.empty()) {
      try {
        emit(utt.utt_id, "f0_rmse_hz",
             metrics::F0Rmse(ref_f0.values, ref_f0.voiced, gen_f0.values, gen_f0.voiced,
                             clipped));
      } catch (const std::invalid_argument&) {
      }
      try {
        emit(utt.utt_id, "logf0_correlation",
             metrics::LogF0Correlation(ref_f0.values, ref_f0.voiced, gen_f0.values,
                                       gen_f0.voiced, clipped));
      } catch (const std::invalid_argument&) {
      }
      emit(utt.utt_id, "uv_error_pct",
           100.0 * metrics::UvErrorRate(ref_f0.voiced, gen_f0.voiced, clipped));
    }

    // Duration RMSE when the generated side carries per-phoneme durations
    // for the same phoneme sequence.
    const auto entries =
        signal::ReadAlignmentTsv((fs::path(corpus.dir) / utt.align_path).string());
    std::vector<double> ref_frames;
    for (const auto& e : entries) ref_frames.push_back(e.end_frame - e.start_frame);
    std::vector<double> gen_frames = g.pred_dur_frames;
    if (gen_frames.empty() && cfg.has("gen_align_dir")) {
      const fs::path align = fs::path(cfg.str("gen_align_dir")) / (utt.utt_id + ".tsv");
      if (fs::exists(align)) {
        for (const auto& e : signal::ReadAlignmentTsv(align.string())) {
          gen_frames.push_back(e.end_frame - e.start_frame);
        }
      }
    }
    if (!gen_frames.empty() && gen_frames.size() == ref_frames.size()) {
      emit(utt.utt_id, "duration_rmse_ms",
           metrics::DurationRmseMs(ref_frames, gen_frames, signal::kHopMs));
    }

    // Posteriorgram KLD when both sides are available.
    if (cfg.has("gen_post_dir")) {
      const fs::path post = fs::path(cfg.str("gen_post_dir")) / (utt.utt_id + ".f32");
      if (fs::exists(post)) {
        const Matrix ref_post =
            ReadF32Array((fs::path(corpus.dir) / utt.post_path).string());
        const Matrix gen_post = ReadF32Array(post.string());
        if (ref_post.rows() == gen_post.rows() && ref_post.cols() == gen_post.cols()) {
          emit(utt.utt_id, "kld", metrics::KldPosteriorgram(ref_post, gen_post));
        }
      }
    }

    // F0 contour series over the alignment path for plotting.
    {
      std::ofstream f0csv(fs::path(out) / ("f0_" + utt.utt_id + ".csv"));
      f0csv << "pair,ref_frame,gen_frame,ref_f0_hz,gen_f0_hz\n";
      for (std::size_t k = 0; k < clipped.pairs.size(); ++k) {
        const auto& [i, j] = clipped.pairs[k];
        f0csv << k << "," << i << "," << j << "," << ref_f0.values[i] << ","
              << gen_f0.values[j] << "\n";
      }
    }
    ++evaluated;
  }
  if (evaluated == 0) throw std::invalid_argument("evaluate: no utterance pairs matched");

  // Aggregate table mirroring the prosody evaluation columns.
  {
    std::ofstream table(fs::path(out) / "aggregate.txt");
    table << "metric\tmean\tutterances\n";
    for (const auto& [name, sums] : agg) {
      table << name << "\t" << sums.mean() << "\t" << sums.count << "\n";
    }
  }

  StageReport report{"evaluate", out, {}, {}};
  for (const auto& [name, sums] : agg) report.metrics[name] = sums.mean();
  report.paths["metrics"] = (fs::path(out) / "metrics.jsonl").string();
  report.paths["aggregate"] = (fs::path(out) / "aggregate.txt").string();
  json j = {{"stage", report.stage}, {"accent", accent}, {"evaluated", evaluated}};
  for (const auto& [name, sums] : agg) j["means"][name] = sums.mean();
  WriteReport(out, j);
  return report;
}

}  // namespace

StageReport RunPipeline(const std::string& stage, const Config& cfg) {
  if (stage == "make-toy-corpus") return MakeToyCorpusStage(cfg);
  if (stage == "lexicon-stats") return LexiconStatsStage(cfg);
  if (stage == "pretrain-g2p") return PretrainG2pStage(cfg);
  if (stage == "finetune-g2p") return FinetuneG2pStage(cfg);
  if (stage == "eval-g2p") return EvalG2pStage(cfg);
  if (stage == "pretrain-tts") return PretrainTtsStage(cfg);
  if (stage == "finetune-tts") return FinetuneTtsStage(cfg);
  if (stage == "synthesize") return SynthesizeStage(cfg);
  if (stage == "evaluate") return EvaluateStage(cfg);
  throw std::invalid_argument("unknown pipeline stage '" + stage + "'");
}

}  // namespace accentts::workbench
