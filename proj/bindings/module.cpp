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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "accentts/acoustic/acoustic.hpp"
#include "accentts/core/array_io.hpp"
#include "accentts/core/param_store.hpp"
#include "accentts/g2p/g2p.hpp"
#include "accentts/lexicon/lexicon.hpp"
#include "accentts/metrics/metrics.hpp"
#include "accentts/signal/signal.hpp"
#include "accentts/signal/wav.hpp"
#include "accentts/workbench/config.hpp"
#include "accentts/workbench/pipeline.hpp"

namespace py = pybind11;
using namespace accentts;

namespace {

Matrix MatrixFromRows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Matrix(0, 0);
  const int cols = static_cast<int>(rows[0].size());
  Matrix m(static_cast<int>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<int>(rows[r].size()) != cols) {
      throw std::invalid_argument("rows must have equal length");
    }
    for (int c = 0; c < cols; ++c) m.at(static_cast<int>(r), c) = rows[r][c];
  }
  return m;
}

std::vector<std::vector<double>> MatrixToRows(const Matrix& m) {
  std::vector<std::vector<double>> rows(m.rows());
  for (int r = 0; r < m.rows(); ++r) {
    rows[r].assign(m.row_ptr(r), m.row_ptr(r) + m.cols());
  }
  return rows;
}

metrics::DtwPath PathFromPairs(const std::vector<std::pair<int, int>>& pairs) {
  metrics::DtwPath path;
  path.pairs = pairs;
  return path;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "accentts: accented TTS workbench (C++ core bindings)";

  // --- metrics ---------------------------------------------------------
  auto metrics_mod = m.def_submodule("metrics", "objective evaluation metrics");
  metrics_mod.def("levenshtein", &metrics::Levenshtein, py::arg("a"), py::arg("b"));
  metrics_mod.def("per", &metrics::Per, py::arg("ref"), py::arg("hyp"));
  metrics_mod.def("wer", &metrics::Wer, py::arg("ref"), py::arg("hyp"), py::arg("wb_token"));
  metrics_mod.def(
      "kld_posteriorgram",
      [](const std::vector<std::vector<double>>& ref,
         const std::vector<std::vector<double>>& gen) {
        return metrics::KldPosteriorgram(MatrixFromRows(ref), MatrixFromRows(gen));
      },
      py::arg("ref"), py::arg("gen"));
  metrics_mod.def(
      "dtw_align",
      [](const std::vector<std::vector<double>>& ref,
         const std::vector<std::vector<double>>& gen) {
        const auto path = metrics::DtwAlign(MatrixFromRows(ref), MatrixFromRows(gen));
        return py::make_tuple(path.pairs, path.cost);
      },
      py::arg("ref_mel"), py::arg("gen_mel"),
      "returns (pairs, total_cost) of the minimal monotone path");
  metrics_mod.def(
      "f0_rmse",
      [](const std::vector<double>& ref, const std::vector<bool>& ref_voiced,
         const std::vector<double>& gen, const std::vector<bool>& gen_voiced,
         const std::vector<std::pair<int, int>>& path) {
        return metrics::F0Rmse(ref, ref_voiced, gen, gen_voiced, PathFromPairs(path));
      },
      py::arg("ref_f0"), py::arg("ref_voiced"), py::arg("gen_f0"), py::arg("gen_voiced"),
      py::arg("path"));
  metrics_mod.def(
      "logf0_correlation",
      [](const std::vector<double>& ref, const std::vector<bool>& ref_voiced,
         const std::vector<double>& gen, const std::vector<bool>& gen_voiced,
         const std::vector<std::pair<int, int>>& path) {
        return metrics::LogF0Correlation(ref, ref_voiced, gen, gen_voiced,
                                         PathFromPairs(path));
      },
      py::arg("ref_f0"), py::arg("ref_voiced"), py::arg("gen_f0"), py::arg("gen_voiced"),
      py::arg("path"));
  metrics_mod.def(
      "uv_error_rate",
      [](const std::vector<bool>& ref_voiced, const std::vector<bool>& gen_voiced,
         const std::vector<std::pair<int, int>>& path) {
        return metrics::UvErrorRate(ref_voiced, gen_voiced, PathFromPairs(path));
      },
      py::arg("ref_voiced"), py::arg("gen_voiced"), py::arg("path"));
  metrics_mod.def(
      "frame_disturbance",
      [](const std::vector<std::pair<int, int>>& path) {
        return metrics::FrameDisturbance(PathFromPairs(path));
      },
      py::arg("path"));
  metrics_mod.def("duration_rmse_ms", &metrics::DurationRmseMs, py::arg("ref_frames"),
                  py::arg("gen_frames"), py::arg("hop_ms") = 12.5);
  metrics_mod.def("identity_path", [](int n) { return metrics::IdentityPath(n).pairs; },
                  py::arg("n"));

  // --- signal ----------------------------------------------------------
  auto signal_mod = m.def_submodule("signal", "deterministic DSP front end");
  signal_mod.attr("SAMPLE_RATE") = signal::kSampleRate;
  signal_mod.attr("HOP_SAMPLES") = signal::kHopSamples;
  signal_mod.attr("WIN_SAMPLES") = signal::kWinSamples;
  signal_mod.def(
      "mel_spectrogram",
      [](const std::vector<double>& samples) {
        signal::Waveform w;
        w.samples = samples;
        return MatrixToRows(signal::MelSpectrogram(w));
      },
      py::arg("samples"), "log-mel frames for 16 kHz samples in [-1, 1]");
  signal_mod.def(
      "estimate_f0",
      [](const std::vector<double>& samples) {
        signal::Waveform w;
        w.samples = samples;
        const auto contour = signal::EstimateF0(w);
        return py::make_tuple(contour.values, contour.voiced);
      },
      py::arg("samples"), "returns (f0_hz, voiced_flags)");
  signal_mod.def(
      "trim_silence",
      [](const std::vector<double>& samples, double threshold_db) {
        signal::Waveform w;
        w.samples = samples;
        return signal::TrimSilence(w, threshold_db).samples;
      },
      py::arg("samples"), py::arg("threshold_db") = 40.0);
  signal_mod.def(
      "interpolate_unvoiced",
      [](const std::vector<double>& values, const std::vector<bool>& voiced) {
        signal::F0Contour contour;
        contour.values = values;
        contour.voiced = voiced;
        return signal::InterpolateUnvoiced(contour);
      },
      py::arg("values"), py::arg("voiced"));
  signal_mod.def(
      "phoneme_average_f0",
      [](const std::vector<double>& f0,
         const std::vector<std::tuple<int, int, int>>& segments) {
        std::vector<signal::AlignmentSegment> segs;
        for (const auto& [p, s, e] : segments) segs.push_back({p, s, e});
        return signal::PhonemeAverageF0(f0, segs);
      },
      py::arg("f0_interp"), py::arg("segments"),
      "segments are (phoneme, start_frame, end_frame) tuples");
  signal_mod.def(
      "durations_from_alignment",
      [](const std::vector<std::tuple<int, int, int>>& segments) {
        std::vector<signal::AlignmentSegment> segs;
        for (const auto& [p, s, e] : segments) segs.push_back({p, s, e});
        return signal::DurationsFromAlignment(segs);
      },
      py::arg("segments"));
  signal_mod.def(
      "invert_mel",
      [](const std::vector<std::vector<double>>& mel, int iterations) {
        return signal::InvertMel(MatrixFromRows(mel), iterations).samples;
      },
      py::arg("mel"), py::arg("iterations") = 32);
  signal_mod.def(
      "read_wav",
      [](const std::string& path) { return signal::ReadWav(path).samples; },
      py::arg("path"));
  signal_mod.def(
      "write_wav",
      [](const std::string& path, const std::vector<double>& samples) {
        signal::Waveform w;
        w.samples = samples;
        signal::WriteWav(path, w);
      },
      py::arg("path"), py::arg("samples"));

  // --- lexicon ---------------------------------------------------------
  auto lexicon_mod = m.def_submodule("lexicon", "per-accent phonetic lexicons");
  py::class_<lexicon::PhonemeInventory>(lexicon_mod, "PhonemeInventory")
      .def_static(
          "make",
          [](const std::vector<std::string>& phonemes,
             const std::vector<std::string>& vowels) {
            return lexicon::PhonemeInventory::Make(
                phonemes, std::set<std::string>(vowels.begin(), vowels.end()));
          },
          py::arg("phonemes"), py::arg("vowels"))
      .def_static("load_tsv", &lexicon::PhonemeInventory::LoadTsv, py::arg("path"))
      .def("save_tsv", &lexicon::PhonemeInventory::SaveTsv, py::arg("path"))
      .def("__len__", &lexicon::PhonemeInventory::size)
      .def("index", &lexicon::PhonemeInventory::index, py::arg("symbol"))
      .def("symbol", &lexicon::PhonemeInventory::symbol, py::arg("index"))
      .def("is_vowel", &lexicon::PhonemeInventory::is_vowel, py::arg("index"))
      .def_property_readonly("pad", &lexicon::PhonemeInventory::pad)
      .def_property_readonly("bos", &lexicon::PhonemeInventory::bos)
      .def_property_readonly("eos", &lexicon::PhonemeInventory::eos)
      .def_property_readonly("wb", &lexicon::PhonemeInventory::wb);
  py::class_<lexicon::Lexicon>(lexicon_mod, "Lexicon")
      .def_property_readonly("accent_id", [](const lexicon::Lexicon& l) { return l.accent.id; })
      .def("__len__", [](const lexicon::Lexicon& l) { return l.entries.size(); })
      .def("words",
           [](const lexicon::Lexicon& l) {
             std::vector<std::string> out;
             for (const auto& [w, p] : l.entries) out.push_back(w);
             return out;
           })
      .def("transcription",
           [](const lexicon::Lexicon& l, const std::string& word) {
             return l.entries.at(word);
           },
           py::arg("word"));
  lexicon_mod.def(
      "load_lexicon",
      [](const std::string& path, int accent_id, const lexicon::PhonemeInventory& inv) {
        auto result = lexicon::LoadLexicon(path, {accent_id, ""}, inv);
        return py::make_tuple(result.lexicon, result.duplicates);
      },
      py::arg("path"), py::arg("accent_id"), py::arg("inventory"),
      "returns (lexicon, duplicate_count)");
  lexicon_mod.def(
      "subset_by_frequency",
      [](const lexicon::Lexicon& lex, const std::map<std::string, long long>& freq, int k) {
        return lexicon::SubsetByFrequency(lex, freq, k);
      },
      py::arg("lexicon"), py::arg("freq"), py::arg("k"));
  lexicon_mod.def(
      "compare_lexicons",
      [](const lexicon::Lexicon& a, const lexicon::Lexicon& b,
         const lexicon::PhonemeInventory& inv) {
        const auto stats = lexicon::CompareLexicons(a, b, inv);
        py::dict out;
        out["shared_word_pct"] = stats.shared_word_pct;
        out["accented_word_pct"] = stats.accented_word_pct;
        out["vowel_variation_pct"] = stats.vowel_variation_pct;
        out["consonant_variation_pct"] = stats.consonant_variation_pct;
        out["common_words"] = stats.common_words;
        out["accented_words"] = stats.accented_words;
        return out;
      },
      py::arg("a"), py::arg("b"), py::arg("inventory"));
  lexicon_mod.def("normalize_text", &lexicon::NormalizeText, py::arg("text"));

  // --- models ----------------------------------------------------------
  py::class_<ParameterStore>(m, "ParameterStore")
      .def_static("load", &ParameterStore::Load, py::arg("directory"))
      .def("save", &ParameterStore::Save, py::arg("directory"))
      .def_property_readonly("model_kind",
                             [](const ParameterStore& s) { return s.model_kind; })
      .def("group_names", &ParameterStore::group_names)
      .def("trainable_groups",
           [](const ParameterStore& s) {
             return std::vector<std::string>(s.trainable_groups().begin(),
                                             s.trainable_groups().end());
           })
      .def("total_params", &ParameterStore::total_params);

  auto g2p_mod = m.def_submodule("g2p", "accent-conditioned grapheme-to-phoneme model");
  g2p_mod.def(
      "decode",
      [](const ParameterStore& store, const std::vector<int>& graphemes, int accent_id,
         int max_len) {
        const auto result = g2p::Decode(store, graphemes, accent_id, max_len);
        return py::make_tuple(result.phonemes, result.truncated);
      },
      py::arg("store"), py::arg("graphemes"), py::arg("accent_id"), py::arg("max_len") = -1,
      "greedy decode; returns (phoneme_indices, truncated)");
  g2p_mod.def(
      "forward",
      [](const ParameterStore& store, const std::vector<int>& graphemes,
         const std::vector<int>& phonemes_in, int accent_id) {
        return MatrixToRows(g2p::Forward(store, graphemes, phonemes_in, accent_id));
      },
      py::arg("store"), py::arg("graphemes"), py::arg("phonemes_in"), py::arg("accent_id"));
  g2p_mod.def(
      "extract_bottleneck",
      [](const ParameterStore& store, const std::vector<int>& graphemes, int accent_id,
         const std::optional<std::vector<int>>& framed_phonemes) {
        const auto result =
            g2p::ExtractBottleneck(store, graphemes, accent_id, framed_phonemes);
        return py::make_tuple(MatrixToRows(result.features), result.phonemes,
                              result.truncated);
      },
      py::arg("store"), py::arg("graphemes"), py::arg("accent_id"),
      py::arg("framed_phonemes") = std::nullopt);
  g2p_mod.def("trainable_mask", [](const std::string& stage) {
    const auto mask = g2p::TrainableMask(stage);
    return std::vector<std::string>(mask.begin(), mask.end());
  });

  auto acoustic_mod = m.def_submodule("acoustic", "prosody-aware acoustic model");
  acoustic_mod.def("trainable_mask", [](const std::string& stage) {
    const auto mask = acoustic::TrainableMask(stage);
    return std::vector<std::string>(mask.begin(), mask.end());
  });
  acoustic_mod.def("quantize_pitch", &acoustic::QuantizePitch, py::arg("f0_norm"),
                   py::arg("pitch_bins") = 256, py::arg("clip") = 4.0);
  acoustic_mod.def(
      "synthesize",
      [](const ParameterStore& g2p_store, const ParameterStore& ac_store,
         const std::string& text, const std::string& graphemes_alphabet, int accent_id,
         const std::vector<double>& speaker) {
        const auto chars = lexicon::CharVocab::FromAlphabet(graphemes_alphabet);
        const auto result = acoustic::Synthesize(g2p_store, ac_store, text, chars, accent_id,
                                                 Matrix::RowVector(speaker));
        py::dict out;
        out["mel"] = MatrixToRows(result.mel);
        out["phonemes"] = result.phonemes;
        out["pred_pitch"] = result.pred_pitch;
        out["pred_logdur"] = result.pred_logdur;
        out["g2p_truncated"] = result.g2p_truncated;
        out["mel_truncated"] = result.mel_truncated;
        return out;
      },
      py::arg("g2p_store"), py::arg("acoustic_store"), py::arg("text"), py::arg("alphabet"),
      py::arg("accent_id"), py::arg("speaker"));

  // --- workbench -------------------------------------------------------
  auto workbench_mod = m.def_submodule("workbench", "pipeline orchestration");
  workbench_mod.def(
      "run_pipeline",
      [](const std::string& stage, const std::map<std::string, std::string>& options) {
        workbench::Config cfg;
        for (const auto& [k, v] : options) cfg.set(k, v);
        const auto report = workbench::RunPipeline(stage, cfg);
        py::dict out;
        out["stage"] = report.stage;
        out["out_dir"] = report.out_dir;
        out["metrics"] = report.metrics;
        out["paths"] = report.paths;
        return out;
      },
      py::arg("stage"), py::arg("options"),
      "run one pipeline stage with flat key/value options");

  m.def(
      "read_f32_array",
      [](const std::string& path) { return MatrixToRows(ReadF32Array(path)); },
      py::arg("path"));
  m.def(
      "write_f32_array",
      [](const std::string& path, const std::vector<std::vector<double>>& rows) {
        WriteF32Array(path, MatrixFromRows(rows));
      },
      py::arg("path"), py::arg("rows"));
}
