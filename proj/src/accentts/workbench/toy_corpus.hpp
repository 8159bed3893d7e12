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

#ifndef ACCENTTS_WORKBENCH_TOY_CORPUS_HPP_
#define ACCENTTS_WORKBENCH_TOY_CORPUS_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "accentts/lexicon/lexicon.hpp"

namespace accentts::workbench {

// Synthetic accent family: a regular base grapheme->phoneme mapping with
// per-accent vowel-rule overrides and per-accent prosody (F0 offset,
// duration scale). Stands in for real lexicons and speech corpora so that
// every pipeline stage has exact ground truth.
struct ToyAccent {
  std::string name;
  std::map<char, std::string> overrides;
  double f0_offset_hz = 0.0;
  double dur_scale = 1.0;
};

struct ToySpeaker {
  std::string name;
  double f0_base_hz = 150.0;
  int accent_id = 0;
};

struct ToyAccentSpec {
  std::string consonant_graphemes;
  std::string vowel_graphemes;
  std::map<char, std::string> base_rules;
  std::vector<std::string> phonemes;  // non-special inventory symbols
  std::set<std::string> vowels;
  std::set<std::string> unvoiced;  // rendered as filtered noise
  std::vector<ToyAccent> accents;  // accent id = position
  std::vector<ToySpeaker> speakers;

  static ToyAccentSpec Default();
  void Validate() const;

  lexicon::PhonemeInventory MakeInventory() const;
  lexicon::CharVocab MakeCharVocab() const;
  std::vector<int> Transcribe(const std::string& word, int accent_id,
                              const lexicon::PhonemeInventory& inventory) const;
};

struct ToyCorpusSizes {
  int words = 200;          // training word pool (shared across accents)
  int heldout_words = 30;   // extra rule-consistent words, never in audio
  int finetune_words = 50;  // subset of the training words
  int utterances_per_accent = 40;
  int test_utterances_per_accent = 10;
  int min_words_per_utterance = 2;
  int max_words_per_utterance = 4;
};

struct ToyUtterance {
  std::string utt_id;
  int accent_id = 0;
  std::string speaker;
  std::string text;
  std::string split;  // "train" or "test"
  std::string wav_path;
  std::string align_path;
  std::string post_path;
};

struct ToyCorpusSummary {
  int num_accents = 0;
  int num_utterances = 0;
  int num_words = 0;
  std::vector<std::string> lexicon_paths;
  std::string utterances_manifest;
};

// Emits, under out_dir: inventory.tsv, graphemes.txt, accents.tsv,
// speakers.tsv, per-accent lexicon TSVs, word-list splits, WAV audio with
// exact alignment TSVs, reference posteriorgrams, speaker embedding files
// and utts.jsonl. Byte-identical for a fixed seed.
ToyCorpusSummary MakeToyCorpus(const ToyAccentSpec& spec, const ToyCorpusSizes& sizes,
                               std::uint64_t seed, const std::string& out_dir);

// Helpers for consuming a generated corpus directory.
struct ToyCorpus {
  lexicon::PhonemeInventory inventory;
  lexicon::CharVocab chars;
  std::vector<ToyAccent> accents;                    // id = position
  std::map<std::string, int> accent_ids;             // name -> id
  std::map<std::string, std::string> speaker_files;  // name -> path
  std::map<std::string, int> speaker_accents;        // name -> accent id
  std::vector<ToyUtterance> utterances;
  std::string dir;

  static ToyCorpus Open(const std::string& dir);
  int accent_id(const std::string& name) const;
  // The first speaker tied to the accent.
  std::string speaker_for_accent(int accent_id) const;
};

}  // namespace accentts::workbench

#endif  // ACCENTTS_WORKBENCH_TOY_CORPUS_HPP_
