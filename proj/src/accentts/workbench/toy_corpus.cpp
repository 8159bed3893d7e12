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

#include "accentts/workbench/toy_corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "accentts/core/array_io.hpp"
#include "accentts/core/rng.hpp"
#include "accentts/signal/signal.hpp"
#include "accentts/signal/wav.hpp"

namespace accentts::workbench {

namespace fs = std::filesystem;

ToyAccentSpec ToyAccentSpec::Default() {
  ToyAccentSpec spec;
  spec.consonant_graphemes = "bdgkmnpst";
  spec.vowel_graphemes = "aeiou";
  spec.base_rules = {{'a', "aa"}, {'e', "eh"}, {'i', "iy"}, {'o', "ow"}, {'u', "uw"},
                     {'b', "bb"}, {'d', "dd"}, {'g', "gg"}, {'k', "kk"}, {'m', "mm"},
                     {'n', "nn"}, {'p', "pp"}, {'s', "ss"}, {'t', "tt"}};
  spec.phonemes = {"aa", "ae", "ah", "ao", "aw", "eh", "ey", "ih", "iy", "ow", "oy",
                   "uh", "uw", "bb", "dd", "gg", "kk", "mm", "nn", "pp", "ss", "tt"};
  spec.vowels = {"aa", "ae", "ah", "ao", "aw", "eh", "ey", "ih", "iy", "ow", "oy", "uh",
                 "uw"};
  spec.unvoiced = {"kk", "pp", "ss", "tt"};
  spec.accents = {
      {"gen", {}, 0.0, 1.0},
      {"alt", {{'a', "ae"}, {'o', "ao"}, {'u', "uh"}}, 15.0, 1.1},
      {"tgt", {{'a', "aw"}, {'e', "ey"}, {'i', "ih"}}, 60.0, 1.35},
  };
  spec.speakers = {
      {"spk_gen", 150.0, 0},
      {"spk_alt", 185.0, 1},
      {"spk_tgt", 215.0, 2},
  };
  return spec;
}

void ToyAccentSpec::Validate() const {
  if (consonant_graphemes.empty() || vowel_graphemes.empty()) {
    throw std::invalid_argument("toy spec: empty alphabet");
  }
  if (accents.empty() || speakers.empty()) {
    throw std::invalid_argument("toy spec: need accents and speakers");
  }
  const lexicon::PhonemeInventory inv = MakeInventory();
  for (char g : consonant_graphemes + vowel_graphemes) {
    if (!base_rules.count(g)) {
      throw std::invalid_argument(std::string("toy spec: no base rule for '") + g + "'");
    }
  }
  for (const auto& [g, p] : base_rules) {
    if (!inv.contains(p)) {
      throw std::invalid_argument("toy spec: base rule maps to unknown phoneme " + p);
    }
  }
  for (const auto& accent : accents) {
    for (const auto& [g, p] : accent.overrides) {
      if (!inv.contains(p)) {
        throw std::invalid_argument("toy spec: override maps to unknown phoneme " + p);
      }
      if (vowel_graphemes.find(g) == std::string::npos) {
        throw std::invalid_argument("toy spec: overrides must target vowel graphemes");
      }
    }
  }
  for (const auto& spk : speakers) {
    if (spk.accent_id < 0 || spk.accent_id >= static_cast<int>(accents.size())) {
      throw std::invalid_argument("toy spec: speaker accent out of range");
    }
  }
}

lexicon::PhonemeInventory ToyAccentSpec::MakeInventory() const {
  return lexicon::PhonemeInventory::Make(phonemes, vowels);
}

lexicon::CharVocab ToyAccentSpec::MakeCharVocab() const {
  return lexicon::CharVocab::FromAlphabet(consonant_graphemes + vowel_graphemes);
}

std::vector<int> ToyAccentSpec::Transcribe(const std::string& word, int accent_id,
                                           const lexicon::PhonemeInventory& inventory) const {
  if (accent_id < 0 || accent_id >= static_cast<int>(accents.size())) {
    throw std::invalid_argument("toy spec: accent id out of range");
  }
  const auto& overrides = accents[accent_id].overrides;
  std::vector<int> phones;
  phones.reserve(word.size());
  for (char g : word) {
    auto ov = overrides.find(g);
    const std::string& sym = ov != overrides.end() ? ov->second : base_rules.at(g);
    phones.push_back(inventory.index(sym));
  }
  return phones;
}

namespace {

// Per-phoneme deterministic prosody (hash-derived so that every accent and
// run agrees on the same base values). Durations stay comfortably above the
// analysis window so every segment has interior frames for F0 estimation.
int BaseDurationFrames(const std::string& symbol) {
  return 7 + static_cast<int>(StableHash(symbol) % 6);  // 7..12 frames
}

double PhonemeF0Delta(const std::string& symbol) {
  return static_cast<double>(StableHash(symbol) % 17) - 8.0;  // -8..+8 Hz
}

double PhonemeTilt(const std::string& symbol) {
  return 0.4 + static_cast<double>(StableHash(symbol) % 60) / 100.0;  // 0.4..0.99
}

struct SegmentPlan {
  std::string symbol;
  int frames;
  double f0_hz;     // 0 for silence/unvoiced
  bool voiced;
  bool noise;       // unvoiced consonant
};

constexpr int kWbFrames = 3;
constexpr int kEosFrames = 5;
constexpr int kFadeSamples = 40;

std::vector<SegmentPlan> PlanUtterance(const ToyAccentSpec& spec,
                                       const lexicon::PhonemeInventory& inv,
                                       const std::vector<std::string>& words, int accent_id,
                                       double speaker_f0) {
  const ToyAccent& accent = spec.accents[accent_id];
  std::vector<SegmentPlan> plan;
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (w > 0) {
      plan.push_back({lexicon::PhonemeInventory::kWbSymbol, kWbFrames, 0.0, false, false});
    }
    for (int idx : spec.Transcribe(words[w], accent_id, inv)) {
      const std::string& sym = inv.symbol(idx);
      SegmentPlan seg;
      seg.symbol = sym;
      seg.frames = std::max(
          2, static_cast<int>(std::lround(BaseDurationFrames(sym) * accent.dur_scale)));
      seg.noise = spec.unvoiced.count(sym) > 0;
      seg.voiced = !seg.noise;
      seg.f0_hz = seg.voiced ? speaker_f0 + accent.f0_offset_hz + PhonemeF0Delta(sym) : 0.0;
      plan.push_back(seg);
    }
  }
  plan.push_back({lexicon::PhonemeInventory::kEosSymbol, kEosFrames, 0.0, false, false});
  return plan;
}

signal::Waveform RenderUtterance(const std::vector<SegmentPlan>& plan, Rng* noise_rng) {
  signal::Waveform wave;
  wave.rate = signal::kSampleRate;
  std::size_t total = 0;
  for (const auto& seg : plan) total += static_cast<std::size_t>(seg.frames) * signal::kHopSamples;
  // Trailing pad keeps the mel frame count equal to the alignment frame sum.
  const std::size_t pad = signal::kWinSamples - signal::kHopSamples;
  wave.samples.assign(total + pad, 0.0);

  std::size_t offset = 0;
  double noise_state = 0.0;
  for (const auto& seg : plan) {
    const std::size_t len = static_cast<std::size_t>(seg.frames) * signal::kHopSamples;
    if (seg.voiced) {
      const double tilt = PhonemeTilt(seg.symbol);
      const bool is_vowel = true;  // voiced toy segments all carry the tone
      const double amp = is_vowel ? 0.45 : 0.25;
      const double w1 = 2.0 * M_PI * seg.f0_hz / signal::kSampleRate;
      for (std::size_t i = 0; i < len; ++i) {
        const double t = static_cast<double>(i);
        double v = amp * std::sin(w1 * t) + amp * 0.45 * tilt * std::sin(2.0 * w1 * t);
        wave.samples[offset + i] = v;
      }
    } else if (seg.noise) {
      for (std::size_t i = 0; i < len; ++i) {
        const double white = noise_rng->uniform(-1.0, 1.0);
        noise_state = 0.75 * noise_state + 0.25 * white;  // gentle low-pass
        wave.samples[offset + i] = 0.15 * noise_state;
      }
    }
    // Short fades remove boundary clicks without moving segment centers.
    const std::size_t fade = std::min<std::size_t>(kFadeSamples, len / 2);
    for (std::size_t i = 0; i < fade; ++i) {
      const double g = static_cast<double>(i + 1) / static_cast<double>(fade + 1);
      wave.samples[offset + i] *= g;
      wave.samples[offset + len - 1 - i] *= g;
    }
    offset += len;
  }
  return wave;
}

std::vector<signal::AlignmentEntry> PlanAlignment(const std::vector<SegmentPlan>& plan) {
  std::vector<signal::AlignmentEntry> entries;
  int cursor = 0;
  for (const auto& seg : plan) {
    entries.push_back({seg.symbol, cursor, cursor + seg.frames});
    cursor += seg.frames;
  }
  return entries;
}

Matrix ReferencePosteriorgram(const std::vector<SegmentPlan>& plan,
                              const lexicon::PhonemeInventory& inv) {
  const int classes = inv.size();
  Matrix post(static_cast<int>(plan.size()), classes);
  const double off = 0.12 / (classes - 1);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const int idx = inv.index(plan[i].symbol);
    for (int c = 0; c < classes; ++c) post.at(static_cast<int>(i), c) = off;
    post.at(static_cast<int>(i), idx) = 0.88;
  }
  return post;
}

std::string MakeWord(Rng* rng, const ToyAccentSpec& spec, int syllables) {
  std::string word;
  for (int s = 0; s < syllables; ++s) {
    word += spec.consonant_graphemes[rng->uniform_int(spec.consonant_graphemes.size())];
    word += spec.vowel_graphemes[rng->uniform_int(spec.vowel_graphemes.size())];
  }
  return word;
}

}  // namespace

ToyCorpusSummary MakeToyCorpus(const ToyAccentSpec& spec, const ToyCorpusSizes& sizes,
                               std::uint64_t seed, const std::string& out_dir) {
  spec.Validate();
  if (sizes.words < 1 || sizes.heldout_words < 0 || sizes.finetune_words < 1 ||
      sizes.finetune_words > sizes.words || sizes.utterances_per_accent < 1 ||
      sizes.test_utterances_per_accent < 0 || sizes.min_words_per_utterance < 1 ||
      sizes.max_words_per_utterance < sizes.min_words_per_utterance) {
    throw std::invalid_argument("toy corpus: inconsistent sizes");
  }
  const lexicon::PhonemeInventory inv = spec.MakeInventory();
  const lexicon::CharVocab chars = spec.MakeCharVocab();

  fs::create_directories(out_dir);
  fs::create_directories(fs::path(out_dir) / "wav");
  fs::create_directories(fs::path(out_dir) / "align");
  fs::create_directories(fs::path(out_dir) / "post");
  fs::create_directories(fs::path(out_dir) / "speakers");

  Rng rng(Rng::mix(seed, StableHash("toy-corpus")));
  Rng word_rng = rng.fork(1);
  Rng utt_rng = rng.fork(2);
  Rng audio_rng = rng.fork(3);
  Rng speaker_rng = rng.fork(4);

  // Shared word pool; every accent transcribes the same words.
  std::vector<std::string> pool;
  std::set<std::string> seen;
  const int total_words = sizes.words + sizes.heldout_words;
  while (static_cast<int>(pool.size()) < total_words) {
    const int syllables = 2 + static_cast<int>(word_rng.uniform_int(2));
    std::string w = MakeWord(&word_rng, spec, syllables);
    if (seen.insert(w).second) pool.push_back(w);
  }
  // Guarantee at least one word carrying an overridden vowel in every
  // accent pair: a word containing every vowel grapheme does the job.
  {
    std::string all_vowels;
    for (char v : spec.vowel_graphemes) {
      all_vowels += spec.consonant_graphemes[0];
      all_vowels += v;
    }
    if (!seen.count(all_vowels)) {
      seen.erase(pool[0]);
      pool[0] = all_vowels;
      seen.insert(all_vowels);
    }
  }
  std::vector<std::string> train_words(pool.begin(), pool.begin() + sizes.words);
  std::vector<std::string> heldout_words(pool.begin() + sizes.words, pool.end());
  std::vector<std::string> finetune_words = train_words;
  for (std::size_t i = finetune_words.size(); i > 1; --i) {
    std::swap(finetune_words[i - 1], finetune_words[word_rng.uniform_int(i)]);
  }
  finetune_words.resize(sizes.finetune_words);
  std::sort(finetune_words.begin(), finetune_words.end());

  auto write_words = [&](const std::string& name, const std::vector<std::string>& words) {
    std::ofstream out(fs::path(out_dir) / name);
    for (const auto& w : words) out << w << "\n";
  };
  write_words("words_train.txt", train_words);
  write_words("words_heldout.txt", heldout_words);
  write_words("words_finetune.txt", finetune_words);

  inv.SaveTsv((fs::path(out_dir) / "inventory.tsv").string());
  chars.SaveText((fs::path(out_dir) / "graphemes.txt").string());

  ToyCorpusSummary summary;
  summary.num_accents = static_cast<int>(spec.accents.size());
  summary.num_words = total_words;

  {
    std::ofstream acc((fs::path(out_dir) / "accents.tsv").string());
    for (std::size_t a = 0; a < spec.accents.size(); ++a) {
      acc << a << "\t" << spec.accents[a].name << "\t" << spec.accents[a].f0_offset_hz
          << "\t" << spec.accents[a].dur_scale << "\n";
    }
  }

  // Per-accent lexicons over the full pool (train + heldout words).
  for (std::size_t a = 0; a < spec.accents.size(); ++a) {
    lexicon::Lexicon lex;
    lex.accent = {static_cast<int>(a), spec.accents[a].name};
    for (const auto& w : pool) lex.entries[w] = spec.Transcribe(w, static_cast<int>(a), inv);
    const std::string path =
        (fs::path(out_dir) / ("lexicon_" + spec.accents[a].name + ".tsv")).string();
    lexicon::SaveLexicon(path, lex, inv);
    summary.lexicon_paths.push_back(path);
  }

  // Speaker embedding files.
  std::map<std::string, std::string> speaker_files;
  {
    std::ofstream spk((fs::path(out_dir) / "speakers.tsv").string());
    for (const auto& s : spec.speakers) {
      Matrix emb(1, 256);
      for (double& v : emb.raw()) v = speaker_rng.normal() / 16.0;
      SnapToFloat32(&emb);
      const std::string rel = "speakers/" + s.name + ".f32";
      WriteF32Array((fs::path(out_dir) / rel).string(), emb);
      speaker_files[s.name] = rel;
      spk << s.name << "\t" << s.accent_id << "\t" << s.f0_base_hz << "\t" << rel << "\n";
    }
  }

  // Utterances: per accent, the accent's first speaker reads random
  // sentences made of training words.
  std::ofstream manifest((fs::path(out_dir) / "utts.jsonl").string());
  int utt_count = 0;
  for (std::size_t a = 0; a < spec.accents.size(); ++a) {
    const ToySpeaker* speaker = nullptr;
    for (const auto& s : spec.speakers) {
      if (s.accent_id == static_cast<int>(a)) {
        speaker = &s;
        break;
      }
    }
    if (speaker == nullptr) {
      throw std::invalid_argument("toy corpus: accent without speaker: " +
                                  spec.accents[a].name);
    }
    const int total_utts = sizes.utterances_per_accent + sizes.test_utterances_per_accent;
    for (int u = 0; u < total_utts; ++u) {
      const int n_words =
          sizes.min_words_per_utterance +
          static_cast<int>(utt_rng.uniform_int(
              sizes.max_words_per_utterance - sizes.min_words_per_utterance + 1));
      std::vector<std::string> words;
      for (int w = 0; w < n_words; ++w) {
        words.push_back(train_words[utt_rng.uniform_int(train_words.size())]);
      }
      const auto plan = PlanUtterance(spec, inv, words, static_cast<int>(a),
                                      speaker->f0_base_hz);
      const signal::Waveform wave = RenderUtterance(plan, &audio_rng);

      std::ostringstream id;
      id << "utt_" << spec.accents[a].name << "_" << u;
      ToyUtterance utt;
      utt.utt_id = id.str();
      utt.accent_id = static_cast<int>(a);
      utt.speaker = speaker->name;
      std::ostringstream text;
      for (std::size_t w = 0; w < words.size(); ++w) {
        if (w) text << " ";
        text << words[w];
      }
      utt.text = text.str();
      utt.split = u < sizes.utterances_per_accent ? "train" : "test";
      utt.wav_path = "wav/" + utt.utt_id + ".wav";
      utt.align_path = "align/" + utt.utt_id + ".tsv";
      utt.post_path = "post/" + utt.utt_id + ".f32";

      signal::WriteWav((fs::path(out_dir) / utt.wav_path).string(), wave);
      signal::WriteAlignmentTsv((fs::path(out_dir) / utt.align_path).string(),
                                PlanAlignment(plan));
      WriteF32Array((fs::path(out_dir) / utt.post_path).string(),
                    ReferencePosteriorgram(plan, inv));

      nlohmann::json rec = {{"utt_id", utt.utt_id},   {"accent_id", utt.accent_id},
                            {"accent", spec.accents[a].name},
                            {"speaker", utt.speaker}, {"text", utt.text},
                            {"split", utt.split},     {"wav", utt.wav_path},
                            {"align", utt.align_path}, {"post", utt.post_path}};
      manifest << rec.dump() << "\n";
      ++utt_count;
    }
  }
  summary.num_utterances = utt_count;
  summary.utterances_manifest = (fs::path(out_dir) / "utts.jsonl").string();
  return summary;
}

ToyCorpus ToyCorpus::Open(const std::string& dir) {
  ToyCorpus corpus;
  corpus.dir = dir;
  corpus.inventory = lexicon::PhonemeInventory::LoadTsv((fs::path(dir) / "inventory.tsv").string());
  corpus.chars = lexicon::CharVocab::LoadText((fs::path(dir) / "graphemes.txt").string());

  std::ifstream acc((fs::path(dir) / "accents.tsv").string());
  if (!acc) throw std::runtime_error("toy corpus: missing accents.tsv in " + dir);
  std::string line;
  while (std::getline(acc, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int id;
    ToyAccent a;
    if (!(ls >> id >> a.name >> a.f0_offset_hz >> a.dur_scale)) {
      throw std::runtime_error("toy corpus: bad accents.tsv line: " + line);
    }
    if (id != static_cast<int>(corpus.accents.size())) {
      throw std::runtime_error("toy corpus: accent ids must be dense");
    }
    corpus.accent_ids[a.name] = id;
    corpus.accents.push_back(std::move(a));
  }

  std::ifstream spk((fs::path(dir) / "speakers.tsv").string());
  if (!spk) throw std::runtime_error("toy corpus: missing speakers.tsv in " + dir);
  while (std::getline(spk, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string name, rel;
    int accent_id;
    double f0;
    if (!(ls >> name >> accent_id >> f0 >> rel)) {
      throw std::runtime_error("toy corpus: bad speakers.tsv line: " + line);
    }
    corpus.speaker_files[name] = rel;
    corpus.speaker_accents[name] = accent_id;
  }

  std::ifstream utts((fs::path(dir) / "utts.jsonl").string());
  if (!utts) throw std::runtime_error("toy corpus: missing utts.jsonl in " + dir);
  while (std::getline(utts, line)) {
    if (line.empty()) continue;
    nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
    if (rec.is_discarded()) throw std::runtime_error("toy corpus: bad utts.jsonl record");
    ToyUtterance u;
    u.utt_id = rec.at("utt_id").get<std::string>();
    u.accent_id = rec.at("accent_id").get<int>();
    u.speaker = rec.at("speaker").get<std::string>();
    u.text = rec.at("text").get<std::string>();
    u.split = rec.at("split").get<std::string>();
    u.wav_path = rec.at("wav").get<std::string>();
    u.align_path = rec.at("align").get<std::string>();
    u.post_path = rec.at("post").get<std::string>();
    corpus.utterances.push_back(std::move(u));
  }
  return corpus;
}

int ToyCorpus::accent_id(const std::string& name) const {
  auto it = accent_ids.find(name);
  if (it == accent_ids.end()) {
    throw std::invalid_argument("toy corpus: unknown accent '" + name + "'");
  }
  return it->second;
}

std::string ToyCorpus::speaker_for_accent(int accent_id) const {
  for (const auto& [name, acc] : speaker_accents) {
    if (acc == accent_id) return name;
  }
  throw std::invalid_argument("toy corpus: no speaker for accent id " +
                              std::to_string(accent_id));
}

}  // namespace accentts::workbench
