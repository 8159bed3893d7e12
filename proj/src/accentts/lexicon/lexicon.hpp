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

#ifndef ACCENTTS_LEXICON_LEXICON_HPP_
#define ACCENTTS_LEXICON_LEXICON_HPP_

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace accentts::lexicon {

// Unified phoneme symbol table shared by every accent. The four control
// symbols occupy the first slots so the G2P output projection covers
// phonemes and controls in one table.
class PhonemeInventory {
 public:
  static constexpr const char* kPadSymbol = "<pad>";
  static constexpr const char* kBosSymbol = "<bos>";
  static constexpr const char* kEosSymbol = "<eos>";
  static constexpr const char* kWbSymbol = "<wb>";

  static PhonemeInventory Make(const std::vector<std::string>& phonemes,
                               const std::set<std::string>& vowels);

  static PhonemeInventory LoadTsv(const std::string& path);
  void SaveTsv(const std::string& path) const;

  int size() const { return static_cast<int>(symbols_.size()); }
  int pad() const { return 0; }
  int bos() const { return 1; }
  int eos() const { return 2; }
  int wb() const { return 3; }
  static constexpr int num_specials() { return 4; }

  bool contains(const std::string& symbol) const { return index_.count(symbol) > 0; }
  int index(const std::string& symbol) const;
  const std::string& symbol(int index) const;
  bool is_vowel(int index) const;
  bool is_special(int index) const { return index >= 0 && index < num_specials(); }
  const std::vector<std::string>& symbols() const { return symbols_; }

 private:
  std::vector<std::string> symbols_;
  std::vector<bool> vowel_;
  std::map<std::string, int> index_;
};

struct AccentId {
  int id = 0;
  std::string name;
};

// Per-accent map word -> phoneme transcription (indices into the shared
// inventory). Words are lowercase-normalized; the sorted map keeps
// iteration deterministic.
struct Lexicon {
  AccentId accent;
  std::map<std::string, std::vector<int>> entries;
};

struct LexiconLoadResult {
  Lexicon lexicon;
  int duplicates = 0;
};

// TSV, one entry per line: `word<TAB>phoneme phoneme ...`. Duplicate words
// keep the first occurrence and are counted. Unknown phonemes and empty
// transcriptions raise errors naming the offending line.
LexiconLoadResult LoadLexicon(const std::string& path, const AccentId& accent,
                              const PhonemeInventory& inventory);
void SaveLexicon(const std::string& path, const Lexicon& lex,
                 const PhonemeInventory& inventory);

// The k most frequent words of `lex` present in `freq`; ties break by
// ascending word order. Fewer than k available returns them all.
Lexicon SubsetByFrequency(const Lexicon& lex, const std::map<std::string, long long>& freq,
                          int k);

// `word<TAB>count` per line.
std::map<std::string, long long> LoadFrequencyTsv(const std::string& path);

struct LexiconDiffStats {
  double shared_word_pct = 0.0;
  double accented_word_pct = 0.0;
  double vowel_variation_pct = 0.0;
  double consonant_variation_pct = 0.0;
  int common_words = 0;
  int accented_words = 0;
};

// Cross-accent statistics over the common word set, with `a` as the
// reference side. Accented words are aligned with unit-cost Levenshtein;
// variation counts distinct reference positions touched by edits
// (insertions classified by the inserted symbol), capped per word at the
// reference class count, and is normalized by reference-side class totals.
LexiconDiffStats CompareLexicons(const Lexicon& a, const Lexicon& b,
                                 const PhonemeInventory& inventory);

// Grapheme vocabulary. Index 0 is reserved as padding; the space character
// is always present so utterance inputs keep word joins.
class CharVocab {
 public:
  static CharVocab FromAlphabet(const std::string& chars);
  static CharVocab Default();

  static CharVocab LoadText(const std::string& path);
  void SaveText(const std::string& path) const;

  int size() const { return static_cast<int>(chars_.size()); }
  bool contains(char c) const;
  int index(char c) const;
  char at(int index) const { return chars_[index]; }
  std::vector<int> Encode(const std::string& text) const;

 private:
  std::vector<char> chars_;  // chars_[0] is the pad placeholder '\0'
  std::map<char, int> index_;
};

// Lowercase, strip punctuation (kept: letters, digits, apostrophes),
// collapse whitespace runs to single spaces, trim.
std::string NormalizeText(const std::string& text);
std::vector<std::string> SplitWords(const std::string& normalized);

struct G2PExample {
  std::string id;
  std::vector<int> graphemes;
  // BOS ... EOS framed, with one WB token at every word join.
  std::vector<int> phonemes;
  AccentId accent;
};

struct CorpusBuildResult {
  std::vector<G2PExample> examples;
  int dropped_oov = 0;
  int dropped_length = 0;
};

// One example per retained sentence. Sentences outside the character
// length bounds or containing any out-of-vocabulary word are dropped.
// Throws when nothing is retained.
CorpusBuildResult BuildG2pCorpus(const std::vector<std::string>& texts, const Lexicon& lex,
                                 const AccentId& accent, std::pair<int, int> len_bounds,
                                 const CharVocab& chars, const PhonemeInventory& inventory);

// Line-delimited records {id, grapheme_indices, phoneme_indices, accent_id}.
void WriteCorpusManifest(const std::string& path, const std::vector<G2PExample>& examples);
std::vector<G2PExample> ReadCorpusManifest(const std::string& path);

}  // namespace accentts::lexicon

#endif  // ACCENTTS_LEXICON_LEXICON_HPP_
