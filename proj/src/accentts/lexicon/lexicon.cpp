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

#include "accentts/lexicon/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "accentts/metrics/metrics.hpp"

namespace accentts::lexicon {

PhonemeInventory PhonemeInventory::Make(const std::vector<std::string>& phonemes,
                                        const std::set<std::string>& vowels) {
  PhonemeInventory inv;
  inv.symbols_ = {kPadSymbol, kBosSymbol, kEosSymbol, kWbSymbol};
  inv.vowel_.assign(num_specials(), false);
  for (const auto& p : phonemes) {
    if (p.empty()) throw std::invalid_argument("inventory: empty phoneme symbol");
    inv.symbols_.push_back(p);
    inv.vowel_.push_back(vowels.count(p) > 0);
  }
  for (int i = 0; i < inv.size(); ++i) {
    if (!inv.index_.emplace(inv.symbols_[i], i).second) {
      throw std::invalid_argument("inventory: duplicate symbol '" + inv.symbols_[i] + "'");
    }
  }
  for (const auto& v : vowels) {
    if (!inv.contains(v)) {
      throw std::invalid_argument("inventory: vowel '" + v + "' not among phonemes");
    }
  }
  return inv;
}

PhonemeInventory PhonemeInventory::LoadTsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open inventory: " + path);
  std::vector<std::string> phonemes;
  std::set<std::string> vowels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string symbol, kind;
    ls >> symbol >> kind;
    if (symbol.empty() || kind.empty()) {
      throw std::runtime_error("bad inventory line " + std::to_string(line_no) + " in " + path);
    }
    if (kind == "special") continue;  // specials are implicit
    phonemes.push_back(symbol);
    if (kind == "vowel") vowels.insert(symbol);
  }
  return Make(phonemes, vowels);
}

void PhonemeInventory::SaveTsv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write inventory: " + path);
  for (int i = 0; i < size(); ++i) {
    const char* kind = is_special(i) ? "special" : (vowel_[i] ? "vowel" : "consonant");
    out << symbols_[i] << "\t" << kind << "\n";
  }
}

int PhonemeInventory::index(const std::string& symbol) const {
  auto it = index_.find(symbol);
  if (it == index_.end()) {
    throw std::invalid_argument("unknown phoneme symbol '" + symbol + "'");
  }
  return it->second;
}

const std::string& PhonemeInventory::symbol(int index) const {
  if (index < 0 || index >= size()) {
    throw std::invalid_argument("phoneme index " + std::to_string(index) + " out of range");
  }
  return symbols_[index];
}

bool PhonemeInventory::is_vowel(int index) const {
  if (index < 0 || index >= size()) {
    throw std::invalid_argument("phoneme index " + std::to_string(index) + " out of range");
  }
  return vowel_[index];
}

namespace {

std::string Lowercase(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

LexiconLoadResult LoadLexicon(const std::string& path, const AccentId& accent,
                              const PhonemeInventory& inventory) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon: " + path);
  LexiconLoadResult result;
  result.lexicon.accent = accent;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                  ": expected `word<TAB>phonemes`");
    }
    const std::string word = Lowercase(line.substr(0, tab));
    if (word.empty()) {
      throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": empty word");
    }
    std::istringstream ps(line.substr(tab + 1));
    std::vector<int> phones;
    std::string sym;
    while (ps >> sym) {
      if (!inventory.contains(sym)) {
        throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                    ": unknown phoneme symbol '" + sym + "'");
      }
      phones.push_back(inventory.index(sym));
    }
    if (phones.empty()) {
      throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                  ": empty transcription for '" + word + "'");
    }
    if (!result.lexicon.entries.emplace(word, std::move(phones)).second) {
      ++result.duplicates;
    }
  }
  if (result.lexicon.entries.empty()) {
    throw std::invalid_argument("lexicon file is empty: " + path);
  }
  return result;
}

void SaveLexicon(const std::string& path, const Lexicon& lex,
                 const PhonemeInventory& inventory) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write lexicon: " + path);
  for (const auto& [word, phones] : lex.entries) {
    out << word << "\t";
    for (std::size_t i = 0; i < phones.size(); ++i) {
      if (i) out << " ";
      out << inventory.symbol(phones[i]);
    }
    out << "\n";
  }
}

Lexicon SubsetByFrequency(const Lexicon& lex, const std::map<std::string, long long>& freq,
                          int k) {
  if (k < 1) throw std::invalid_argument("subset_by_frequency: k must be >= 1");
  std::vector<std::pair<std::string, long long>> known;
  for (const auto& [word, phones] : lex.entries) {
    auto it = freq.find(word);
    if (it != freq.end()) known.emplace_back(word, it->second);
  }
  std::sort(known.begin(), known.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (static_cast<int>(known.size()) > k) known.resize(k);
  Lexicon out;
  out.accent = lex.accent;
  for (const auto& [word, count] : known) out.entries[word] = lex.entries.at(word);
  return out;
}

std::map<std::string, long long> LoadFrequencyTsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open frequency table: " + path);
  std::map<std::string, long long> freq;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    long long count = 0;
    if (!(ls >> word >> count)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad frequency line");
    }
    freq[Lowercase(word)] = count;
  }
  return freq;
}

LexiconDiffStats CompareLexicons(const Lexicon& a, const Lexicon& b,
                                 const PhonemeInventory& inventory) {
  std::vector<std::string> common;
  for (const auto& [word, phones] : a.entries) {
    if (b.entries.count(word)) common.push_back(word);
  }
  if (common.empty()) {
    throw std::invalid_argument("compare_lexicons: lexicons share no words");
  }

  int shared = 0;
  long vowel_touched = 0, consonant_touched = 0;
  long vowel_total = 0, consonant_total = 0;
  for (const auto& word : common) {
    const auto& ref = a.entries.at(word);
    const auto& hyp = b.entries.at(word);
    if (ref == hyp) {
      ++shared;
      continue;
    }
    int ref_vowels = 0, ref_consonants = 0;
    for (int p : ref) {
      if (inventory.is_vowel(p)) {
        ++ref_vowels;
      } else {
        ++ref_consonants;
      }
    }
    vowel_total += ref_vowels;
    consonant_total += ref_consonants;

    std::set<int> touched_vowel_pos, touched_consonant_pos;
    int ins_vowels = 0, ins_consonants = 0;
    for (const auto& op : metrics::LevenshteinAlignment(ref, hyp)) {
      switch (op.kind) {
        case metrics::EditOp::kMatch:
          break;
        case metrics::EditOp::kSub:
        case metrics::EditOp::kDel:
          if (inventory.is_vowel(ref[op.ref_pos])) {
            touched_vowel_pos.insert(op.ref_pos);
          } else {
            touched_consonant_pos.insert(op.ref_pos);
          }
          break;
        case metrics::EditOp::kIns:
          if (inventory.is_vowel(hyp[op.hyp_pos])) {
            ++ins_vowels;
          } else {
            ++ins_consonants;
          }
          break;
      }
    }
    vowel_touched += std::min<long>(
        static_cast<long>(touched_vowel_pos.size()) + ins_vowels, ref_vowels);
    consonant_touched += std::min<long>(
        static_cast<long>(touched_consonant_pos.size()) + ins_consonants, ref_consonants);
  }

  LexiconDiffStats stats;
  stats.common_words = static_cast<int>(common.size());
  stats.accented_words = stats.common_words - shared;
  stats.shared_word_pct = 100.0 * shared / stats.common_words;
  stats.accented_word_pct = 100.0 - stats.shared_word_pct;
  stats.vowel_variation_pct =
      vowel_total > 0 ? 100.0 * vowel_touched / vowel_total : 0.0;
  stats.consonant_variation_pct =
      consonant_total > 0 ? 100.0 * consonant_touched / consonant_total : 0.0;
  return stats;
}

CharVocab CharVocab::FromAlphabet(const std::string& chars) {
  CharVocab v;
  v.chars_.push_back('\0');  // pad slot
  auto add = [&v](char c) {
    if (v.index_.count(c)) return;
    v.index_[c] = static_cast<int>(v.chars_.size());
    v.chars_.push_back(c);
  };
  add(' ');
  for (char c : chars) {
    if (c == '\0') continue;
    add(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return v;
}

CharVocab CharVocab::Default() {
  return FromAlphabet("abcdefghijklmnopqrstuvwxyz'0123456789");
}

CharVocab CharVocab::LoadText(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open alphabet: " + path);
  std::string line;
  std::getline(in, line);
  return FromAlphabet(line);
}

void CharVocab::SaveText(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write alphabet: " + path);
  // Skip pad and the implicit space.
  for (std::size_t i = 2; i < chars_.size(); ++i) out << chars_[i];
  out << "\n";
}

bool CharVocab::contains(char c) const { return index_.count(c) > 0; }

int CharVocab::index(char c) const {
  auto it = index_.find(c);
  if (it == index_.end()) {
    throw std::invalid_argument(std::string("character '") + c + "' not in vocabulary");
  }
  return it->second;
}

std::vector<int> CharVocab::Encode(const std::string& text) const {
  std::vector<int> out;
  out.reserve(text.size());
  for (char c : text) out.push_back(index(c));
  return out;
}

std::string NormalizeText(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool last_space = true;
  for (char raw : text) {
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
    const bool word_char =
        (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '\'';
    if (word_char) {
      out.push_back(c);
      last_space = false;
    } else if (!last_space) {
      out.push_back(' ');
      last_space = true;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::vector<std::string> SplitWords(const std::string& normalized) {
  std::vector<std::string> words;
  std::istringstream ss(normalized);
  std::string w;
  while (ss >> w) words.push_back(w);
  return words;
}

CorpusBuildResult BuildG2pCorpus(const std::vector<std::string>& texts, const Lexicon& lex,
                                 const AccentId& accent, std::pair<int, int> len_bounds,
                                 const CharVocab& chars, const PhonemeInventory& inventory) {
  CorpusBuildResult result;
  int idx = 0;
  for (const auto& text : texts) {
    const std::string norm = NormalizeText(text);
    const int len = static_cast<int>(norm.size());
    ++idx;
    if (len < len_bounds.first || len > len_bounds.second) {
      ++result.dropped_length;
      continue;
    }
    const auto words = SplitWords(norm);
    if (words.empty()) {
      ++result.dropped_length;
      continue;
    }
    bool oov = false;
    for (const auto& w : words) {
      if (!lex.entries.count(w)) {
        oov = true;
        break;
      }
    }
    for (char c : norm) {
      if (!chars.contains(c)) {
        oov = true;
        break;
      }
    }
    if (oov) {
      ++result.dropped_oov;
      continue;
    }
    G2PExample ex;
    ex.id = "utt" + std::to_string(idx - 1);
    ex.accent = accent;
    ex.graphemes = chars.Encode(norm);
    ex.phonemes.push_back(inventory.bos());
    for (std::size_t w = 0; w < words.size(); ++w) {
      if (w > 0) ex.phonemes.push_back(inventory.wb());
      const auto& phones = lex.entries.at(words[w]);
      ex.phonemes.insert(ex.phonemes.end(), phones.begin(), phones.end());
    }
    ex.phonemes.push_back(inventory.eos());
    result.examples.push_back(std::move(ex));
  }
  if (result.examples.empty()) {
    throw std::invalid_argument("build_g2p_corpus: no sentences retained");
  }
  return result;
}

void WriteCorpusManifest(const std::string& path, const std::vector<G2PExample>& examples) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus manifest: " + path);
  for (const auto& ex : examples) {
    nlohmann::json rec = {{"id", ex.id},
                          {"grapheme_indices", ex.graphemes},
                          {"phoneme_indices", ex.phonemes},
                          {"accent_id", ex.accent.id}};
    out << rec.dump() << "\n";
  }
}

std::vector<G2PExample> ReadCorpusManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus manifest: " + path);
  std::vector<G2PExample> examples;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
    if (rec.is_discarded()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad manifest record");
    }
    G2PExample ex;
    ex.id = rec.at("id").get<std::string>();
    ex.graphemes = rec.at("grapheme_indices").get<std::vector<int>>();
    ex.phonemes = rec.at("phoneme_indices").get<std::vector<int>>();
    ex.accent.id = rec.at("accent_id").get<int>();
    examples.push_back(std::move(ex));
  }
  return examples;
}

}  // namespace accentts::lexicon
