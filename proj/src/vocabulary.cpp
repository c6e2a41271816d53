// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "artrec/vocabulary.hpp"

#include <algorithm>
#include <sstream>

#include "artrec/error.hpp"
#include "artrec/text_io.hpp"

namespace artrec {

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::kPhonetic: return "phonetic";
    case TokenKind::kBlank: return "blank";
    case TokenKind::kSilence: return "silence";
    case TokenKind::kUnknown: return "unknown";
    case TokenKind::kNoise: return "noise";
  }
  return "?";
}

TokenKind token_kind_from_string(std::string_view text) {
  for (auto kind : {TokenKind::kPhonetic, TokenKind::kBlank, TokenKind::kSilence,
                    TokenKind::kUnknown, TokenKind::kNoise}) {
    if (to_string(kind) == text) return kind;
  }
  throw Error("unknown token kind '" + std::string(text) + "'");
}

Vocabulary Vocabulary::build(const std::vector<TokenSpec>& spec) {
  const auto blanks = std::count_if(spec.begin(), spec.end(), [](const TokenSpec& t) {
    return t.kind == TokenKind::kBlank;
  });
  if (blanks != 1) {
    throw Error("vocabulary must contain exactly one blank token, found " +
                std::to_string(blanks));
  }

  std::vector<const TokenSpec*> ordered;
  ordered.reserve(spec.size());
  for (const auto& t : spec)
    if (t.kind == TokenKind::kBlank) ordered.push_back(&t);
  for (const auto& t : spec)
    if (t.kind != TokenKind::kBlank) ordered.push_back(&t);

  Vocabulary vocab;
  for (const TokenSpec* t : ordered) {
    if (t->symbol.empty()) throw Error("vocabulary contains an empty symbol");
    const int index = static_cast<int>(vocab.tokens_.size());
    if (!vocab.symbol_index_.emplace(t->symbol, index).second) {
      throw Error("duplicate vocabulary symbol '" + t->symbol + "'");
    }
    Token token{t->symbol, index, t->kind, std::nullopt};
    if (t->kind == TokenKind::kPhonetic) token.voiced = t->voiced;
    if (t->kind == TokenKind::kSilence && !vocab.silence_index_) vocab.silence_index_ = index;
    vocab.tokens_.push_back(std::move(token));
  }
  return vocab;
}

const Token& Vocabulary::token(int index) const {
  if (index < 0 || index >= size()) {
    throw Error("token index " + std::to_string(index) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(index)];
}

bool Vocabulary::contains(std::string_view symbol) const {
  return symbol_index_.find(symbol) != symbol_index_.end();
}

int Vocabulary::index_of(std::string_view symbol) const {
  const auto it = symbol_index_.find(symbol);
  if (it == symbol_index_.end()) throw Error("unknown token '" + std::string(symbol) + "'");
  return it->second;
}

std::optional<bool> Vocabulary::is_voiced(std::string_view symbol) const {
  return token(index_of(symbol)).voiced;
}

namespace {

struct ClassName {
  PhoneticClass cls;
  std::string_view id;
  std::string_view display;
};

constexpr ClassName kClassNames[] = {
    {PhoneticClass::kDental, "Dental", "Dental"},
    {PhoneticClass::kLabial, "Labial", "Labial"},
    {PhoneticClass::kPalatal, "Palatal", "Palatal"},
    {PhoneticClass::kFrontVowels, "FrontVowels", "Front Vowels"},
    {PhoneticClass::kBackVowels, "BackVowels", "Back Vowels"},
    {PhoneticClass::kOpenVowels, "OpenVowels", "Open Vowels"},
    {PhoneticClass::kFrontRoundedVowels, "FrontRoundedVowels", "Front Rounded Vowels"},
    {PhoneticClass::kOthers, "Others", "Others"},
};

}  // namespace

std::string_view to_string(PhoneticClass cls) {
  for (const auto& c : kClassNames)
    if (c.cls == cls) return c.id;
  return "?";
}

std::string_view display_name(PhoneticClass cls) {
  for (const auto& c : kClassNames)
    if (c.cls == cls) return c.display;
  return "?";
}

PhoneticClass phonetic_class_from_string(std::string_view text) {
  for (const auto& c : kClassNames)
    if (c.id == text || c.display == text) return c.cls;
  throw Error("unknown phonetic class '" + std::string(text) + "'");
}

PhoneticClassMap PhoneticClassMap::build(
    const Vocabulary& vocab, const std::vector<std::pair<std::string, PhoneticClass>>& table) {
  PhoneticClassMap map;
  map.by_index_.assign(static_cast<std::size_t>(vocab.size()), PhoneticClass::kOthers);
  for (const auto& token : vocab.tokens()) map.class_of_.emplace(token.symbol, PhoneticClass::kOthers);
  for (const auto& [symbol, cls] : table) {
    if (!vocab.contains(symbol)) {
      throw Error("class table entry '" + symbol + "' is not in the vocabulary");
    }
    map.class_of_[symbol] = cls;
    map.by_index_[static_cast<std::size_t>(vocab.index_of(symbol))] = cls;
  }
  return map;
}

PhoneticClass PhoneticClassMap::class_of(std::string_view symbol) const {
  const auto it = class_of_.find(symbol);
  if (it == class_of_.end()) throw Error("unknown token '" + std::string(symbol) + "'");
  return it->second;
}

namespace {

struct DefaultPhone {
  const char* symbol;
  bool voiced;
  PhoneticClass cls;
};

// French phone set. Closure and burst of p, t, k share the parent class.
constexpr DefaultPhone kDefaultPhones[] = {
    {"t", false, PhoneticClass::kDental},
    {"t_burst", false, PhoneticClass::kDental},
    {"d", true, PhoneticClass::kDental},
    {"n", true, PhoneticClass::kDental},
    {"l", true, PhoneticClass::kDental},
    {"z", true, PhoneticClass::kDental},
    {"s", false, PhoneticClass::kDental},
    {"p", false, PhoneticClass::kLabial},
    {"p_burst", false, PhoneticClass::kLabial},
    {"b", true, PhoneticClass::kLabial},
    {"m", true, PhoneticClass::kLabial},
    {"f", false, PhoneticClass::kLabial},
    {"v", true, PhoneticClass::kLabial},
    {"k", false, PhoneticClass::kPalatal},
    {"k_burst", false, PhoneticClass::kPalatal},
    {"g", true, PhoneticClass::kPalatal},
    {"ʒ", true, PhoneticClass::kPalatal},
    {"ʃ", false, PhoneticClass::kPalatal},
    {"i", true, PhoneticClass::kFrontVowels},
    {"e", true, PhoneticClass::kFrontVowels},
    {"ɛ", true, PhoneticClass::kFrontVowels},
    {"ɛ̃", true, PhoneticClass::kFrontVowels},
    {"œ̃", true, PhoneticClass::kFrontVowels},
    {"j", true, PhoneticClass::kFrontVowels},
    {"u", true, PhoneticClass::kBackVowels},
    {"o", true, PhoneticClass::kBackVowels},
    {"ɔ", true, PhoneticClass::kBackVowels},
    {"ɔ̃", true, PhoneticClass::kBackVowels},
    {"w", true, PhoneticClass::kBackVowels},
    {"a", true, PhoneticClass::kOpenVowels},
    {"ɑ̃", true, PhoneticClass::kOpenVowels},
    {"y", true, PhoneticClass::kFrontRoundedVowels},
    {"ø", true, PhoneticClass::kFrontRoundedVowels},
    {"œ", true, PhoneticClass::kFrontRoundedVowels},
    {"ɥ", true, PhoneticClass::kFrontRoundedVowels},
    {"ʁ", true, PhoneticClass::kOthers},
    {"ɲ", true, PhoneticClass::kOthers},
    {"ŋ", true, PhoneticClass::kOthers},
    {"ə", true, PhoneticClass::kOthers},
    {"ɑ", true, PhoneticClass::kOthers},
    {"x", false, PhoneticClass::kOthers},
    {"h", false, PhoneticClass::kOthers},
};

}  // namespace

std::vector<TokenSpec> default_vocabulary_spec() {
  std::vector<TokenSpec> spec = {
      {std::string(special_tokens::kBlank), TokenKind::kBlank, std::nullopt},
      {std::string(special_tokens::kSilence), TokenKind::kSilence, std::nullopt},
      {std::string(special_tokens::kUnknown), TokenKind::kUnknown, std::nullopt},
      {"<noise_i>", TokenKind::kNoise, std::nullopt},
      {"<noise_e>", TokenKind::kNoise, std::nullopt},
      {"<noise_u>", TokenKind::kNoise, std::nullopt},
      {"<noise_y>", TokenKind::kNoise, std::nullopt},
      {"<noise_ø>", TokenKind::kNoise, std::nullopt},
  };
  for (const auto& p : kDefaultPhones) spec.push_back({p.symbol, TokenKind::kPhonetic, p.voiced});
  return spec;
}

Vocabulary default_vocabulary() { return Vocabulary::build(default_vocabulary_spec()); }

std::vector<std::pair<std::string, PhoneticClass>> default_class_table() {
  std::vector<std::pair<std::string, PhoneticClass>> table;
  for (const auto& p : kDefaultPhones) {
    if (p.cls != PhoneticClass::kOthers) table.emplace_back(p.symbol, p.cls);
  }
  return table;
}

PhoneticClassMap default_class_map(const Vocabulary& vocab) {
  std::vector<std::pair<std::string, PhoneticClass>> table;
  for (auto& entry : default_class_table()) {
    if (vocab.contains(entry.first)) table.push_back(std::move(entry));
  }
  return PhoneticClassMap::build(vocab, table);
}

std::vector<TokenSpec> read_vocabulary_spec(const std::filesystem::path& path) {
  std::vector<TokenSpec> spec;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    const auto fields = split(lines[i], '\t');
    if (fields.size() != 3) throw Error(where + ": expected symbol<TAB>kind<TAB>voicing");
    TokenSpec t;
    t.symbol = fields[0];
    try {
      t.kind = token_kind_from_string(fields[1]);
    } catch (const Error& e) {
      throw Error(where + ": " + e.what());
    }
    if (fields[2] == "voiced") {
      t.voiced = true;
    } else if (fields[2] == "unvoiced") {
      t.voiced = false;
    } else if (fields[2] != "na") {
      throw Error(where + ": voicing must be voiced, unvoiced or na");
    }
    spec.push_back(std::move(t));
  }
  return spec;
}

void write_vocabulary_spec(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ostringstream out;
  for (const auto& t : vocab.tokens()) {
    out << t.symbol << '\t' << to_string(t.kind) << '\t'
        << (t.voiced ? (*t.voiced ? "voiced" : "unvoiced") : "na") << '\n';
  }
  write_text_file(path, out.str());
}

std::vector<std::pair<std::string, PhoneticClass>> read_class_table(
    const std::filesystem::path& path) {
  std::vector<std::pair<std::string, PhoneticClass>> table;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto fields = split(lines[i], '\t');
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    if (fields.size() != 2) throw Error(where + ": expected symbol<TAB>class");
    try {
      table.emplace_back(fields[0], phonetic_class_from_string(fields[1]));
    } catch (const Error& e) {
      throw Error(where + ": " + e.what());
    }
  }
  return table;
}

void write_class_table(const std::filesystem::path& path, const Vocabulary& vocab,
                       const PhoneticClassMap& map) {
  std::ostringstream out;
  for (const auto& t : vocab.tokens()) out << t.symbol << '\t' << to_string(map.class_of(t.index)) << '\n';
  write_text_file(path, out.str());
}

}  // namespace artrec
