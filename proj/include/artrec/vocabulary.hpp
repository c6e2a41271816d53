// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace artrec {

enum class TokenKind { kPhonetic, kBlank, kSilence, kUnknown, kNoise };

std::string_view to_string(TokenKind kind);
TokenKind token_kind_from_string(std::string_view text);

struct Token {
  std::string symbol;
  int index = 0;
  TokenKind kind = TokenKind::kPhonetic;
  std::optional<bool> voiced;  // set only for phonetic tokens
};

/// One line of a vocabulary specification.
struct TokenSpec {
  std::string symbol;
  TokenKind kind = TokenKind::kPhonetic;
  std::optional<bool> voiced;
};

/// Immutable token inventory. The blank token always sits at index 0.
class Vocabulary {
 public:
  static constexpr int kBlankIndex = 0;

  /// Builds a vocabulary from an ordered spec. A blank entry that is not
  /// first is moved to the front; the relative order of the rest is kept.
  static Vocabulary build(const std::vector<TokenSpec>& spec);

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<Token>& tokens() const { return tokens_; }
  const Token& token(int index) const;
  const std::string& symbol(int index) const { return token(index).symbol; }

  bool contains(std::string_view symbol) const;
  /// Throws artrec::Error for unknown symbols.
  int index_of(std::string_view symbol) const;

  /// Voicing of a phonetic token; nullopt for special tokens.
  std::optional<bool> is_voiced(std::string_view symbol) const;

  /// Index of the silence token, if the inventory has one.
  std::optional<int> silence_index() const { return silence_index_; }

  bool is_phonetic(int index) const { return token(index).kind == TokenKind::kPhonetic; }

 private:
  std::vector<Token> tokens_;
  std::map<std::string, int, std::less<>> symbol_index_;
  std::optional<int> silence_index_;
};

enum class PhoneticClass {
  kDental,
  kLabial,
  kPalatal,
  kFrontVowels,
  kBackVowels,
  kOpenVowels,
  kFrontRoundedVowels,
  kOthers,
};

inline constexpr int kNumPhoneticClasses = 8;
inline constexpr int kNumNamedClasses = 7;  // every class except Others

inline constexpr std::array<PhoneticClass, kNumPhoneticClasses> kAllPhoneticClasses = {
    PhoneticClass::kDental,      PhoneticClass::kLabial,     PhoneticClass::kPalatal,
    PhoneticClass::kFrontVowels, PhoneticClass::kBackVowels, PhoneticClass::kOpenVowels,
    PhoneticClass::kFrontRoundedVowels, PhoneticClass::kOthers};

/// File-safe identifier, e.g. "FrontVowels".
std::string_view to_string(PhoneticClass cls);
/// Human-readable label, e.g. "Front Vowels".
std::string_view display_name(PhoneticClass cls);
PhoneticClass phonetic_class_from_string(std::string_view text);

/// Place-of-articulation grouping over one vocabulary.
class PhoneticClassMap {
 public:
  /// Tokens missing from `table` map to Others. Table entries must name
  /// tokens of `vocab`.
  static PhoneticClassMap build(const Vocabulary& vocab,
                                const std::vector<std::pair<std::string, PhoneticClass>>& table);

  PhoneticClass class_of(std::string_view symbol) const;
  PhoneticClass class_of(int token_index) const { return by_index_.at(token_index); }

 private:
  std::map<std::string, PhoneticClass, std::less<>> class_of_;
  std::vector<PhoneticClass> by_index_;
};

/// Convenience wrapper matching the free-function form.
inline PhoneticClass phonetic_class_of(const PhoneticClassMap& map, std::string_view symbol) {
  return map.class_of(symbol);
}

// Default French inventory: 42 phonetic tokens plus blank, silence, unknown
// and five vowel-specific noise tokens (50 in total). The unvoiced plosives
// p, t, k are split into a closure token ("p") and a burst token ("p_burst").
std::vector<TokenSpec> default_vocabulary_spec();
Vocabulary default_vocabulary();
std::vector<std::pair<std::string, PhoneticClass>> default_class_table();
PhoneticClassMap default_class_map(const Vocabulary& vocab);

namespace special_tokens {
inline constexpr std::string_view kBlank = "<blank>";
inline constexpr std::string_view kSilence = "<sil>";
inline constexpr std::string_view kUnknown = "<unk>";
}  // namespace special_tokens

// `symbol<TAB>kind<TAB>voiced|unvoiced|na`, one token per line.
std::vector<TokenSpec> read_vocabulary_spec(const std::filesystem::path& path);
void write_vocabulary_spec(const std::filesystem::path& path, const Vocabulary& vocab);

// `symbol<TAB>class`, one entry per line.
std::vector<std::pair<std::string, PhoneticClass>> read_class_table(
    const std::filesystem::path& path);
void write_class_table(const std::filesystem::path& path, const Vocabulary& vocab,
                       const PhoneticClassMap& map);

}  // namespace artrec
