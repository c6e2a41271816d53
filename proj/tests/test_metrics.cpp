// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "artrec/error.hpp"
#include "artrec/metrics.hpp"
#include "support/oracles.hpp"

using namespace artrec;

namespace {

SymbolSeq seq(std::initializer_list<const char*> xs) {
  SymbolSeq out;
  for (const char* x : xs) out.emplace_back(x);
  return out;
}

void all_sequences(int max_len, const SymbolSeq& alphabet, std::vector<SymbolSeq>& out,
                   SymbolSeq cur = {}) {
  out.push_back(cur);
  if (static_cast<int>(cur.size()) == max_len) return;
  for (const auto& a : alphabet) {
    cur.push_back(a);
    all_sequences(max_len, alphabet, out, cur);
    cur.pop_back();
  }
}

SymbolSeq random_seq(std::mt19937_64& rng, const SymbolSeq& alphabet, int max_len) {
  SymbolSeq out(rng() % static_cast<unsigned>(max_len + 1));
  for (auto& s : out) s = alphabet[rng() % alphabet.size()];
  return out;
}

}  // namespace

TEST_CASE("alignment examples") {
  auto same = levenshtein_align(seq({"a", "b", "c"}), seq({"a", "b", "c"}));
  CHECK(same.distance == 0);
  CHECK(same.count(EditOp::kMatch) == 3);

  auto sub = levenshtein_align(seq({"a", "b", "c"}), seq({"a", "d", "c"}));
  CHECK(sub.distance == 1);
  REQUIRE(sub.count(EditOp::kSubstitution) == 1);
  CHECK(sub.ops[1].ref == "b");
  CHECK(sub.ops[1].hyp == "d");

  auto empty = levenshtein_align({}, {});
  CHECK(empty.distance == 0);
  CHECK(empty.ops.empty());

  auto del = levenshtein_align(seq({"a", "b"}), {});
  CHECK(del.distance == 2);
  CHECK(del.count(EditOp::kDeletion) == 2);
}

TEST_CASE("tie breaking prefers substitution over deletion plus insertion") {
  // ref [a,b] vs hyp [b,a]: cost 2 either as two substitutions or as
  // deletion + insertion; the backtrace from the end picks substitution.
  auto r = levenshtein_align(seq({"a", "b"}), seq({"b", "a"}));
  CHECK(r.distance == 2);
  CHECK(r.count(EditOp::kSubstitution) == 2);
  // ref [a] vs hyp [b, a]: the final a matches, then an insertion remains.
  auto i = levenshtein_align(seq({"a"}), seq({"b", "a"}));
  CHECK(i.ops.back().op == EditOp::kMatch);
  CHECK(i.ops.front().op == EditOp::kInsertion);
  // ref [a, b] vs hyp [c]: substitution on b is preferred at the end, a is deleted.
  auto d = levenshtein_align(seq({"a", "b"}), seq({"c"}));
  CHECK(d.ops.back().op == EditOp::kSubstitution);
  CHECK(d.ops.front().op == EditOp::kDeletion);
}

TEST_CASE("exhaustive agreement with the recursive edit distance") {
  std::vector<SymbolSeq> all;
  all_sequences(4, seq({"a", "b", "c"}), all);
  for (const auto& a : all) {
    for (const auto& b : all) {
      const auto r = levenshtein_align(a, b);
      REQUIRE(r.distance == oracle::edit_distance(a, b));
      REQUIRE(r.distance == r.count(EditOp::kSubstitution) + r.count(EditOp::kDeletion) +
                                r.count(EditOp::kInsertion));
    }
  }
}

TEST_CASE("alignment replay and symmetry") {
  std::mt19937_64 rng(7);
  const auto alphabet = seq({"a", "b", "c", "d"});
  for (int i = 0; i < 300; ++i) {
    const auto a = random_seq(rng, alphabet, 8);
    const auto b = random_seq(rng, alphabet, 8);
    const auto r = levenshtein_align(a, b);
    const auto [ra, rb] = replay_alignment(r);
    CHECK(ra == a);
    CHECK(rb == b);
    CHECK(r.distance == levenshtein_align(b, a).distance);
    CHECK(levenshtein_align(a, a).count(EditOp::kMatch) == static_cast<int>(a.size()));
  }
}

TEST_CASE("per") {
  CHECK(per(std::vector<RefHypPair>{{seq({"a", "b"}), seq({"a", "b"})}}) == 0.0);
  CHECK(per(std::vector<RefHypPair>{{seq({"a", "b"}), {}}}) == 100.0);
  CHECK(format_per(per(std::vector<RefHypPair>{{seq({"a", "b"}), {}}})) == "100.00");
  CHECK_THROWS_AS(per(std::vector<RefHypPair>{{{}, seq({"a"})}}), Error);

  std::vector<RefHypPair> pairs{{seq({"a", "b", "c"}), seq({"a"})},
                                {seq({"x"}), seq({"y", "x"})},
                                {seq({"a", "a"}), seq({"a", "b"})}};
  const double p = per(pairs);
  CHECK(p == doctest::Approx(100.0 * 4.0 / 6.0));
  std::reverse(pairs.begin(), pairs.end());
  CHECK(per(pairs) == p);
  CHECK(format_per(21.66) == "21.66");
  CHECK(format_per(100.0 * 4.0 / 6.0) == "66.67");
}

TEST_CASE("per table rendering") {
  const auto table = render_per_table({{"True Art. Feat. + voicing", 21.66},
                                       {"Mean-contour", 43.18}});
  CHECK(table.find("True Art. Feat. + voicing   21.66\n") != std::string::npos);
  CHECK(table.find("43.18") != std::string::npos);
}

TEST_CASE("confusion matrix hand-computed cases") {
  const Vocabulary vocab = default_vocabulary();
  const PhoneticClassMap classes = default_class_map(vocab);
  const auto dental = static_cast<Eigen::Index>(PhoneticClass::kDental);
  const auto labial = static_cast<Eigen::Index>(PhoneticClass::kLabial);

  SUBCASE("all matches in one class") {
    const auto cm = confusion_matrix({levenshtein_align(seq({"t", "d", "n"}), seq({"t", "d", "n"}))},
                                     classes, true);
    CHECK(cm.values(dental, dental) == 1.0);
    CHECK(cm.values.sum() == 1.0);
  }
  SUBCASE("one of four dentals deleted") {
    const auto cm = confusion_matrix({levenshtein_align(seq({"t", "t", "t", "t"}), seq({"t", "t", "t"}))},
                                     classes, true);
    CHECK(cm.values(dental, dental) == 0.75);
    CHECK(cm.values(dental, cm.deletion_col()) == 0.25);
    const auto raw = confusion_matrix({levenshtein_align(seq({"t", "t", "t", "t"}), seq({"t", "t", "t"}))},
                                      classes, false);
    CHECK(raw.values(dental, dental) == 3.0);
    CHECK(raw.values(dental, raw.deletion_col()) == 1.0);
  }
  SUBCASE("insertions split across classes") {
    const auto cm = confusion_matrix({levenshtein_align(seq({"a"}), seq({"p", "a", "t"}))}, classes, true);
    CHECK(cm.insertions == 2);
    CHECK(cm.values(cm.insertion_row(), labial) == 0.5);
    CHECK(cm.values(cm.insertion_row(), dental) == 0.5);
  }
  SUBCASE("unknown symbols are rejected") {
    CHECK_THROWS_AS(confusion_matrix({levenshtein_align(seq({"zz"}), {})}, classes, false), Error);
  }
}

TEST_CASE("confusion matrix csv layout") {
  const Vocabulary vocab = default_vocabulary();
  const auto cm = confusion_matrix({levenshtein_align(seq({"t", "a"}), seq({"d"}))},
                                   default_class_map(vocab), true);
  const std::string csv = confusion_matrix_csv(cm);
  CHECK(csv.rfind("true_class,Dental,Labial,Palatal,FrontVowels,BackVowels,OpenVowels,"
                  "FrontRoundedVowels,Others,DELETION\n", 0) == 0);
  // From the end: a -> d is a substitution, then t is deleted.
  CHECK(csv.find("\nDental,0.000000,0.000000,0.000000,0.000000,0.000000,0.000000,0.000000,"
                 "0.000000,1.000000\n") != std::string::npos);
  CHECK(csv.find("\nOpenVowels,1.000000,0.000000") != std::string::npos);
  CHECK(csv.find("\nINSERTION,") != std::string::npos);
}
