#include "doctest.h"

#include <set>

#include "signet/mutation_space.hpp"

using namespace signet;

TEST_CASE("type counts follow 6 * 4^(2n)") {
  CHECK(MutationSpace(0).size() == 6);
  CHECK(MutationSpace(1).size() == 96);
  CHECK(MutationSpace(2).size() == 1536);
  CHECK(MutationSpace(3).size() == 24576);
  for (int n = 0; n <= 3; ++n) CHECK(MutationSpace(n).enumerate().size() == MutationSpace(n).size());
  CHECK_THROWS_AS(MutationSpace(-1), std::invalid_argument);
}

TEST_CASE("canonical order for one flank") {
  const MutationSpace s(1);
  const auto labels = s.labels();
  CHECK(labels[0] == "A[C>A]A");
  CHECK(labels[1] == "A[C>A]C");
  CHECK(labels[3] == "A[C>A]T");
  CHECK(labels[4] == "C[C>A]A");
  CHECK(labels[16] == "A[C>G]A");
  CHECK(labels[95] == "T[T>G]T");
  // base * 16 + left * 4 + right
  const std::string nt = "ACGT";
  for (int b = 0; b < 6; ++b)
    for (int l = 0; l < 4; ++l)
      for (int r = 0; r < 4; ++r) {
        const std::string expect = std::string(1, nt[l]) + "[" + std::string(kBaseMutations[b]) + "]" + nt[r];
        CHECK(labels[static_cast<std::size_t>(b * 16 + l * 4 + r)] == expect);
      }
}

TEST_CASE("canonical order for two flanks") {
  const MutationSpace s(2);
  CHECK(s.label(0) == "AA[C>A]AA");
  CHECK(s.label(1) == "AA[C>A]AC");
  CHECK(s.label(4) == "AA[C>A]CA");
  CHECK(s.label(16) == "AC[C>A]AA");
  CHECK(s.label(64) == "CA[C>A]AA");
  CHECK(s.label(256) == "AA[C>G]AA");
  CHECK(s.label(1535) == "TT[T>G]TT");
  const auto t = s.parse_label("GT[C>T]AC");
  CHECK(t.left_flank(1) == 3);
  CHECK(t.left_flank(2) == 2);
  CHECK(t.right_flank(1) == 0);
  CHECK(t.right_flank(2) == 1);
}

TEST_CASE("zero flanks are the six base mutations") {
  const auto labels = MutationSpace(0).labels();
  REQUIRE(labels.size() == 6);
  for (int b = 0; b < 6; ++b) CHECK(labels[static_cast<std::size_t>(b)] == "[" + std::string(kBaseMutations[b]) + "]");
}

TEST_CASE("labels round-trip") {
  for (int n = 0; n <= 2; ++n) {
    const MutationSpace s(n);
    std::set<std::string> seen;
    for (std::size_t t = 0; t < s.size(); ++t) {
      const auto l = s.label(t);
      CHECK(s.parse_index(l) == t);
      seen.insert(l);
    }
    CHECK(seen.size() == s.size());
  }
}

TEST_CASE("canonicalize") {
  CHECK(canonicalize('G', 'A', "C", "T").label() == "A[C>T]G");
  CHECK(canonicalize('C', 'T', "A", "G").label() == "A[C>T]G");
  CHECK(canonicalize('A', 'C', "T", "T").label() == "A[T>G]A");
  CHECK(canonicalize('G', 'T', "AC", "GT").label() == "AC[C>A]GT");
  CHECK_THROWS_AS(canonicalize('C', 'C', "A", "A"), std::invalid_argument);
  CHECK_THROWS_AS(canonicalize('C', 'N', "A", "A"), std::invalid_argument);
  CHECK_THROWS_AS(canonicalize('C', 'T', "X", "A"), std::invalid_argument);
  CHECK_THROWS_AS(canonicalize('C', 'T', "AA", "A"), std::invalid_argument);
}

TEST_CASE("canonicalize is idempotent and reverse-complement invariant") {
  const std::string nt = "ACGT";
  for (char ref : nt)
    for (char alt : nt) {
      if (ref == alt) continue;
      for (char l1 : nt)
        for (char l2 : nt)
          for (char r1 : nt)
            for (char r2 : nt) {
              const std::string left{l2, l1}, right{r1, r2};
              const MutationType c = canonicalize(ref, alt, left, right);
              CHECK((c.ref() == 'C' || c.ref() == 'T'));
              CHECK(canonicalize(c.ref(), c.alt(), c.left, c.right) == c);
              const MutationType rc =
                  canonicalize(complement(ref), complement(alt), reverse_complement(right), reverse_complement(left));
              CHECK(rc == c);
            }
    }
}

TEST_CASE("purine-centred labels are accepted") {
  const MutationSpace s(1);
  CHECK(s.parse_index("C[G>A]T") == s.parse_index("A[C>T]G"));
  CHECK(s.parse_index("a[c>a]a") == 0);
}

TEST_CASE("malformed labels are rejected") {
  const MutationSpace s(1);
  CHECK_THROWS_AS(s.parse_label("AC>AA"), std::invalid_argument);
  CHECK_THROWS_AS(s.parse_label("A[C-A]A"), std::invalid_argument);
  CHECK_THROWS_AS(s.parse_label("AA[C>A]AA"), std::invalid_argument);
  CHECK_THROWS_AS(s.parse_label("A[C>A]"), std::invalid_argument);
  CHECK_THROWS_AS(s.parse_label("A[C>C]A"), std::invalid_argument);
  CHECK(MutationSpace::flanks_of_label("AA[C>A]AA") == 2);
  CHECK_THROWS_AS(MutationSpace::flanks_of_label("A[C>A]AA"), std::invalid_argument);
}
