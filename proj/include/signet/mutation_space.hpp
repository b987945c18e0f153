#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace signet {

/// Nucleotide codes in lexicographic order: A=0, C=1, G=2, T=3.
inline constexpr std::array<char, 4> kNucleotides{'A', 'C', 'G', 'T'};

/// Pyrimidine-centred base substitutions in canonical order.
inline constexpr std::array<std::string_view, 6> kBaseMutations{
    "C>A", "C>G", "C>T", "T>A", "T>C", "T>G"};

int nucleotide_code(char c);  // -1 when c is not one of ACGT (case-insensitive)
char complement(char c);
std::string reverse_complement(std::string_view s);

/// A single strand-symmetric mutation type.
///
/// `left` and `right` are written in reading order, so for two flanks per side
/// `left` is "L2 L1" and `right` is "R1 R2".
struct MutationType {
  int base = 0;  // index into kBaseMutations
  std::string left;
  std::string right;

  char ref() const { return kBaseMutations[base][0]; }
  char alt() const { return kBaseMutations[base][2]; }

  /// Nucleotide code of the flank at distance `d` (1-based) on either side.
  int left_flank(int d) const;
  int right_flank(int d) const;

  std::string label() const;

  friend bool operator==(const MutationType&, const MutationType&) = default;
};

/// Reverse-complements purine-centred substitutions onto the pyrimidine strand.
/// Throws std::invalid_argument on ref == alt, non-ACGT input or mismatched
/// context lengths.
MutationType canonicalize(char ref, char alt, std::string_view left, std::string_view right);

/// The ordered set of mutation types with `flanks` nucleotides on each side.
///
/// Index layout: base mutation varies slowest, then the left context read as a
/// base-4 number (outermost flank most significant), then the right context
/// (rightmost flank fastest).
class MutationSpace {
 public:
  explicit MutationSpace(int flanks_per_side = 1);

  int flanks() const { return flanks_; }
  std::size_t size() const { return size_; }
  std::size_t context_size() const { return context_size_; }  // 4^n

  MutationType type_at(std::size_t index) const;
  std::size_t index_of(const MutationType& t) const;
  std::string label(std::size_t index) const { return type_at(index).label(); }

  /// Parses "<left>[<ref>><alt>]<right>", canonicalizing purine references.
  /// Throws std::invalid_argument on malformed input or a context length that
  /// does not match this space.
  MutationType parse_label(std::string_view s) const;
  std::size_t parse_index(std::string_view s) const { return index_of(parse_label(s)); }

  std::vector<MutationType> enumerate() const;
  std::vector<std::string> labels() const;

  /// Flank count implied by a label's width; throws on malformed labels.
  static int flanks_of_label(std::string_view s);

  friend bool operator==(const MutationSpace& a, const MutationSpace& b) {
    return a.flanks_ == b.flanks_;
  }

 private:
  int flanks_;
  std::size_t context_size_;
  std::size_t size_;
};

}  // namespace signet
