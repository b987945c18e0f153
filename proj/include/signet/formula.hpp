#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace signet {

/// A factor of the mutation type, identified by its position relative to the
/// mutated site: -2 = L2, -1 = L1, 0 = M, 1 = R1, 2 = R2.
struct Factor {
  int position = 0;

  static constexpr int kMaxDistance = 2;

  bool is_mutation() const { return position == 0; }
  int levels() const { return position == 0 ? 6 : 4; }
  std::string name() const;

  friend auto operator<=>(const Factor&, const Factor&) = default;
};

/// An interaction term: a non-empty set of distinct factors, stored as a bit
/// mask over positions (bit `position + kMaxDistance`).
class Term {
 public:
  Term() = default;
  explicit Term(std::uint32_t mask) : mask_(mask) {}

  static Term of(std::initializer_list<int> positions);

  std::uint32_t mask() const { return mask_; }
  bool empty() const { return mask_ == 0; }
  int size() const;
  bool contains(Factor f) const { return (mask_ >> bit(f.position)) & 1u; }
  bool contains_mutation() const { return contains(Factor{0}); }
  bool subset_of(Term other) const { return (mask_ & ~other.mask_) == 0; }
  int min_position() const;
  int max_position() const;

  Term with(Factor f) const { return Term(mask_ | (1u << bit(f.position))); }
  Term without(Factor f) const { return Term(mask_ & ~(1u << bit(f.position))); }

  /// Factors in positional order (L2, L1, M, R1, R2).
  std::vector<Factor> factors() const;

  /// "L1*M*R1"
  std::string to_string() const;

  friend bool operator==(Term, Term) = default;

  static int bit(int position) { return position + Factor::kMaxDistance; }

 private:
  std::uint32_t mask_ = 0;
};

/// A normalized formula: maximal interaction terms only, sorted by leftmost
/// then rightmost factor position.
class TermList {
 public:
  TermList() = default;

  /// Normalizes: removes duplicates and terms contained in another term.
  explicit TermList(std::vector<Term> terms);

  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  /// Largest flank distance referenced by any term.
  int max_distance() const;

  /// "L2*L1 + L1*M + M*R1 + R1*R2"
  std::string to_string() const;

  friend bool operator==(const TermList&, const TermList&) = default;

 private:
  std::vector<Term> terms_;
};

/// Parses `term ('+' term)*` with `term := factor (('*'|'x') factor)*`.
/// Factors are case-insensitive; L and R are accepted as aliases of L1 and R1
/// only when `flanks_per_side == 1`. Throws std::invalid_argument on unknown
/// factors, an empty formula, a formula without M, or flanks beyond the space.
TermList parse_formula(std::string_view s, int flanks_per_side);

/// Names accepted by builtin_formula().
const std::vector<std::string>& builtin_formula_names();

/// Expands one of mono, di, tri, penta, di+mono, tri+mono, di+tri for one or
/// two flanks per side. Throws std::invalid_argument for unknown names and for
/// penta, tri+mono and di+tri with a single flank.
TermList builtin_formula(std::string_view name, int flanks_per_side);

bool is_builtin_formula(std::string_view name);

}  // namespace signet
