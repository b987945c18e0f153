#include "signet/mutation_space.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace signet {

int nucleotide_code(char c) {
  switch (std::toupper(static_cast<unsigned char>(c))) {
    case 'A': return 0;
    case 'C': return 1;
    case 'G': return 2;
    case 'T': return 3;
    default: return -1;
  }
}

char complement(char c) {
  switch (std::toupper(static_cast<unsigned char>(c))) {
    case 'A': return 'T';
    case 'C': return 'G';
    case 'G': return 'C';
    case 'T': return 'A';
    default: throw std::invalid_argument(std::string("not a nucleotide: '") + c + "'");
  }
}

std::string reverse_complement(std::string_view s) {
  std::string out(s.rbegin(), s.rend());
  for (char& c : out) c = complement(c);
  return out;
}

int MutationType::left_flank(int d) const {
  return nucleotide_code(left[left.size() - static_cast<std::size_t>(d)]);
}

int MutationType::right_flank(int d) const {
  return nucleotide_code(right[static_cast<std::size_t>(d) - 1]);
}

std::string MutationType::label() const {
  std::string s = left;
  s += '[';
  s += kBaseMutations[base];
  s += ']';
  s += right;
  return s;
}

namespace {

std::string upper_checked(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (nucleotide_code(c) < 0)
      throw std::invalid_argument("invalid nucleotide in context '" + std::string(s) + "'");
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace

MutationType canonicalize(char ref, char alt, std::string_view left, std::string_view right) {
  if (nucleotide_code(ref) < 0 || nucleotide_code(alt) < 0)
    throw std::invalid_argument("invalid substitution bases");
  ref = static_cast<char>(std::toupper(static_cast<unsigned char>(ref)));
  alt = static_cast<char>(std::toupper(static_cast<unsigned char>(alt)));
  if (ref == alt) throw std::invalid_argument("reference and alternate base are equal");
  if (left.size() != right.size())
    throw std::invalid_argument("left and right contexts differ in length");

  std::string l = upper_checked(left);
  std::string r = upper_checked(right);
  if (ref == 'A' || ref == 'G') {
    ref = complement(ref);
    alt = complement(alt);
    std::string new_left = reverse_complement(r);
    r = reverse_complement(l);
    l = std::move(new_left);
  }
  const std::string sub{ref, '>', alt};
  const auto it = std::find(kBaseMutations.begin(), kBaseMutations.end(), sub);
  return MutationType{static_cast<int>(it - kBaseMutations.begin()), std::move(l), std::move(r)};
}

MutationSpace::MutationSpace(int flanks_per_side) : flanks_(flanks_per_side) {
  if (flanks_per_side < 0 || flanks_per_side > 6)
    throw std::invalid_argument("flanks per side must be in [0, 6]");
  context_size_ = std::size_t{1} << (2 * flanks_per_side);
  size_ = 6 * context_size_ * context_size_;
}

MutationType MutationSpace::type_at(std::size_t index) const {
  if (index >= size_) throw std::out_of_range("mutation type index out of range");
  MutationType t;
  std::size_t right_code = index % context_size_;
  std::size_t left_code = (index / context_size_) % context_size_;
  t.base = static_cast<int>(index / (context_size_ * context_size_));
  t.left.assign(static_cast<std::size_t>(flanks_), 'A');
  t.right.assign(static_cast<std::size_t>(flanks_), 'A');
  for (int i = flanks_ - 1; i >= 0; --i) {
    t.left[static_cast<std::size_t>(i)] = kNucleotides[left_code & 3];
    t.right[static_cast<std::size_t>(i)] = kNucleotides[right_code & 3];
    left_code >>= 2;
    right_code >>= 2;
  }
  return t;
}

std::size_t MutationSpace::index_of(const MutationType& t) const {
  if (t.left.size() != static_cast<std::size_t>(flanks_) ||
      t.right.size() != static_cast<std::size_t>(flanks_))
    throw std::invalid_argument("context length does not match mutation space");
  std::size_t left_code = 0, right_code = 0;
  for (int i = 0; i < flanks_; ++i) {
    const int l = nucleotide_code(t.left[static_cast<std::size_t>(i)]);
    const int r = nucleotide_code(t.right[static_cast<std::size_t>(i)]);
    if (l < 0 || r < 0) throw std::invalid_argument("invalid nucleotide in mutation type");
    left_code = left_code * 4 + static_cast<std::size_t>(l);
    right_code = right_code * 4 + static_cast<std::size_t>(r);
  }
  return (static_cast<std::size_t>(t.base) * context_size_ + left_code) * context_size_ +
         right_code;
}

int MutationSpace::flanks_of_label(std::string_view s) {
  const auto open = s.find('[');
  const auto close = s.find(']');
  if (open == std::string_view::npos || close == std::string_view::npos || close != open + 4 ||
      s[open + 2] != '>')
    throw std::invalid_argument("malformed mutation label '" + std::string(s) + "'");
  const std::size_t right_len = s.size() - close - 1;
  if (open != right_len)
    throw std::invalid_argument("unequal flank lengths in label '" + std::string(s) + "'");
  return static_cast<int>(open);
}

MutationType MutationSpace::parse_label(std::string_view s) const {
  const int n = flanks_of_label(s);
  if (n != flanks_)
    throw std::invalid_argument("label '" + std::string(s) + "' has " + std::to_string(n) +
                                " flanks per side, expected " + std::to_string(flanks_));
  const auto un = static_cast<std::size_t>(n);
  return canonicalize(s[un + 1], s[un + 3], s.substr(0, un), s.substr(un + 5));
}

std::vector<MutationType> MutationSpace::enumerate() const {
  std::vector<MutationType> out;
  out.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) out.push_back(type_at(i));
  return out;
}

std::vector<std::string> MutationSpace::labels() const {
  std::vector<std::string> out;
  out.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) out.push_back(label(i));
  return out;
}

}  // namespace signet
