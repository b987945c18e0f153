#include "signet/formula.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <stdexcept>

namespace signet {

std::string Factor::name() const {
  if (position == 0) return "M";
  return (position < 0 ? "L" : "R") + std::to_string(position < 0 ? -position : position);
}

Term Term::of(std::initializer_list<int> positions) {
  Term t;
  for (int p : positions) t = t.with(Factor{p});
  return t;
}

int Term::size() const { return std::popcount(mask_); }

int Term::min_position() const {
  return std::countr_zero(mask_) - Factor::kMaxDistance;
}

int Term::max_position() const {
  return 31 - std::countl_zero(mask_) - Factor::kMaxDistance;
}

std::vector<Factor> Term::factors() const {
  std::vector<Factor> out;
  for (int p = -Factor::kMaxDistance; p <= Factor::kMaxDistance; ++p)
    if (contains(Factor{p})) out.push_back(Factor{p});
  return out;
}

std::string Term::to_string() const {
  std::string s;
  for (const Factor& f : factors()) {
    if (!s.empty()) s += '*';
    s += f.name();
  }
  return s;
}

TermList::TermList(std::vector<Term> terms) {
  for (Term t : terms) {
    if (t.empty()) throw std::invalid_argument("empty interaction term");
    const bool dominated = std::any_of(terms.begin(), terms.end(), [&](Term o) {
      return o != t && t.subset_of(o);
    });
    if (!dominated && std::find(terms_.begin(), terms_.end(), t) == terms_.end())
      terms_.push_back(t);
  }
  std::sort(terms_.begin(), terms_.end(), [](Term a, Term b) {
    if (a.min_position() != b.min_position()) return a.min_position() < b.min_position();
    if (a.max_position() != b.max_position()) return a.max_position() < b.max_position();
    return a.mask() < b.mask();
  });
}

int TermList::max_distance() const {
  int d = 0;
  for (Term t : terms_) d = std::max({d, -t.min_position(), t.max_position()});
  return d;
}

std::string TermList::to_string() const {
  std::string s;
  for (Term t : terms_) {
    if (!s.empty()) s += " + ";
    s += t.to_string();
  }
  return s;
}

namespace {

Factor parse_factor(std::string_view tok, int flanks, std::string_view formula) {
  std::string u;
  for (char c : tok) u += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  auto fail = [&](const std::string& why) {
    return std::invalid_argument(why + " in formula '" + std::string(formula) + "'");
  };
  if (u == "M") return Factor{0};
  if (u.empty() || (u[0] != 'L' && u[0] != 'R')) throw fail("unknown factor '" + std::string(tok) + "'");
  const int sign = u[0] == 'L' ? -1 : 1;
  int distance = 0;
  if (u.size() == 1) {
    if (flanks != 1)
      throw fail("factor alias '" + std::string(tok) + "' is only valid with one flank per side");
    distance = 1;
  } else if (u.size() == 2 && u[1] >= '1' && u[1] <= '9') {
    distance = u[1] - '0';
  } else {
    throw fail("unknown factor '" + std::string(tok) + "'");
  }
  if (distance > Factor::kMaxDistance) throw fail("unknown factor '" + std::string(tok) + "'");
  if (distance > flanks)
    throw fail("factor " + u + " needs " + std::to_string(distance) + " flanks per side, space has " +
               std::to_string(flanks));
  return Factor{sign * distance};
}

}  // namespace

TermList parse_formula(std::string_view s, int flanks_per_side) {
  std::vector<Term> terms;
  Term current;
  std::string token;
  bool saw_any = false;

  auto flush_factor = [&] {
    if (token.empty()) throw std::invalid_argument("missing factor in formula '" + std::string(s) + "'");
    const Factor f = parse_factor(token, flanks_per_side, s);
    if (current.contains(f))
      throw std::invalid_argument("factor " + f.name() + " repeated within a term in '" +
                                  std::string(s) + "'");
    current = current.with(f);
    token.clear();
  };

  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    saw_any = true;
    if (c == '*' || c == 'x' || c == 'X') {
      flush_factor();
    } else if (c == '+') {
      flush_factor();
      terms.push_back(current);
      current = Term{};
    } else {
      token += c;
    }
  }
  if (!saw_any) throw std::invalid_argument("empty formula");
  flush_factor();
  terms.push_back(current);

  if (std::none_of(terms.begin(), terms.end(), [](Term t) { return t.contains_mutation(); }))
    throw std::invalid_argument("formula '" + std::string(s) + "' does not contain M");
  return TermList(std::move(terms));
}

const std::vector<std::string>& builtin_formula_names() {
  static const std::vector<std::string> names{"mono", "di", "tri", "penta",
                                              "di+mono", "tri+mono", "di+tri"};
  return names;
}

bool is_builtin_formula(std::string_view name) {
  const auto& n = builtin_formula_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

TermList builtin_formula(std::string_view name, int flanks_per_side) {
  if (!is_builtin_formula(name))
    throw std::invalid_argument("unknown builtin formula '" + std::string(name) + "'");
  if (flanks_per_side != 1 && flanks_per_side != 2)
    throw std::invalid_argument("builtin formulas are defined for one or two flanks per side");

  if (flanks_per_side == 1) {
    if (name == "mono") return parse_formula("L1 + M + R1", 1);
    if (name == "di" || name == "di+mono") return parse_formula("L1*M + M*R1", 1);
    if (name == "tri") return parse_formula("L1*M*R1", 1);
    throw std::invalid_argument("builtin formula '" + std::string(name) +
                                "' needs two flanks per side");
  }
  if (name == "mono") return parse_formula("L2 + L1 + M + R1 + R2", 2);
  if (name == "di") return parse_formula("L2*L1 + L1*M + M*R1 + R1*R2", 2);
  if (name == "tri") return parse_formula("L1*M*R1", 2);
  if (name == "penta") return parse_formula("L2*L1*M*R1*R2", 2);
  if (name == "di+mono") return parse_formula("L2 + L1*M + M*R1 + R2", 2);
  if (name == "tri+mono") return parse_formula("L2 + L1*M*R1 + R2", 2);
  return parse_formula("L2*L1 + L1*M*R1 + R1*R2", 2);
}

}  // namespace signet
