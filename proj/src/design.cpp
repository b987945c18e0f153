#include "signet/design.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>

namespace signet {

namespace {

using LevelRow = std::array<int, 2 * Factor::kMaxDistance + 1>;

LevelRow levels_of(const MutationType& t, int flanks) {
  LevelRow row{};
  row[Term::bit(0)] = t.base;
  for (int d = 1; d <= std::min(flanks, Factor::kMaxDistance); ++d) {
    row[Term::bit(-d)] = t.left_flank(d);
    row[Term::bit(d)] = t.right_flank(d);
  }
  return row;
}

std::string level_name(Factor f, int level) {
  if (f.is_mutation()) return std::string(kBaseMutations[level]);
  return std::string(1, kNucleotides[level]);
}

// All non-empty sub-terms of the formula's terms, plus M.
std::set<std::uint32_t> hierarchical_closure(const TermList& terms) {
  std::set<std::uint32_t> closure{Term::of({0}).mask()};
  for (Term t : terms.terms()) {
    const std::uint32_t m = t.mask();
    for (std::uint32_t sub = m; sub != 0; sub = (sub - 1) & m) closure.insert(sub);
  }
  return closure;
}

Term full_term(int flanks) {
  Term t;
  for (int p = -flanks; p <= flanks; ++p) t = t.with(Factor{p});
  return t;
}

void check_rank(const Eigen::MatrixXd& x, const std::string& what) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-9);
  if (qr.rank() != x.cols())
    throw std::logic_error(what + ": design is rank deficient (rank " + std::to_string(qr.rank()) + " of " +
                           std::to_string(x.cols()) + ")");
}

}  // namespace

DesignMatrix build_design(const TermList& terms, const MutationSpace& space) {
  if (terms.size() == 0) throw std::invalid_argument("empty formula");
  if (terms.max_distance() > space.flanks())
    throw std::invalid_argument("formula '" + terms.to_string() + "' needs " +
                                std::to_string(terms.max_distance()) +
                                " flanks per side, mutation space has " +
                                std::to_string(space.flanks()));

  DesignMatrix d;
  d.space_ = space;
  d.terms_ = terms;
  const auto n_types = static_cast<Eigen::Index>(space.size());
  const auto closure = hierarchical_closure(terms);

  if (space.flanks() <= Factor::kMaxDistance && closure.count(full_term(space.flanks()).mask())) {
    d.identity_ = true;
    d.x_ = Eigen::MatrixXd::Identity(n_types, n_types);
    d.labels_ = space.labels();
    d.blocks_.push_back(DesignBlock{full_term(space.flanks()), 0, static_cast<int>(n_types)});
    d.row_columns_.resize(static_cast<std::size_t>(n_types));
    d.intercept_columns_.resize(static_cast<std::size_t>(n_types));
    for (int t = 0; t < n_types; ++t) {
      d.row_columns_[static_cast<std::size_t>(t)] = {t};
      d.intercept_columns_[static_cast<std::size_t>(t)] = t;
    }
    return d;
  }

  // Blocks crossed with M cover the sub-term without M as well, so a non-M
  // sub-term gets its own block only when its M-extension is absent.
  const Term m_only = Term::of({0});
  std::vector<Term> block_terms;
  for (std::uint32_t mask : closure) {
    const Term e(mask);
    if (e.contains_mutation() || !closure.count(e.with(Factor{0}).mask())) block_terms.push_back(e);
  }
  std::sort(block_terms.begin(), block_terms.end(), [&](Term a, Term b) {
    const int ka = a.without(Factor{0}).size(), kb = b.without(Factor{0}).size();
    if (a == m_only || b == m_only) return a == m_only && b != m_only;
    if (ka != kb) return ka < kb;
    if (a.min_position() != b.min_position()) return a.min_position() < b.min_position();
    return a.max_position() < b.max_position();
  });

  std::vector<LevelRow> type_levels;
  type_levels.reserve(static_cast<std::size_t>(n_types));
  for (std::size_t t = 0; t < space.size(); ++t)
    type_levels.push_back(levels_of(space.type_at(t), space.flanks()));

  std::vector<Eigen::VectorXd> columns;
  for (Term e : block_terms) {
    const auto factors = e.factors();
    DesignBlock block{e, static_cast<int>(columns.size()), 0};
    // Odometer over level combinations, first factor slowest. Non-M factors
    // run over levels 1..3 (reference A dropped).
    std::vector<int> level(factors.size());
    for (std::size_t i = 0; i < factors.size(); ++i) level[i] = factors[i].is_mutation() ? 0 : 1;
    for (bool more = true; more;) {
      Eigen::VectorXd col = Eigen::VectorXd::Zero(n_types);
      for (Eigen::Index t = 0; t < n_types; ++t) {
        const auto& lv = type_levels[static_cast<std::size_t>(t)];
        bool hit = true;
        for (std::size_t i = 0; i < factors.size() && hit; ++i)
          hit = lv[Term::bit(factors[i].position)] == level[i];
        if (hit) col[t] = 1.0;
      }
      std::string label;
      for (std::size_t i = 0; i < factors.size(); ++i) {
        if (!label.empty()) label += ':';
        label += factors[i].name() + "[" + level_name(factors[i], level[i]) + "]";
      }
      columns.push_back(std::move(col));
      d.labels_.push_back(std::move(label));
      if (e == m_only) d.intercept_columns_.push_back(static_cast<int>(columns.size()) - 1);
      ++block.n_columns;

      more = false;
      for (std::size_t i = factors.size(); i-- > 0;) {
        if (++level[i] < factors[i].levels()) {
          more = true;
          break;
        }
        level[i] = factors[i].is_mutation() ? 0 : 1;
      }
    }
    d.blocks_.push_back(block);
  }

  d.x_.resize(n_types, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) d.x_.col(static_cast<Eigen::Index>(j)) = columns[j];

  d.row_columns_.resize(static_cast<std::size_t>(n_types));
  for (Eigen::Index t = 0; t < n_types; ++t)
    for (Eigen::Index j = 0; j < d.x_.cols(); ++j)
      if (d.x_(t, j) != 0.0) d.row_columns_[static_cast<std::size_t>(t)].push_back(static_cast<int>(j));

  check_rank(d.x_, terms.to_string());
  return d;
}

DesignMatrix DesignMatrix::from_matrix(const Eigen::MatrixXd& x, std::vector<std::string> labels,
                                       std::vector<int> intercept) {
  if (x.rows() == 0 || x.cols() == 0) throw std::invalid_argument("empty design matrix");
  if (!((x.array() == 0.0) || (x.array() == 1.0)).all())
    throw std::invalid_argument("design matrix entries must be 0 or 1");
  if (labels.empty())
    for (Eigen::Index j = 0; j < x.cols(); ++j) labels.push_back("x" + std::to_string(j + 1));
  if (labels.size() != static_cast<std::size_t>(x.cols()))
    throw std::invalid_argument("one label per design column required");
  Eigen::VectorXd ones = Eigen::VectorXd::Zero(x.rows());
  for (int j : intercept) {
    if (j < 0 || j >= x.cols()) throw std::invalid_argument("intercept column out of range");
    ones += x.col(j);
  }
  if (!intercept.empty() && !(ones.array() == 1.0).all())
    throw std::invalid_argument("intercept columns must sum to the all-ones vector");

  DesignMatrix d;
  d.x_ = x;
  d.labels_ = std::move(labels);
  d.intercept_columns_ = std::move(intercept);
  d.row_columns_.resize(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index t = 0; t < x.rows(); ++t)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      if (x(t, j) != 0.0) d.row_columns_[static_cast<std::size_t>(t)].push_back(static_cast<int>(j));
  check_rank(d.x_, "custom design");
  return d;
}

Eigen::VectorXd DesignMatrix::linear_predictor(const Eigen::VectorXd& beta) const {
  if (identity_) return beta;
  Eigen::VectorXd eta(x_.rows());
  for (std::size_t t = 0; t < row_columns_.size(); ++t) {
    double s = 0.0;
    for (int j : row_columns_[t]) s += beta[j];
    eta[static_cast<Eigen::Index>(t)] = s;
  }
  return eta;
}

void DesignMatrix::write_csv(std::ostream& os) const {
  os << "type";
  for (const auto& l : labels_) os << ',' << l;
  os << '\n';
  for (Eigen::Index t = 0; t < x_.rows(); ++t) {
    if (static_cast<std::size_t>(x_.rows()) == space_.size())
      os << space_.label(static_cast<std::size_t>(t));
    else
      os << 't' << t + 1;
    for (Eigen::Index j = 0; j < x_.cols(); ++j) os << ',' << (x_(t, j) != 0.0 ? '1' : '0');
    os << '\n';
  }
}

Eigen::VectorXd softmax(const Eigen::VectorXd& eta) {
  const double mx = eta.maxCoeff();
  Eigen::VectorXd h = (eta.array() - mx).exp();
  return h / h.sum();
}

Eigen::VectorXd signature_from_beta(const DesignMatrix& design, const Eigen::VectorXd& beta) {
  if (beta.size() != design.n_params())
    throw std::invalid_argument("parameter vector length does not match design");
  return softmax(design.linear_predictor(beta));
}

}  // namespace signet
