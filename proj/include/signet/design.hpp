#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "signet/formula.hpp"
#include "signet/mutation_space.hpp"

namespace signet {

/// A block of indicator columns for one interaction of factors. M always
/// enters with all 6 levels; every other factor drops its reference level A.
struct DesignBlock {
  Term factors;
  int first_column = 0;
  int n_columns = 0;
};

/// Binary T x S design matrix of a log-linear signature parametrization.
///
/// Columns form a corner-point basis of the hierarchical log-linear model
/// generated by the formula's terms together with M. The M main-effect block
/// is always present and its columns sum to the all-ones vector, so it absorbs
/// the softmax intercept. A formula that saturates the space (every factor in
/// one term) is emitted as the T x T identity.
class DesignMatrix {
 public:
  const MutationSpace& space() const { return space_; }
  const TermList& terms() const { return terms_; }
  const Eigen::MatrixXd& matrix() const { return x_; }
  const std::vector<std::string>& column_labels() const { return labels_; }
  const std::vector<DesignBlock>& blocks() const { return blocks_; }

  /// Non-zero column indices of each row.
  const std::vector<std::vector<int>>& row_columns() const { return row_columns_; }

  /// Columns whose sum is the all-ones vector.
  const std::vector<int>& intercept_columns() const { return intercept_columns_; }

  std::size_t n_types() const { return static_cast<std::size_t>(x_.rows()); }
  int n_params() const { return static_cast<int>(x_.cols()); }
  bool is_identity() const { return identity_; }

  /// Linear predictor X * beta using the sparse row structure.
  Eigen::VectorXd linear_predictor(const Eigen::VectorXd& beta) const;

  /// A design over an arbitrary set of T outcomes, for models outside the
  /// mutation-type lattice. `x` must be binary with full column rank;
  /// `intercept` lists columns summing to the all-ones vector (may be empty).
  static DesignMatrix from_matrix(const Eigen::MatrixXd& x, std::vector<std::string> labels = {},
                                  std::vector<int> intercept = {});

  /// Writes the matrix as CSV with a header of column labels and one row per
  /// mutation type, led by its label.
  void write_csv(std::ostream& os) const;

 private:
  friend DesignMatrix build_design(const TermList& terms, const MutationSpace& space);

  MutationSpace space_;
  TermList terms_;
  Eigen::MatrixXd x_;
  std::vector<std::string> labels_;
  std::vector<DesignBlock> blocks_;
  std::vector<std::vector<int>> row_columns_;
  std::vector<int> intercept_columns_;
  bool identity_ = false;
};

/// Builds the design for `terms` over `space`. Throws std::invalid_argument if
/// the formula needs more flanks than the space has, and std::logic_error if
/// the resulting matrix is not of full column rank.
DesignMatrix build_design(const TermList& terms, const MutationSpace& space);

/// Softmax of X * beta, evaluated with max subtraction.
Eigen::VectorXd signature_from_beta(const DesignMatrix& design, const Eigen::VectorXd& beta);

/// Numerically stable softmax of a linear predictor.
Eigen::VectorXd softmax(const Eigen::VectorXd& eta);

}  // namespace signet
