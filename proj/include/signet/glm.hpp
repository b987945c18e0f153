#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

#include "signet/design.hpp"

namespace signet {

struct GlmOptions {
  int max_iter = 25;
  double tol = 1e-10;  // Newton decrement, and gradient max-norm
  // Saturated (identity) designs have the closed form beta = log y; disable to
  // force the Newton iterations.
  bool exploit_identity = true;
};

struct GlmFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd fitted_mean;  // exp(X beta)
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  int ridge_events = 0;  // Cholesky failures rescued by a diagonal ridge
};

/// Raised when Newton iterations run off to non-finite parameters, which
/// happens under (quasi-)separation.
class GlmDivergence : public std::runtime_error {
 public:
  GlmDivergence(const std::string& what, std::string column)
      : std::runtime_error(what), column_(std::move(column)) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

/// sum_t { y_t (X beta)_t - exp((X beta)_t) }
double poisson_loglik(const DesignMatrix& design, const Eigen::VectorXd& y, const Eigen::VectorXd& beta);

/// X' (y - exp(X beta))
Eigen::VectorXd poisson_score(const DesignMatrix& design, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& beta);

/// Maximizes the log-linear Poisson likelihood by Newton-Raphson, written as
/// iteratively reweighted least squares with weights A = diag(exp(X beta)).
/// Steps that would lower the likelihood are halved. Entries of y may be zero.
///
/// Never throws on slow convergence (the result carries converged = false);
/// throws GlmDivergence when beta becomes non-finite and std::invalid_argument
/// on malformed input (negative y, zero total, length mismatch).
GlmFit fit_poisson_loglinear(const DesignMatrix& design, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& beta_init, const GlmOptions& options = {});

/// fitted_mean / sum(fitted_mean)
Eigen::VectorXd normalize_to_signature(const GlmFit& fit);

}  // namespace signet
