#include "signet/glm.hpp"

#include <cmath>
#include <limits>

namespace signet {

namespace {

// exp() of this is the smallest normal double; stands in for log(0) so that
// saturated fits keep finite parameters.
const double kLogFloor = std::log(std::numeric_limits<double>::min());

double loglik_from_eta(const Eigen::VectorXd& y, const Eigen::VectorXd& eta, Eigen::VectorXd& mu) {
  mu = eta.array().exp();
  return (y.array() * eta.array()).sum() - mu.sum();
}

Eigen::MatrixXd weighted_gram(const DesignMatrix& design, const Eigen::VectorXd& w) {
  const int s = design.n_params();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(s, s);
  const auto& rows = design.row_columns();
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const double wt = w[static_cast<Eigen::Index>(t)];
    for (int a : rows[t])
      for (int b : rows[t])
        if (b <= a) g(a, b) += wt;
  }
  return g.selfadjointView<Eigen::Lower>();
}

Eigen::VectorXd transpose_times(const DesignMatrix& design, const Eigen::VectorXd& r) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(design.n_params());
  const auto& rows = design.row_columns();
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (int j : rows[t]) out[j] += r[static_cast<Eigen::Index>(t)];
  return out;
}

GlmFit saturated_fit(const Eigen::VectorXd& y) {
  GlmFit fit;
  fit.beta.resize(y.size());
  for (Eigen::Index t = 0; t < y.size(); ++t) fit.beta[t] = y[t] > 0 ? std::log(y[t]) : kLogFloor;
  fit.fitted_mean = y;
  fit.log_likelihood = 0.0;
  for (Eigen::Index t = 0; t < y.size(); ++t)
    if (y[t] > 0) fit.log_likelihood += y[t] * fit.beta[t];
  fit.log_likelihood -= y.sum();
  fit.iterations = 0;
  fit.converged = true;
  return fit;
}

}  // namespace

double poisson_loglik(const DesignMatrix& design, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  Eigen::VectorXd mu;
  return loglik_from_eta(y, design.linear_predictor(beta), mu);
}

Eigen::VectorXd poisson_score(const DesignMatrix& design, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& beta) {
  const Eigen::VectorXd mu = design.linear_predictor(beta).array().exp();
  return transpose_times(design, y - mu);
}

GlmFit fit_poisson_loglinear(const DesignMatrix& design, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& beta_init, const GlmOptions& options) {
  if (y.size() != static_cast<Eigen::Index>(design.n_types()))
    throw std::invalid_argument("response length does not match design rows");
  if (beta_init.size() != design.n_params())
    throw std::invalid_argument("initial parameter vector does not match design columns");
  if ((y.array() < 0).any() || !y.allFinite())
    throw std::invalid_argument("Poisson response must be finite and non-negative");
  const double total = y.sum();
  if (!(total > 0)) throw std::invalid_argument("Poisson response sums to zero");

  if (design.is_identity() && options.exploit_identity) return saturated_fit(y);

  GlmFit fit;
  fit.beta = beta_init;
  Eigen::VectorXd eta = design.linear_predictor(fit.beta);

  // The intercept columns sum to one in every row, so a common shift of them
  // rescales all means; match the response total before iterating.
  if (!design.intercept_columns().empty()) {
    const double mx = eta.maxCoeff();
    const double shift = std::log(total) - (mx + std::log((eta.array() - mx).exp().sum()));
    if (std::isfinite(shift)) {
      for (int j : design.intercept_columns()) fit.beta[j] += shift;
      eta.array() += shift;
    }
  }

  Eigen::VectorXd mu;
  double ll = loglik_from_eta(y, eta, mu);
  const double scale_floor = 1.0;

  for (int it = 0; it < options.max_iter; ++it) {
    const Eigen::VectorXd score = transpose_times(design, y - mu);
    if (score.lpNorm<Eigen::Infinity>() < options.tol) {
      fit.converged = true;
      break;
    }

    Eigen::MatrixXd info = weighted_gram(design, mu);
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success) {
      ++fit.ridge_events;
      double ridge = 1e-10;
      do {
        info.diagonal().array() += ridge;
        llt.compute(info);
        ridge *= 100.0;
      } while (llt.info() != Eigen::Success && ridge < 1e10);
    }
    const Eigen::VectorXd delta = llt.solve(score);
    const double decrement = score.dot(delta);
    // Newton decrement: the squared step length in standard-error units. Once
    // it is below tolerance the step lands within rounding of the optimum.
    const bool last = decrement < options.tol;

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd beta_new, eta_new, mu_new;
    double ll_new = ll;
    for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
      beta_new = fit.beta + step * delta;
      eta_new = design.linear_predictor(beta_new);
      ll_new = loglik_from_eta(y, eta_new, mu_new);
      // The last step's gain is below the rounding of ll, so it is not compared.
      if (std::isfinite(ll_new) && (ll_new >= ll || last)) {
        accepted = true;
        break;
      }
    }
    if (!beta_new.allFinite()) {
      Eigen::Index worst = 0;
      for (Eigen::Index j = 0; j < beta_new.size(); ++j)
        if (!std::isfinite(beta_new[j])) worst = j;
      const auto& label = design.column_labels()[static_cast<std::size_t>(worst)];
      throw GlmDivergence("Poisson regression diverged (separation at " + label + ")", label);
    }
    if (!accepted) {
      // No ascent direction survives rounding: we are at the optimum to
      // machine precision if the Newton decrement is negligible.
      fit.converged = decrement <= 1e-8 * std::max(scale_floor, std::abs(ll));
      break;
    }

    fit.beta = std::move(beta_new);
    eta = std::move(eta_new);
    mu = std::move(mu_new);
    ll = ll_new;
    ++fit.iterations;
    if (last) {
      fit.converged = true;
      break;
    }
  }

  fit.fitted_mean = mu;
  fit.log_likelihood = ll;
  return fit;
}

Eigen::VectorXd normalize_to_signature(const GlmFit& fit) {
  return fit.fitted_mean / fit.fitted_mean.sum();
}

}  // namespace signet
