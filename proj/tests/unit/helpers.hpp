#pragma once

#include <Eigen/Dense>
#include <random>

#include "signet/factorizer.hpp"

namespace testutil {

inline Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                                      double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

inline Eigen::MatrixXd row_stochastic(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  Eigen::MatrixXd m = uniform_matrix(rows, cols, rng, 0.05, 1.0);
  for (Eigen::Index i = 0; i < rows; ++i) m.row(i) /= m.row(i).sum();
  return m;
}

// Poisson counts with means W H, rows kept non-empty.
inline Eigen::MatrixXd poisson_counts(const Eigen::MatrixXd& mean, std::mt19937_64& rng) {
  Eigen::MatrixXd v(mean.rows(), mean.cols());
  for (Eigen::Index i = 0; i < mean.rows(); ++i) {
    for (Eigen::Index j = 0; j < mean.cols(); ++j) {
      std::poisson_distribution<int> p(mean(i, j));
      v(i, j) = p(rng);
    }
    if (v.row(i).sum() == 0) v(i, 0) = 1;
  }
  return v;
}

inline double max_rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double worst = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double scale = std::max({1e-300, std::abs(a.data()[i]), std::abs(b.data()[i])});
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]) / scale);
  }
  return worst;
}

}  // namespace testutil
