#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "signet/factorizer.hpp"

namespace signet {

/// Independent Poisson draws with means W * H.
Eigen::MatrixXd simulate_counts(const Eigen::MatrixXd& W, const Eigen::MatrixXd& H, std::uint64_t seed);

/// Binomial thinning: each mutation is kept independently with probability p.
Eigen::MatrixXd downsample_counts(const Eigen::MatrixXd& V, double p, std::uint64_t seed);

/// Cosine similarity of two non-negative vectors; NaN if either is zero.
double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Maximum-weight perfect matching on a square score matrix (Hungarian
/// algorithm). Returns assignment[i] = column matched to row i.
std::vector<int> max_weight_assignment(const Eigen::MatrixXd& score);

struct SignatureMatch {
  std::vector<int> permutation;  // permutation[i] = row of H_new matched to row i of H_ref
  Eigen::VectorXd similarity;    // in reference order
  Eigen::MatrixXd cosine;        // K x K, (ref row, new row)
};

/// Pairs the rows of H_new with those of H_ref so that the summed cosine
/// similarity is maximal.
SignatureMatch match_signatures(const Eigen::MatrixXd& H_ref, const Eigen::MatrixXd& H_new);

struct QuantileSummary {
  double min = 0, q25 = 0, median = 0, q75 = 0, max = 0;
  int count = 0;
};

/// Linear-interpolation quantiles of the finite values in `xs`.
QuantileSummary summarize(std::vector<double> xs);

struct BootstrapReplicate {
  int replicate = 0;
  std::optional<std::string> error;
  Eigen::MatrixXd cosine;       // K x K before matching
  Eigen::VectorXd matched;      // K, reference order
  std::vector<int> permutation;
};

struct BootstrapReport {
  int n_replicates = 0;
  std::vector<BootstrapReplicate> replicates;
  std::vector<QuantileSummary> per_signature;  // over successful replicates
};

struct ResampleConfig {
  int n_starts = 20;
  int start_iters = 100;
  double tol = 1e-8;
  int max_iters = 10000;
  std::uint64_t seed = 1;
  int threads = 0;
  GlmOptions glm{};
};

/// Simulates n_reps data sets from W_hat * H_hat, refits each under the same
/// signature models, and matches the refitted signatures to H_hat.
BootstrapReport parametric_bootstrap(const FittedFactorization& fit, const MutationSpace& space, int n_reps,
                                     const ResampleConfig& config);

struct DownsampleEntry {
  double fraction = 0.0;
  int replicate = 0;
  int sample = 0;
  std::optional<double> similarity;  // missing when the sample has no counts left
};

struct DownsampleReport {
  std::vector<double> fractions;
  int n_replicates = 0;
  std::vector<DownsampleEntry> entries;

  /// Median over available similarities at one fraction.
  double median(double fraction) const;
};

/// For each fraction and replicate: thin V, re-estimate exposures with H fixed,
/// and compare each sample's exposure row with the reference exposures.
DownsampleReport exposure_recovery(const Eigen::MatrixXd& V, const Eigen::MatrixXd& W_ref,
                                   const Eigen::MatrixXd& H_fixed, const std::vector<double>& fractions,
                                   int n_reps, std::uint64_t seed, int threads = 0, double tol = 1e-10);

}  // namespace signet
