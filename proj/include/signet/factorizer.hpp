#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "signet/design.hpp"
#include "signet/glm.hpp"
#include "signet/mutation_space.hpp"

namespace signet {

/// Mutation counts, one row per sample and one column per mutation type in the
/// space's canonical order. Entries are non-negative integers stored as double.
struct CountMatrix {
  Eigen::MatrixXd counts;
  std::vector<std::string> sample_ids;
  MutationSpace space{1};

  Eigen::Index n_samples() const { return counts.rows(); }
  Eigen::Index n_types() const { return counts.cols(); }
  double total() const { return counts.sum(); }

  /// Throws std::invalid_argument if shapes disagree or an entry is negative
  /// or non-integer.
  void validate() const;
};

/// Raised when the EM cannot proceed: a cell with positive count has a
/// vanishing fitted mean, or the input violates a precondition.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parametrization of one signature: either unconstrained (any probability
/// vector) or log-linear with a design matrix.
struct SignatureModel {
  std::string name;
  std::shared_ptr<const DesignMatrix> design;  // null when unconstrained

  bool parametric() const { return design != nullptr; }

  /// Free signature parameters: the design's column count, or T - 1.
  int n_params(const MutationSpace& space) const;

  static SignatureModel unconstrained();

  /// Accepts "unconstrained" (or "nmf"), a builtin name, or a raw formula.
  static SignatureModel parse(std::string_view spec, const MutationSpace& space);
};

struct FitConfig {
  int k = 1;
  std::vector<SignatureModel> models;  // one per signature
  int n_starts = 100;
  int start_iters = 100;
  double tol = 1e-8;  // relative data log-likelihood change
  int max_iters = 10000;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: see resolve_threads()
  GlmOptions glm{};
  bool record_trace = false;  // keep the log-likelihood of every iterate of the final run

  /// Same model for all k signatures.
  static FitConfig uniform(int k, const SignatureModel& model);
};

struct StartSummary {
  int index = 0;
  double loglik = 0.0;
  bool failed = false;
};

struct FittedFactorization {
  Eigen::MatrixXd W;  // N x K exposures
  Eigen::MatrixXd H;  // K x T signatures, rows sum to one
  std::vector<SignatureModel> models;
  std::vector<std::optional<Eigen::VectorXd>> betas;
  double loglik = 0.0;
  double gkl = 0.0;
  int iterations = 0;
  bool converged = false;
  int n_params = 0;            // N*K + signature_params
  int signature_params = 0;    // sum of per-signature parameter counts
  int best_start = -1;
  std::vector<StartSummary> starts;
  std::vector<double> trace;   // filled when FitConfig::record_trace
  int glm_nonconverged = 0;    // inner regressions that hit their iteration cap
  int ridge_events = 0;
};

struct LoglikGkl {
  double loglik = 0.0;
  double gkl = 0.0;
};

/// Data log-likelihood sum{V log(WH) - WH} and the generalized KL divergence
/// sum{V log V - V log(WH) - V + WH}, with 0 log 0 = 0. Throws FitError when a
/// positive count meets a zero fitted mean.
LoglikGkl loglik_and_gkl(const Eigen::MatrixXd& V, const Eigen::MatrixXd& WH);
LoglikGkl loglik_and_gkl(const Eigen::MatrixXd& V, const Eigen::MatrixXd& W, const Eigen::MatrixXd& H);

/// y_t = sum_n V_nt W_nk H_kt / (WH)_nt
Eigen::VectorXd estep_expected_counts(const Eigen::MatrixXd& V, const Eigen::MatrixXd& W,
                                      const Eigen::MatrixXd& H, int k);

/// Multinomial M-step for an unconstrained signature: the expected counts normalized.
Eigen::VectorXd update_signature_unconstrained(const Eigen::MatrixXd& V, const Eigen::MatrixXd& W,
                                               const Eigen::MatrixXd& H, int k);

struct ParametricUpdate {
  Eigen::VectorXd beta;
  Eigen::VectorXd h;
  GlmFit glm;
};

/// M-step for a log-linear signature through the Poisson trick, warm-started at `beta`.
ParametricUpdate update_signature_parametric(const DesignMatrix& design, const Eigen::VectorXd& beta,
                                             const Eigen::MatrixXd& V, const Eigen::MatrixXd& W,
                                             const Eigen::MatrixXd& H, int k,
                                             const GlmOptions& glm = {});

/// W <- W * ((V / WH) H'), entrywise product.
Eigen::MatrixXd update_exposures(const Eigen::MatrixXd& V, const Eigen::MatrixXd& W,
                                 const Eigen::MatrixXd& H);

/// Current EM iterate.
struct EmState {
  Eigen::MatrixXd W;
  Eigen::MatrixXd H;
  std::vector<Eigen::VectorXd> betas;  // empty vector for unconstrained signatures
};

struct EmStepInfo {
  double loglik_before = 0.0;
  int glm_nonconverged = 0;
  int ridge_events = 0;
};

/// One full EM iteration: all signatures and the exposures are updated from
/// the same E-step. Returns the data log-likelihood of the state it started from.
EmStepInfo em_iteration(const Eigen::MatrixXd& V, const std::vector<SignatureModel>& models,
                        EmState& state, const GlmOptions& glm = {});

/// Random start for `models`: uniform(0,1) exposures and signatures, with
/// parametric signatures projected onto their model by one regression.
EmState random_start(const Eigen::MatrixXd& V, const std::vector<SignatureModel>& models,
                     std::uint64_t seed, std::uint64_t stream, const GlmOptions& glm = {});

/// Multi-start EM: n_starts short runs, the best continued to convergence.
/// Output signatures are sorted by decreasing total exposure.
FittedFactorization fit(const CountMatrix& V, const FitConfig& config);

struct ExposureFit {
  Eigen::MatrixXd W;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

/// Exposure-only EM with H held fixed, started from W_nk = rowsum_n / K.
/// Stops when no exposure moves by more than tol times its sample's total.
ExposureFit fit_exposures(const Eigen::MatrixXd& V, const Eigen::MatrixXd& H, double tol = 1e-10,
                          int max_iters = 100000, bool record_trace = false);

}  // namespace signet
