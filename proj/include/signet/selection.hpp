#pragma once

#include <optional>
#include <string>
#include <vector>

#include "signet/factorizer.hpp"

namespace signet {

/// A multiset of signature parametrizations (builtin names, formulas or
/// "unconstrained"). Stored sorted, so equality ignores order.
class ModelSpec {
 public:
  ModelSpec() = default;
  explicit ModelSpec(std::vector<std::string> parts);

  const std::vector<std::string>& parts() const { return parts_; }
  int k() const { return static_cast<int>(parts_.size()); }

  /// "mono;di;di;tri"
  std::string label() const;

  std::vector<SignatureModel> models(const MutationSpace& space) const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;

 private:
  std::vector<std::string> parts_;
};

/// All multisets of size k drawn from `options` (C(P+k-1, k) of them), in
/// lexicographic order of option indices. Duplicate options are collapsed.
std::vector<ModelSpec> enumerate_mixtures(const std::vector<std::string>& options, int k);

/// n_prm log(n_obs) + 2 GKL
double bic(int n_prm, long long n_obs, double gkl);

enum class ObservationCount { nonzero, dense };

long long count_observations(const CountMatrix& V, ObservationCount convention = ObservationCount::nonzero);

struct SelectionRow {
  ModelSpec spec;
  int n_prm = 0;  // signature parameters only
  double penalty = 0.0;
  double gkl = 0.0;
  double loglik = 0.0;
  double bic = 0.0;
  double delta_bic = 0.0;
  bool converged = false;
  std::optional<std::string> error;  // set when the fit failed
  std::optional<FittedFactorization> fit;
};

struct SelectionReport {
  long long n_obs = 0;
  std::vector<SelectionRow> rows;  // sorted by n_prm, then gkl
  int best = -1;                   // index into rows of the minimum BIC

  const SelectionRow* best_row() const { return best < 0 ? nullptr : &rows[static_cast<std::size_t>(best)]; }
};

/// Fits every spec with the same multi-start settings and seed and ranks them
/// by BIC. `base` supplies everything in FitConfig except k and the models.
/// Failed fits are recorded in their row and do not stop the run.
SelectionReport run_selection(const CountMatrix& V, const std::vector<ModelSpec>& specs,
                              const FitConfig& base, ObservationCount convention = ObservationCount::nonzero,
                              bool keep_fits = false);

}  // namespace signet
