#pragma once

#include <iosfwd>
#include "json.hpp"
#include <string>
#include <vector>

#include "signet/factorizer.hpp"
#include "signet/selection.hpp"
#include "signet/stability.hpp"

namespace signet {

struct LoadOptions {
  bool lenient = false;  // zero-fill mutation types absent from the header
};

/// Reads a CSV or TSV count table: a header row of mutation-type labels after
/// a leading id column, then one row per sample. Columns are reordered into
/// canonical order and the flank count is taken from the label width.
/// Throws std::invalid_argument with the offending line on any format error.
CountMatrix load_counts(const std::string& path, const LoadOptions& options = {});
CountMatrix read_counts(std::istream& in, const LoadOptions& options = {});

/// Comma-separated, canonical column order, integer counts.
void write_counts(const CountMatrix& V, std::ostream& out);
void save_counts(const CountMatrix& V, const std::string& path);

/// "%.{significant}g", with NaN written as NA. Used by the CSV writers.
std::string format_fixed(double x, int significant = 6);

nlohmann::json fit_to_json(const FittedFactorization& fit, const CountMatrix& V, const FitConfig& config);

/// The parts of a serialized fit needed to resample from it.
struct StoredFit {
  FittedFactorization fit;
  MutationSpace space{1};
  std::vector<std::string> sample_ids;
};

/// Rebuilds W, H and the signature models of a document written by fit_to_json.
StoredFit fit_from_json(const nlohmann::json& doc);
StoredFit load_fit(const std::string& path);

void write_selection_csv(const SelectionReport& report, std::ostream& out);
nlohmann::json selection_to_json(const SelectionReport& report);

/// Long format: replicate, signature, similarity.
void write_bootstrap_csv(const BootstrapReport& report, std::ostream& out);
nlohmann::json bootstrap_to_json(const BootstrapReport& report);

/// Long format: fraction, replicate, sample, similarity (empty when missing).
void write_downsample_csv(const DownsampleReport& report, const std::vector<std::string>& sample_ids,
                          std::ostream& out);

}  // namespace signet
