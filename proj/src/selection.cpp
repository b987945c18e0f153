#include "signet/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace signet {

ModelSpec::ModelSpec(std::vector<std::string> parts) : parts_(std::move(parts)) {
  std::sort(parts_.begin(), parts_.end());
}

std::string ModelSpec::label() const {
  std::string s;
  for (const auto& p : parts_) {
    if (!s.empty()) s += ';';
    s += p;
  }
  return s;
}

std::vector<SignatureModel> ModelSpec::models(const MutationSpace& space) const {
  std::vector<SignatureModel> out;
  for (const auto& p : parts_) {
    // Repeated parts share one design.
    if (!out.empty() && out.back().name == p)
      out.push_back(out.back());
    else
      out.push_back(SignatureModel::parse(p, space));
  }
  return out;
}

std::vector<ModelSpec> enumerate_mixtures(const std::vector<std::string>& options, int k) {
  std::vector<std::string> opts;
  for (const auto& o : options)
    if (std::find(opts.begin(), opts.end(), o) == opts.end()) opts.push_back(o);
  std::vector<ModelSpec> out;
  if (opts.empty() || k < 1) return out;

  // Non-decreasing index sequences of length k.
  std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
  while (true) {
    std::vector<std::string> parts;
    for (auto i : idx) parts.push_back(opts[i]);
    out.emplace_back(std::move(parts));
    std::size_t pos = idx.size();
    while (pos > 0 && idx[pos - 1] == opts.size() - 1) --pos;
    if (pos == 0) break;
    const std::size_t v = idx[pos - 1] + 1;
    for (std::size_t j = pos - 1; j < idx.size(); ++j) idx[j] = v;
  }
  return out;
}

double bic(int n_prm, long long n_obs, double gkl) {
  if (n_obs < 1) throw std::invalid_argument("BIC needs at least one observation");
  return static_cast<double>(n_prm) * std::log(static_cast<double>(n_obs)) + 2.0 * gkl;
}

long long count_observations(const CountMatrix& V, ObservationCount convention) {
  if (convention == ObservationCount::dense) return static_cast<long long>(V.counts.size());
  return static_cast<long long>((V.counts.array() != 0.0).count());
}

SelectionReport run_selection(const CountMatrix& V, const std::vector<ModelSpec>& specs,
                              const FitConfig& base, ObservationCount convention, bool keep_fits) {
  if (specs.empty()) throw std::invalid_argument("no model specifications to select from");
  SelectionReport report;
  report.n_obs = count_observations(V, convention);

  for (const auto& spec : specs) {
    SelectionRow row;
    row.spec = spec;
    try {
      FitConfig cfg = base;
      cfg.k = spec.k();
      cfg.models = spec.models(V.space);
      for (const auto& m : cfg.models) row.n_prm += m.n_params(V.space);
      FittedFactorization f = fit(V, cfg);
      row.gkl = f.gkl;
      row.loglik = f.loglik;
      row.converged = f.converged;
      row.penalty = static_cast<double>(row.n_prm) * std::log(static_cast<double>(report.n_obs));
      row.bic = bic(row.n_prm, report.n_obs, row.gkl);
      if (keep_fits) row.fit = std::move(f);
    } catch (const std::exception& e) {
      row.error = e.what();
      row.bic = std::numeric_limits<double>::quiet_NaN();
    }
    report.rows.push_back(std::move(row));
  }

  std::stable_sort(report.rows.begin(), report.rows.end(), [](const SelectionRow& a, const SelectionRow& b) {
    if (a.n_prm != b.n_prm) return a.n_prm < b.n_prm;
    return a.gkl < b.gkl;
  });

  double best_bic = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    if (!r.error && r.bic < best_bic) {
      best_bic = r.bic;
      report.best = static_cast<int>(i);
    }
  }
  for (auto& r : report.rows)
    r.delta_bic = r.error ? std::numeric_limits<double>::quiet_NaN() : r.bic - best_bic;
  return report;
}

}  // namespace signet
