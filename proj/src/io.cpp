#include "signet/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace signet {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  s = s.substr(first, last - first + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(line);
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

[[noreturn]] void fail(int line_no, const std::string& msg) {
  throw std::invalid_argument("line " + std::to_string(line_no) + ": " + msg);
}

double parse_count(const std::string& field, int line_no) {
  if (field.empty()) fail(line_no, "empty count");
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(field, &used);
  } catch (const std::exception&) {
    fail(line_no, "not a number: '" + field + "'");
  }
  if (used != field.size()) fail(line_no, "not a number: '" + field + "'");
  if (!std::isfinite(x) || x < 0) fail(line_no, "negative or non-finite count: '" + field + "'");
  if (x != std::floor(x)) fail(line_no, "non-integer count: '" + field + "'");
  return x;
}

nlohmann::json to_json(const Eigen::VectorXd& v) {
  auto a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from(const nlohmann::json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

// NaN is not representable in JSON; nlohmann writes it as null.
nlohmann::json number_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); }

}  // namespace

CountMatrix read_counts(std::istream& in, const LoadOptions& options) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw std::invalid_argument("count table is empty");
  const char sep = line.find('\t') != std::string::npos ? '\t' : ',';
  const auto header = split(line, sep);
  if (header.size() < 2) fail(line_no, "header needs an id column and at least one mutation type");

  const int flanks = MutationSpace::flanks_of_label(header[1]);
  CountMatrix V;
  V.space = MutationSpace(flanks);
  const std::size_t T = V.space.size();

  std::vector<std::size_t> column_of(header.size() - 1);
  std::vector<int> seen(T, -1);
  for (std::size_t j = 1; j < header.size(); ++j) {
    std::size_t idx = 0;
    try {
      idx = V.space.parse_index(header[j]);
    } catch (const std::exception& e) {
      fail(line_no, "unknown mutation type '" + header[j] + "': " + e.what());
    }
    if (seen[idx] >= 0)
      fail(line_no, "duplicate mutation type '" + header[j] + "' (same as '" +
                        header[static_cast<std::size_t>(seen[idx])] + "')");
    seen[idx] = static_cast<int>(j);
    column_of[j - 1] = idx;
  }
  if (!options.lenient) {
    for (std::size_t t = 0; t < T; ++t)
      if (seen[t] < 0)
        throw std::invalid_argument("mutation type " + V.space.label(t) + " missing from header (" +
                                    std::to_string(header.size() - 1) + " of " + std::to_string(T) +
                                    " present)");
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, sep);
    if (fields.size() != header.size())
      fail(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                        std::to_string(fields.size()));
    std::vector<double> row(T, 0.0);
    for (std::size_t j = 1; j < fields.size(); ++j) row[column_of[j - 1]] = parse_count(fields[j], line_no);
    V.sample_ids.push_back(fields[0]);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("count table has no samples");

  V.counts.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(T));
  for (std::size_t n = 0; n < rows.size(); ++n)
    for (std::size_t t = 0; t < T; ++t)
      V.counts(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t)) = rows[n][t];
  return V;
}

CountMatrix load_counts(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  try {
    return read_counts(in, options);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void write_counts(const CountMatrix& V, std::ostream& out) {
  V.validate();
  out << "sample";
  for (const auto& l : V.space.labels()) out << ',' << l;
  out << '\n';
  for (Eigen::Index n = 0; n < V.n_samples(); ++n) {
    const auto i = static_cast<std::size_t>(n);
    out << (i < V.sample_ids.size() ? V.sample_ids[i] : "S" + std::to_string(n + 1));
    for (Eigen::Index t = 0; t < V.n_types(); ++t) out << ',' << static_cast<long long>(V.counts(n, t));
    out << '\n';
  }
}

void save_counts(const CountMatrix& V, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_counts(V, out);
}

std::string format_fixed(double x, int significant) {
  if (std::isnan(x)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", significant, x);
  return buf;
}

nlohmann::json fit_to_json(const FittedFactorization& fit, const CountMatrix& V, const FitConfig& config) {
  nlohmann::json doc;
  doc["format"] = "signet-fit";
  doc["flanks"] = V.space.flanks();

  nlohmann::json cfg;
  cfg["k"] = config.k;
  cfg["n_starts"] = config.n_starts;
  cfg["start_iters"] = config.start_iters;
  cfg["tol"] = config.tol;
  cfg["max_iters"] = config.max_iters;
  cfg["seed"] = config.seed;
  cfg["glm"] = {{"max_iter", config.glm.max_iter}, {"tol", config.glm.tol}};
  doc["config"] = cfg;

  doc["samples"] = V.sample_ids;
  doc["types"] = V.space.labels();

  auto sigs = nlohmann::json::array();
  for (Eigen::Index k = 0; k < fit.H.rows(); ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const SignatureModel& m = fit.models[ks];
    nlohmann::json s;
    s["model"] = m.name;
    s["n_params"] = m.n_params(V.space);
    s["probabilities"] = to_json(fit.H.row(k).transpose());
    if (m.parametric()) {
      s["formula"] = m.design->terms().to_string();
      s["beta_labels"] = m.design->column_labels();
      s["beta"] = ks < fit.betas.size() && fit.betas[ks] ? to_json(*fit.betas[ks]) : nlohmann::json();
    }
    sigs.push_back(std::move(s));
  }
  doc["signatures"] = std::move(sigs);

  auto exposures = nlohmann::json::array();
  for (Eigen::Index n = 0; n < fit.W.rows(); ++n) exposures.push_back(to_json(fit.W.row(n).transpose()));
  doc["exposures"] = std::move(exposures);

  doc["loglik"] = fit.loglik;
  doc["gkl"] = fit.gkl;
  doc["iterations"] = fit.iterations;
  doc["converged"] = fit.converged;
  doc["n_params"] = fit.n_params;
  doc["signature_params"] = fit.signature_params;
  doc["best_start"] = fit.best_start;
  doc["glm_nonconverged"] = fit.glm_nonconverged;
  doc["ridge_events"] = fit.ridge_events;
  auto starts = nlohmann::json::array();
  for (const auto& s : fit.starts)
    starts.push_back({{"index", s.index}, {"loglik", number_or_null(s.loglik)}, {"failed", s.failed}});
  doc["starts"] = std::move(starts);
  if (!fit.trace.empty()) doc["trace"] = fit.trace;
  return doc;
}

StoredFit fit_from_json(const nlohmann::json& doc) {
  if (doc.value("format", "") != "signet-fit") throw std::invalid_argument("not a signet fit document");
  StoredFit out;
  out.space = MutationSpace(doc.at("flanks").get<int>());
  out.sample_ids = doc.at("samples").get<std::vector<std::string>>();
  if (doc.at("types").get<std::vector<std::string>>() != out.space.labels())
    throw std::invalid_argument("fit document lists mutation types out of canonical order");

  FittedFactorization& f = out.fit;
  const auto& sigs = doc.at("signatures");
  const auto K = static_cast<Eigen::Index>(sigs.size());
  const auto T = static_cast<Eigen::Index>(out.space.size());
  f.H.resize(K, T);
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto& s = sigs[static_cast<std::size_t>(k)];
    const Eigen::VectorXd h = vector_from(s.at("probabilities"));
    if (h.size() != T) throw std::invalid_argument("signature length does not match the mutation space");
    f.H.row(k) = h.transpose();
    f.models.push_back(SignatureModel::parse(s.at("model").get<std::string>(), out.space));
    if (s.contains("beta") && !s["beta"].is_null())
      f.betas.emplace_back(vector_from(s["beta"]));
    else
      f.betas.emplace_back(std::nullopt);
  }
  const auto& exposures = doc.at("exposures");
  f.W.resize(static_cast<Eigen::Index>(exposures.size()), K);
  for (std::size_t n = 0; n < exposures.size(); ++n) {
    const Eigen::VectorXd w = vector_from(exposures[n]);
    if (w.size() != K) throw std::invalid_argument("exposure row length does not match K");
    f.W.row(static_cast<Eigen::Index>(n)) = w.transpose();
  }
  f.loglik = doc.value("loglik", 0.0);
  f.gkl = doc.value("gkl", 0.0);
  f.iterations = doc.value("iterations", 0);
  f.converged = doc.value("converged", false);
  f.n_params = doc.value("n_params", 0);
  f.signature_params = doc.value("signature_params", 0);
  f.best_start = doc.value("best_start", -1);
  return out;
}

StoredFit load_fit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  try {
    return fit_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void write_selection_csv(const SelectionReport& report, std::ostream& out) {
  out << "model,n_prm,penalty,gkl,bic,delta_bic,converged,best,error\n";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    out << '"' << r.spec.label() << "\"," << r.n_prm << ',' << format_fixed(r.penalty) << ','
        << (r.error ? "NA" : format_fixed(r.gkl)) << ',' << format_fixed(r.bic) << ','
        << format_fixed(r.delta_bic) << ',' << (r.converged ? 1 : 0) << ','
        << (static_cast<int>(i) == report.best ? 1 : 0) << ',';
    if (r.error) {
      std::string msg = *r.error;
      for (auto& c : msg)
        if (c == '"' || c == '\n') c = '\'';
      out << '"' << msg << '"';
    }
    out << '\n';
  }
}

nlohmann::json selection_to_json(const SelectionReport& report) {
  nlohmann::json doc;
  doc["n_obs"] = report.n_obs;
  doc["best"] = report.best_row() ? nlohmann::json(report.best_row()->spec.parts()) : nlohmann::json();
  auto rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json j;
    j["model"] = r.spec.parts();
    j["n_prm"] = r.n_prm;
    j["penalty"] = r.penalty;
    j["gkl"] = number_or_null(r.gkl);
    j["loglik"] = number_or_null(r.loglik);
    j["bic"] = number_or_null(r.bic);
    j["delta_bic"] = number_or_null(r.delta_bic);
    j["converged"] = r.converged;
    if (r.error) j["error"] = *r.error;
    rows.push_back(std::move(j));
  }
  doc["rows"] = std::move(rows);
  return doc;
}

void write_bootstrap_csv(const BootstrapReport& report, std::ostream& out) {
  out << "replicate,signature,matched,similarity\n";
  for (const auto& rep : report.replicates) {
    if (rep.error) continue;
    for (Eigen::Index k = 0; k < rep.matched.size(); ++k)
      out << rep.replicate << ',' << k + 1 << ',' << rep.permutation[static_cast<std::size_t>(k)] + 1 << ','
          << format_fixed(rep.matched[k]) << '\n';
  }
}

nlohmann::json bootstrap_to_json(const BootstrapReport& report) {
  nlohmann::json doc;
  doc["n_replicates"] = report.n_replicates;
  int failed = 0;
  auto errors = nlohmann::json::array();
  for (const auto& rep : report.replicates)
    if (rep.error) {
      ++failed;
      errors.push_back({{"replicate", rep.replicate}, {"error", *rep.error}});
    }
  doc["failed"] = failed;
  doc["errors"] = std::move(errors);
  auto sigs = nlohmann::json::array();
  for (std::size_t k = 0; k < report.per_signature.size(); ++k) {
    const auto& q = report.per_signature[k];
    sigs.push_back({{"signature", k + 1},
                    {"count", q.count},
                    {"min", number_or_null(q.min)},
                    {"q25", number_or_null(q.q25)},
                    {"median", number_or_null(q.median)},
                    {"q75", number_or_null(q.q75)},
                    {"max", number_or_null(q.max)}});
  }
  doc["signatures"] = std::move(sigs);
  return doc;
}

void write_downsample_csv(const DownsampleReport& report, const std::vector<std::string>& sample_ids,
                          std::ostream& out) {
  out << "fraction,replicate,sample,similarity\n";
  for (const auto& e : report.entries) {
    const auto s = static_cast<std::size_t>(e.sample);
    out << format_fixed(e.fraction) << ',' << e.replicate << ','
        << (s < sample_ids.size() ? sample_ids[s] : std::to_string(e.sample + 1)) << ','
        << (e.similarity ? format_fixed(*e.similarity) : "") << '\n';
  }
}

}  // namespace signet
