#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "signet/io.hpp"
#include "signet/parallel.hpp"
#include "signet/stability.hpp"

namespace fs = std::filesystem;

namespace signet::cli {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class OutputDir {
 public:
  explicit OutputDir(const RunConfig& config) : config_(config), dir_(config.out) {
    fs::create_directories(dir_);
  }

  std::ofstream open(const std::string& name) {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    files_.push_back(name);
    return f;
  }

  void write_json(const std::string& name, const nlohmann::json& doc) {
    auto f = open(name);
    f << doc.dump(1) << '\n';
  }

  void note(const std::string& key, nlohmann::json value) { notes_[key] = std::move(value); }

  void finish(bool partial = false) {
    nlohmann::json cfg = config_.to_json();
    nlohmann::json m;
    m["tool"] = "signet";
    m["version"] = SIGNET_VERSION;
    m["command"] = config_.command;
    m["seed"] = config_.seed;
    m["config"] = cfg;
    m["config_hash"] = fnv1a_hex(cfg.dump());
    if (!config_.input.empty()) m["input_hash"] = fnv1a_hex(read_file(config_.input));
    if (!config_.from.empty()) m["from_hash"] = fnv1a_hex(read_file(config_.from));
    m["outputs"] = files_;
    m["partial"] = partial;
    if (!notes_.empty()) m["notes"] = notes_;
    std::ofstream f(dir_ / "manifest.json", std::ios::binary);
    f << m.dump(1) << '\n';
  }

 private:
  const RunConfig& config_;
  fs::path dir_;
  std::vector<std::string> files_;
  nlohmann::json notes_ = nlohmann::json::object();
};

CountMatrix load_input(const RunConfig& c) {
  require(!c.input.empty(), "--input is required for " + c.command);
  LoadOptions o;
  o.lenient = c.lenient;
  return load_counts(c.input, o);
}

StoredFit load_from(const RunConfig& c) {
  require(!c.from.empty(), "--from is required for " + c.command);
  return load_fit(c.from);
}

FitConfig fit_config(const RunConfig& c, const MutationSpace& space) {
  FitConfig f;
  f.k = c.k;
  for (const auto& m : c.models) f.models.push_back(SignatureModel::parse(m, space));
  if (f.models.size() == 1) f.models.assign(static_cast<std::size_t>(c.k), f.models.front());
  f.n_starts = c.n_starts.value_or(f.n_starts);
  f.start_iters = c.start_iters.value_or(f.start_iters);
  f.tol = c.tol.value_or(f.tol);
  f.max_iters = c.max_iters;
  f.seed = c.seed;
  f.threads = c.threads;
  return f;
}

ResampleConfig resample_config(const RunConfig& c) {
  ResampleConfig r;
  r.n_starts = c.n_starts.value_or(r.n_starts);
  r.start_iters = c.start_iters.value_or(r.start_iters);
  r.tol = c.tol.value_or(r.tol);
  r.max_iters = c.max_iters;
  r.seed = c.seed;
  r.threads = c.threads;
  return r;
}

void write_signatures_csv(const FittedFactorization& f, const MutationSpace& space, std::ostream& out) {
  out << "signature,model";
  for (const auto& l : space.labels()) out << ',' << l;
  out << '\n';
  for (Eigen::Index k = 0; k < f.H.rows(); ++k) {
    out << 'S' << k + 1 << ',' << f.models[static_cast<std::size_t>(k)].name;
    for (Eigen::Index t = 0; t < f.H.cols(); ++t) out << ',' << format_fixed(f.H(k, t));
    out << '\n';
  }
}

void write_exposures_csv(const FittedFactorization& f, const std::vector<std::string>& ids, std::ostream& out) {
  out << "sample";
  for (Eigen::Index k = 0; k < f.W.cols(); ++k) out << ",S" << k + 1;
  out << '\n';
  for (Eigen::Index n = 0; n < f.W.rows(); ++n) {
    out << ids[static_cast<std::size_t>(n)];
    for (Eigen::Index k = 0; k < f.W.cols(); ++k) out << ',' << format_fixed(f.W(n, k));
    out << '\n';
  }
}

}  // namespace

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_fractions(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == item.size(), "not a number: " + item);
    out.push_back(v);
  }
  return out;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void RunConfig::validate() const {
  require(!out.empty(), "--out must not be empty");
  require(!n_starts || *n_starts > 0, "--starts must be positive");
  require(!start_iters || *start_iters > 0, "--start-iters must be positive");
  require(!tol || *tol > 0, "--tol must be positive");
  require(max_iters > 0, "--max-iters must be positive");
  require(reps >= 0, "--reps must be non-negative");
  require(flanks >= 0 && flanks <= 3, "--flanks must be between 0 and 3");
  for (double f : fractions) require(f > 0 && f <= 1, "--fractions must lie in (0, 1]");
  if (command == "fit") {
    require(k > 0, "--k must be positive");
    require(!models.empty(), "--model is required");
    require(models.size() == 1 || static_cast<int>(models.size()) == k,
            "--model takes one entry or one per signature (" + std::to_string(k) + ")");
  }
  if (command == "select") require(k > 0, "--k must be positive");
  if (command == "design-export") require(models.size() == 1, "--model takes exactly one entry");
  if (command == "downsample") require(!fractions.empty(), "--fractions must not be empty");
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["k"] = k;
  j["models"] = models;
  j["options"] = options;
  j["n_starts"] = n_starts ? nlohmann::json(*n_starts) : nlohmann::json();
  j["start_iters"] = start_iters ? nlohmann::json(*start_iters) : nlohmann::json();
  j["tol"] = tol ? nlohmann::json(*tol) : nlohmann::json();
  j["max_iters"] = max_iters;
  j["seed"] = seed;
  j["n_obs"] = n_obs == ObservationCount::dense ? "dense" : "nonzero";
  j["reps"] = reps;
  j["fractions"] = fractions;
  j["flanks"] = flanks;
  j["lenient"] = lenient;
  return j;
}

int cmd_fit(const RunConfig& c) {
  const CountMatrix V = load_input(c);
  const FitConfig cfg = fit_config(c, V.space);
  const FittedFactorization f = fit(V, cfg);
  OutputDir out(c);
  out.write_json("fit.json", fit_to_json(f, V, cfg));
  {
    auto s = out.open("signatures.csv");
    write_signatures_csv(f, V.space, s);
  }
  {
    auto e = out.open("exposures.csv");
    write_exposures_csv(f, V.sample_ids, e);
  }
  out.note("gkl", f.gkl);
  out.note("converged", f.converged);
  out.finish(!f.converged);
  return 0;
}

int cmd_select(const RunConfig& c) {
  const CountMatrix V = load_input(c);
  const std::vector<std::string> opts = c.options.empty() ? std::vector<std::string>{"mono", "di", "tri"} : c.options;
  const auto specs = enumerate_mixtures(opts, c.k);
  RunConfig base_cfg = c;
  base_cfg.models = {"unconstrained"};
  FitConfig base = fit_config(base_cfg, V.space);
  const SelectionReport r = run_selection(V, specs, base, c.n_obs);
  OutputDir out(c);
  {
    auto s = out.open("selection.csv");
    write_selection_csv(r, s);
  }
  out.write_json("selection.json", selection_to_json(r));
  int failed = 0;
  for (const auto& row : r.rows) failed += row.error ? 1 : 0;
  out.note("failed_specs", failed);
  out.finish(failed > 0);
  return r.best < 0 ? 1 : 0;
}

int cmd_bootstrap(const RunConfig& c) {
  const StoredFit stored = load_from(c);
  const BootstrapReport r = parametric_bootstrap(stored.fit, stored.space, c.reps, resample_config(c));
  OutputDir out(c);
  {
    auto s = out.open("bootstrap.csv");
    write_bootstrap_csv(r, s);
  }
  out.write_json("bootstrap.json", bootstrap_to_json(r));
  int failed = 0;
  for (const auto& rep : r.replicates) failed += rep.error ? 1 : 0;
  out.note("failed_replicates", failed);
  out.finish(failed > 0);
  return 0;
}

int cmd_downsample(const RunConfig& c) {
  const StoredFit stored = load_from(c);
  const CountMatrix V = load_input(c);
  require(V.space == stored.space, "input and fit use different mutation spaces");
  require(V.n_samples() == stored.fit.W.rows(), "input and fit have different sample counts");
  const DownsampleReport r = exposure_recovery(V.counts, stored.fit.W, stored.fit.H, c.fractions, c.reps, c.seed,
                                               c.threads, c.tol.value_or(1e-10));
  OutputDir out(c);
  {
    auto s = out.open("downsample.csv");
    write_downsample_csv(r, V.sample_ids, s);
  }
  nlohmann::json medians = nlohmann::json::object();
  for (double f : r.fractions) medians[format_fixed(f)] = r.median(f);
  out.note("median_similarity", medians);
  out.finish();
  return 0;
}

int cmd_simulate(const RunConfig& c) {
  const StoredFit stored = load_from(c);
  CountMatrix V{simulate_counts(stored.fit.W, stored.fit.H, c.seed), stored.sample_ids, stored.space};
  OutputDir out(c);
  {
    auto s = out.open("counts.csv");
    write_counts(V, s);
  }
  out.finish();
  return 0;
}

int cmd_design_export(const RunConfig& c) {
  const MutationSpace space(c.flanks);
  const SignatureModel m = SignatureModel::parse(c.models.front(), space);
  require(m.parametric(), "an unconstrained signature has no design matrix");
  OutputDir out(c);
  {
    auto s = out.open("design.csv");
    m.design->write_csv(s);
  }
  out.note("n_params", m.design->n_params());
  out.finish();
  return 0;
}

int run(const RunConfig& c) {
  c.validate();
  if (c.command == "fit") return cmd_fit(c);
  if (c.command == "select") return cmd_select(c);
  if (c.command == "bootstrap") return cmd_bootstrap(c);
  if (c.command == "downsample") return cmd_downsample(c);
  if (c.command == "simulate") return cmd_simulate(c);
  if (c.command == "design-export") return cmd_design_export(c);
  throw std::invalid_argument("unknown command: " + c.command);
}

std::string error_record(const std::string& command, const std::string& kind, const std::string& message) {
  nlohmann::json e;
  e["error"] = {{"command", command}, {"kind", kind}, {"message", message}};
  return e.dump();
}

}  // namespace signet::cli
