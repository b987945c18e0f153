#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "signet/factorizer.hpp"

using signet::cli::RunConfig;

namespace {

void common_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--out", c.out, "output directory")->capture_default_str();
  sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
  sub->add_option("--threads", c.threads, "worker threads (0: SIGNET_THREADS or all cores)");
}

void fit_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--starts", c.n_starts, "number of random starts");
  sub->add_option("--start-iters", c.start_iters, "EM iterations per start");
  sub->add_option("--tol", c.tol, "relative log-likelihood tolerance");
  sub->add_option("--max-iters", c.max_iters, "EM iteration cap for the final run")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Poisson NMF with formula-constrained mutational signatures"};
  app.set_version_flag("--version", SIGNET_VERSION);
  app.require_subcommand(1);

  RunConfig c;
  std::string models, options, fractions, n_obs = "nonzero";

  auto* fit = app.add_subcommand("fit", "fit one factorization");
  fit->add_option("input", c.input, "count table (CSV or TSV)")->required();
  fit->add_option("--k", c.k, "number of signatures")->required();
  fit->add_option("--model", models, "comma-separated builtin names or formulas")->required();
  fit->add_flag("--lenient", c.lenient, "zero-fill missing mutation types");
  fit_options(fit, c);
  common_options(fit, c);

  auto* select = app.add_subcommand("select", "fit all mixtures of K parametrizations and rank by BIC");
  select->add_option("input", c.input, "count table (CSV or TSV)")->required();
  select->add_option("--k", c.k, "number of signatures")->required();
  select->add_option("--options", options, "comma-separated parametrizations (default mono,di,tri)");
  select->add_option("--n-obs", n_obs, "observation count for BIC")
      ->check(CLI::IsMember({"nonzero", "dense"}))
      ->capture_default_str();
  select->add_flag("--lenient", c.lenient, "zero-fill missing mutation types");
  fit_options(select, c);
  common_options(select, c);

  auto* boot = app.add_subcommand("bootstrap", "parametric bootstrap of a stored fit");
  boot->add_option("--from", c.from, "fit.json written by fit")->required();
  boot->add_option("--reps", c.reps, "replicates")->capture_default_str();
  fit_options(boot, c);
  common_options(boot, c);

  auto* down = app.add_subcommand("downsample", "exposure recovery after binomial thinning");
  down->add_option("input", c.input, "count table the fit was made from")->required();
  down->add_option("--from", c.from, "fit.json written by fit")->required();
  down->add_option("--reps", c.reps, "replicates per fraction")->capture_default_str();
  down->add_option("--fractions", fractions, "comma-separated thinning probabilities (default 0.01,0.02,0.05)");
  down->add_option("--tol", c.tol, "exposure tolerance");
  down->add_flag("--lenient", c.lenient, "zero-fill missing mutation types");
  common_options(down, c);

  auto* sim = app.add_subcommand("simulate", "draw Poisson counts from a stored fit");
  sim->add_option("--from", c.from, "fit.json written by fit")->required();
  common_options(sim, c);

  auto* design = app.add_subcommand("design-export", "write the design matrix of a formula");
  design->add_option("--model", models, "builtin name or formula")->required();
  design->add_option("--flanks", c.flanks, "flanking bases per side")->capture_default_str();
  design->add_option("--out", c.out, "output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  for (auto* sub : app.get_subcommands()) c.command = sub->get_name();
  try {
    c.models = signet::cli::split_list(models);
    c.options = signet::cli::split_list(options);
    if (!fractions.empty()) c.fractions = signet::cli::parse_fractions(fractions);
    c.n_obs = n_obs == "dense" ? signet::ObservationCount::dense : signet::ObservationCount::nonzero;
    return signet::cli::run(c);
  } catch (const std::invalid_argument& e) {
    std::cerr << signet::cli::error_record(c.command, "invalid_argument", e.what()) << '\n';
    return 2;
  } catch (const signet::FitError& e) {
    std::cerr << signet::cli::error_record(c.command, "fit_error", e.what()) << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << signet::cli::error_record(c.command, "error", e.what()) << '\n';
    return 1;
  }
}
