#include "signet/factorizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "signet/formula.hpp"
#include "signet/parallel.hpp"

namespace signet {

namespace {

constexpr double kMeanFloor = 1e-300;

// V / WH with cells of zero count mapped to zero.
Eigen::MatrixXd count_ratio(const Eigen::MatrixXd& V, const Eigen::MatrixXd& WH) {
  Eigen::MatrixXd R(V.rows(), V.cols());
  for (Eigen::Index t = 0; t < V.cols(); ++t) {
    for (Eigen::Index n = 0; n < V.rows(); ++n) {
      const double v = V(n, t);
      if (v == 0.0) {
        R(n, t) = 0.0;
      } else if (!(WH(n, t) >= kMeanFloor)) {
        throw FitError("fitted mean vanishes at sample " + std::to_string(n) + ", type " +
                       std::to_string(t) + " with positive count");
      } else {
        R(n, t) = v / WH(n, t);
      }
    }
  }
  return R;
}

void check_shapes(const Eigen::MatrixXd& V, const Eigen::MatrixXd& W, const Eigen::MatrixXd& H) {
  if (W.rows() != V.rows() || H.cols() != V.cols() || W.cols() != H.rows())
    throw std::invalid_argument("V, W and H are not conformable");
}

double relative_change(double before, double after) {
  return (after - before) / std::max(1.0, std::abs(after));
}

}  // namespace

void CountMatrix::validate() const {
  if (counts.cols() != static_cast<Eigen::Index>(space.size()))
    throw std::invalid_argument("count matrix has " + std::to_string(counts.cols()) +
                                " columns, mutation space has " + std::to_string(space.size()));
  if (!sample_ids.empty() && sample_ids.size() != static_cast<std::size_t>(counts.rows()))
    throw std::invalid_argument("sample id count does not match count matrix rows");
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    const double v = counts.data()[i];
    if (!(v >= 0) || v != std::floor(v) || !std::isfinite(v))
      throw std::invalid_argument("counts must be non-negative integers");
  }
}

int SignatureModel::n_params(const MutationSpace& space) const {
  return design ? design->n_params() : static_cast<int>(space.size()) - 1;
}

SignatureModel SignatureModel::unconstrained() { return SignatureModel{"unconstrained", nullptr}; }

SignatureModel SignatureModel::parse(std::string_view spec, const MutationSpace& space) {
  if (spec == "unconstrained" || spec == "nmf") return unconstrained();
  const TermList terms = is_builtin_formula(spec) ? builtin_formula(spec, space.flanks())
                                                  : parse_formula(spec, space.flanks());
  return SignatureModel{std::string(spec), std::make_shared<const DesignMatrix>(build_design(terms, space))};
}

FitConfig FitConfig::uniform(int k, const SignatureModel& model) {
  FitConfig c;
  c.k = k;
  c.models.assign(static_cast<std::size_t>(k), model);
  return c;
}

LoglikGkl loglik_and_gkl(const Eigen::MatrixXd& V, const Eigen::MatrixXd& WH) {
  if (V.rows() != WH.rows() || V.cols() != WH.cols())
    throw std::invalid_argument("V and WH differ in shape");
  LoglikGkl out;
  for (Eigen::Index t = 0; t < V.cols(); ++t) {
    for (Eigen::Index n = 0; n < V.rows(); ++n) {
      const double v = V(n, t), m = WH(n, t);
      if (v > 0) {
        if (!(m >= kMeanFloor)) throw FitError("fitted mean vanishes where count is positive");
        const double log_m = std::log(m);
        out.loglik += v * log_m - m;
        out.gkl += v * (std::log(v) - log_m) - v + m;
      } else {
        out.loglik -= m;
        out.gkl += m;
      }
    }
  }
  return out;
}

LoglikGkl loglik_and_gkl(const Eigen::MatrixXd& V, const Eigen::MatrixXd& W, const Eigen::MatrixXd& H) {
  check_shapes(V, W, H);
  return loglik_and_gkl(V, W * H);
}

Eigen::VectorXd estep_expected_counts(const Eigen::MatrixXd& V, const Eigen::MatrixXd& W,
                                      const Eigen::MatrixXd& H, int k) {
  check_shapes(V, W, H);
  const Eigen::MatrixXd R = count_ratio(V, W * H);
  return (H.row(k).transpose().array() * (R.transpose() * W.col(k)).array()).matrix();
}

Eigen::VectorXd update_signature_unconstrained(const Eigen::MatrixXd& V, const Eigen::MatrixXd& W,
                                               const Eigen::MatrixXd& H, int k) {
  Eigen::VectorXd y = estep_expected_counts(V, W, H, k);
  const double s = y.sum();
  if (!(s > 0)) return H.row(k).transpose();
  return y / s;
}

ParametricUpdate update_signature_parametric(const DesignMatrix& design, const Eigen::VectorXd& beta,
                                             const Eigen::MatrixXd& V, const Eigen::MatrixXd& W,
                                             const Eigen::MatrixXd& H, int k, const GlmOptions& glm) {
  const Eigen::VectorXd y = estep_expected_counts(V, W, H, k);
  ParametricUpdate out;
  if (!(y.sum() > 0)) {
    out.beta = beta;
    out.h = H.row(k).transpose();
    return out;
  }
  out.glm = fit_poisson_loglinear(design, y, beta, glm);
  out.beta = out.glm.beta;
  out.h = normalize_to_signature(out.glm);
  return out;
}

Eigen::MatrixXd update_exposures(const Eigen::MatrixXd& V, const Eigen::MatrixXd& W,
                                 const Eigen::MatrixXd& H) {
  check_shapes(V, W, H);
  const Eigen::MatrixXd R = count_ratio(V, W * H);
  return (W.array() * (R * H.transpose()).array()).matrix();
}

EmStepInfo em_iteration(const Eigen::MatrixXd& V, const std::vector<SignatureModel>& models,
                        EmState& state, const GlmOptions& glm) {
  EmStepInfo info;
  const Eigen::MatrixXd WH = state.W * state.H;
  const Eigen::MatrixXd R = count_ratio(V, WH);
  info.loglik_before = loglik_and_gkl(V, WH).loglik;

  const Eigen::MatrixXd G = state.W.transpose() * R;   // K x T
  const Eigen::MatrixXd RH = R * state.H.transpose();  // N x K

  Eigen::MatrixXd H_new(state.H.rows(), state.H.cols());
  for (Eigen::Index k = 0; k < state.H.rows(); ++k) {
    const Eigen::VectorXd y = (state.H.row(k).array() * G.row(k).array()).transpose();
    const double total = y.sum();
    const auto& model = models[static_cast<std::size_t>(k)];
    if (!(total > 0)) {
      // A signature without exposure has no data; it stays where it is.
      H_new.row(k) = state.H.row(k);
    } else if (!model.parametric()) {
      H_new.row(k) = (y / total).transpose();
    } else {
      auto& beta = state.betas[static_cast<std::size_t>(k)];
      GlmFit g;
      try {
        g = fit_poisson_loglinear(*model.design, y, beta, glm);
      } catch (const GlmDivergence& e) {
        throw FitError("signature " + std::to_string(k + 1) + ": " + e.what());
      }
      if (!g.converged) ++info.glm_nonconverged;
      info.ridge_events += g.ridge_events;
      beta = std::move(g.beta);
      H_new.row(k) = normalize_to_signature(g).transpose();
    }
  }
  state.W = (state.W.array() * RH.array()).matrix();
  state.H = std::move(H_new);
  return info;
}

EmState random_start(const Eigen::MatrixXd& V, const std::vector<SignatureModel>& models,
                     std::uint64_t seed, std::uint64_t stream, const GlmOptions& glm) {
  const auto k = static_cast<Eigen::Index>(models.size());
  auto rng = stream_rng(seed, stream);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  EmState s;
  s.W.resize(V.rows(), k);
  s.H.resize(k, V.cols());
  for (Eigen::Index n = 0; n < V.rows(); ++n)
    for (Eigen::Index j = 0; j < k; ++j) s.W(n, j) = unif(rng);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index t = 0; t < V.cols(); ++t) s.H(j, t) = unif(rng);
  s.betas.resize(models.size());

  const double scale = std::max(1.0, V.sum() / static_cast<double>(k));
  for (Eigen::Index j = 0; j < k; ++j) {
    s.H.row(j) /= s.H.row(j).sum();
    const auto& model = models[static_cast<std::size_t>(j)];
    if (!model.parametric()) continue;
    const Eigen::VectorXd y = s.H.row(j).transpose() * scale;
    const GlmFit g = fit_poisson_loglinear(*model.design, y,
                                           Eigen::VectorXd::Zero(model.design->n_params()), glm);
    s.betas[static_cast<std::size_t>(j)] = g.beta;
    s.H.row(j) = normalize_to_signature(g).transpose();
  }
  return s;
}

namespace {

struct RunResult {
  int iterations = 0;
  bool converged = false;
  int glm_nonconverged = 0;
  int ridge_events = 0;
};

RunResult run_em(const Eigen::MatrixXd& V, const std::vector<SignatureModel>& models, EmState& state,
                 int max_iters, double tol, const GlmOptions& glm, std::vector<double>* trace) {
  RunResult r;
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (int it = 0; it < max_iters; ++it) {
    const EmStepInfo info = em_iteration(V, models, state, glm);
    r.glm_nonconverged += info.glm_nonconverged;
    r.ridge_events += info.ridge_events;
    ++r.iterations;
    if (trace) trace->push_back(info.loglik_before);
    if (it > 0 && relative_change(previous, info.loglik_before) < tol) {
      r.converged = true;
      break;
    }
    previous = info.loglik_before;
  }
  return r;
}

}  // namespace

FittedFactorization fit(const CountMatrix& data, const FitConfig& config) {
  data.validate();
  const Eigen::MatrixXd& V = data.counts;
  const int k = config.k;
  if (k < 1) throw FitError("number of signatures must be at least 1");
  if (config.models.size() != static_cast<std::size_t>(k))
    throw FitError("expected " + std::to_string(k) + " signature models, got " +
                   std::to_string(config.models.size()));
  if (k > std::min(V.rows(), V.cols()))
    throw FitError("number of signatures exceeds min(samples, types)");
  if (config.n_starts < 1 || config.start_iters < 0 || config.max_iters < 1 || !(config.tol > 0))
    throw FitError("invalid multi-start settings");
  for (Eigen::Index n = 0; n < V.rows(); ++n)
    if (!(V.row(n).sum() > 0))
      throw FitError("sample " + (data.sample_ids.empty() ? std::to_string(n) : data.sample_ids[static_cast<std::size_t>(n)]) +
                     " has no mutations");
  for (const auto& m : config.models)
    if (m.parametric() && static_cast<Eigen::Index>(m.design->n_types()) != V.cols())
      throw FitError("signature model '" + m.name + "' has " + std::to_string(m.design->n_types()) +
                     " outcomes, data has " + std::to_string(V.cols()) + " mutation types");

  const auto n_starts = static_cast<std::size_t>(config.n_starts);
  std::vector<std::optional<EmState>> states(n_starts);
  std::vector<StartSummary> summaries(n_starts);
  std::vector<RunResult> runs(n_starts);

  parallel_for(n_starts, resolve_threads(config.threads), [&](std::size_t s) {
    summaries[s].index = static_cast<int>(s);
    try {
      EmState st = random_start(V, config.models, config.seed, s, config.glm);
      runs[s] = run_em(V, config.models, st, config.start_iters, 0.0, config.glm, nullptr);
      summaries[s].loglik = loglik_and_gkl(V, st.W * st.H).loglik;
      states[s] = std::move(st);
    } catch (const std::runtime_error&) {
      summaries[s].failed = true;
      summaries[s].loglik = -std::numeric_limits<double>::infinity();
    }
  });

  int best = -1;
  for (std::size_t s = 0; s < n_starts; ++s) {
    if (summaries[s].failed) continue;
    if (best < 0 || summaries[s].loglik > summaries[static_cast<std::size_t>(best)].loglik)
      best = static_cast<int>(s);
  }
  if (best < 0) throw FitError("all " + std::to_string(n_starts) + " starts failed");

  EmState state = std::move(*states[static_cast<std::size_t>(best)]);
  states.clear();

  FittedFactorization out;
  std::vector<double>* trace = config.record_trace ? &out.trace : nullptr;
  const RunResult final_run = run_em(V, config.models, state, config.max_iters, config.tol, config.glm, trace);

  // Order signatures by decreasing total exposure (stable for ties).
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  const Eigen::VectorXd totals = state.W.colwise().sum().transpose();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return totals[a] > totals[b]; });

  out.W.resize(V.rows(), k);
  out.H.resize(k, V.cols());
  for (int j = 0; j < k; ++j) {
    const int src = order[static_cast<std::size_t>(j)];
    out.W.col(j) = state.W.col(src);
    out.H.row(j) = state.H.row(src) / state.H.row(src).sum();
    out.models.push_back(config.models[static_cast<std::size_t>(src)]);
    if (config.models[static_cast<std::size_t>(src)].parametric())
      out.betas.emplace_back(state.betas[static_cast<std::size_t>(src)]);
    else
      out.betas.emplace_back(std::nullopt);
  }

  const LoglikGkl fitq = loglik_and_gkl(V, out.W * out.H);
  out.loglik = fitq.loglik;
  out.gkl = fitq.gkl;
  if (trace) trace->push_back(out.loglik);
  out.iterations = runs[static_cast<std::size_t>(best)].iterations + final_run.iterations;
  out.converged = final_run.converged;
  out.best_start = best;
  out.starts = std::move(summaries);
  out.glm_nonconverged = runs[static_cast<std::size_t>(best)].glm_nonconverged + final_run.glm_nonconverged;
  out.ridge_events = runs[static_cast<std::size_t>(best)].ridge_events + final_run.ridge_events;
  for (const auto& m : out.models) out.signature_params += m.n_params(data.space);
  out.n_params = static_cast<int>(V.rows()) * k + out.signature_params;
  return out;
}

ExposureFit fit_exposures(const Eigen::MatrixXd& V, const Eigen::MatrixXd& H, double tol, int max_iters,
                          bool record_trace) {
  if (H.cols() != V.cols()) throw std::invalid_argument("H and V differ in number of types");
  const auto k = H.rows();
  ExposureFit out;
  out.W.resize(V.rows(), k);
  for (Eigen::Index n = 0; n < V.rows(); ++n) out.W.row(n).setConstant(V.row(n).sum() / static_cast<double>(k));

  // The likelihood is flat near the optimum, so convergence is judged on the
  // exposures themselves, relative to each sample's total.
  const Eigen::ArrayXd scale = V.rowwise().sum().array().max(1.0);
  for (int it = 0; it < max_iters; ++it) {
    const Eigen::MatrixXd WH = out.W * H;
    const Eigen::MatrixXd R = count_ratio(V, WH);
    if (record_trace) out.trace.push_back(loglik_and_gkl(V, WH).loglik);
    const Eigen::MatrixXd next = (out.W.array() * (R * H.transpose()).array()).matrix();
    const double change = ((next - out.W).array().abs().colwise() / scale).maxCoeff();
    out.W = next;
    ++out.iterations;
    if (change < tol) {
      out.converged = true;
      break;
    }
  }
  out.loglik = loglik_and_gkl(V, out.W * H).loglik;
  return out;
}

}  // namespace signet
