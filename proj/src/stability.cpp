#include "signet/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "signet/parallel.hpp"

namespace signet {

Eigen::MatrixXd simulate_counts(const Eigen::MatrixXd& W, const Eigen::MatrixXd& H, std::uint64_t seed) {
  if (W.cols() != H.rows()) throw std::invalid_argument("W and H are not conformable");
  if ((W.array() < 0).any() || (H.array() < 0).any())
    throw std::invalid_argument("W and H must be non-negative");
  const Eigen::MatrixXd mean = W * H;
  auto rng = stream_rng(seed, 0);
  Eigen::MatrixXd V(mean.rows(), mean.cols());
  for (Eigen::Index n = 0; n < mean.rows(); ++n) {
    for (Eigen::Index t = 0; t < mean.cols(); ++t) {
      const double m = mean(n, t);
      if (m > 0) {
        std::poisson_distribution<long long> pois(m);
        V(n, t) = static_cast<double>(pois(rng));
      } else {
        V(n, t) = 0.0;
      }
    }
  }
  return V;
}

Eigen::MatrixXd downsample_counts(const Eigen::MatrixXd& V, double p, std::uint64_t seed) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("downsampling fraction must be in (0, 1]");
  if (p == 1.0) return V;
  auto rng = stream_rng(seed, 0);
  Eigen::MatrixXd out(V.rows(), V.cols());
  for (Eigen::Index n = 0; n < V.rows(); ++n) {
    for (Eigen::Index t = 0; t < V.cols(); ++t) {
      const auto count = static_cast<long long>(V(n, t));
      if (count > 0) {
        std::binomial_distribution<long long> bin(count, p);
        out(n, t) = static_cast<double>(bin(rng));
      } else {
        out(n, t) = 0.0;
      }
    }
  }
  return out;
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm(), nb = b.norm();
  if (!(na > 0) || !(nb > 0)) return std::numeric_limits<double>::quiet_NaN();
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

std::vector<int> max_weight_assignment(const Eigen::MatrixXd& score) {
  const int n = static_cast<int>(score.rows());
  if (score.cols() != n) throw std::invalid_argument("assignment needs a square matrix");
  if (n == 0) return {};
  const double top = score.maxCoeff();
  const double inf = std::numeric_limits<double>::infinity();
  // Shortest augmenting paths with potentials on costs top - score; 1-based,
  // column 0 is a sentinel.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = (top - score(i0 - 1, j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n);
  for (int j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

SignatureMatch match_signatures(const Eigen::MatrixXd& H_ref, const Eigen::MatrixXd& H_new) {
  if (H_ref.rows() != H_new.rows() || H_ref.cols() != H_new.cols())
    throw std::invalid_argument("signature matrices differ in shape");
  const auto k = H_ref.rows();
  SignatureMatch m;
  m.cosine.resize(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      const double c = cosine_similarity(H_ref.row(i).transpose(), H_new.row(j).transpose());
      m.cosine(i, j) = std::isnan(c) ? 0.0 : c;
    }
  m.permutation = max_weight_assignment(m.cosine);
  m.similarity.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) m.similarity[i] = m.cosine(i, m.permutation[static_cast<std::size_t>(i)]);
  return m;
}

QuantileSummary summarize(std::vector<double> xs) {
  xs.erase(std::remove_if(xs.begin(), xs.end(), [](double x) { return !std::isfinite(x); }), xs.end());
  QuantileSummary q;
  q.count = static_cast<int>(xs.size());
  if (xs.empty()) {
    q.min = q.q25 = q.median = q.q75 = q.max = std::numeric_limits<double>::quiet_NaN();
    return q;
  }
  std::sort(xs.begin(), xs.end());
  auto at = [&](double prob) {
    const double pos = prob * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
  };
  q.min = xs.front();
  q.q25 = at(0.25);
  q.median = at(0.5);
  q.q75 = at(0.75);
  q.max = xs.back();
  return q;
}

BootstrapReport parametric_bootstrap(const FittedFactorization& fitted, const MutationSpace& space, int n_reps,
                                     const ResampleConfig& config) {
  BootstrapReport report;
  report.n_replicates = std::max(0, n_reps);
  report.replicates.resize(static_cast<std::size_t>(report.n_replicates));
  const int k = static_cast<int>(fitted.H.rows());

  parallel_for(report.replicates.size(), resolve_threads(config.threads), [&](std::size_t r) {
    BootstrapReplicate& rep = report.replicates[r];
    rep.replicate = static_cast<int>(r);
    auto seeds = stream_rng(config.seed, r);
    const std::uint64_t sim_seed = seeds();
    const std::uint64_t fit_seed = seeds();
    try {
      CountMatrix sim{simulate_counts(fitted.W, fitted.H, sim_seed), {}, space};
      FitConfig cfg;
      cfg.k = k;
      cfg.models = fitted.models;
      cfg.n_starts = config.n_starts;
      cfg.start_iters = config.start_iters;
      cfg.tol = config.tol;
      cfg.max_iters = config.max_iters;
      cfg.seed = fit_seed;
      cfg.threads = 1;
      cfg.glm = config.glm;
      const FittedFactorization refit = fit(sim, cfg);
      SignatureMatch m = match_signatures(fitted.H, refit.H);
      rep.cosine = std::move(m.cosine);
      rep.matched = std::move(m.similarity);
      rep.permutation = std::move(m.permutation);
    } catch (const std::exception& e) {
      rep.error = e.what();
    }
  });

  for (int s = 0; s < k; ++s) {
    std::vector<double> xs;
    for (const auto& rep : report.replicates)
      if (!rep.error) xs.push_back(rep.matched[s]);
    report.per_signature.push_back(summarize(std::move(xs)));
  }
  return report;
}

double DownsampleReport::median(double fraction) const {
  std::vector<double> xs;
  for (const auto& e : entries)
    if (e.fraction == fraction && e.similarity) xs.push_back(*e.similarity);
  return summarize(std::move(xs)).median;
}

DownsampleReport exposure_recovery(const Eigen::MatrixXd& V, const Eigen::MatrixXd& W_ref,
                                   const Eigen::MatrixXd& H_fixed, const std::vector<double>& fractions,
                                   int n_reps, std::uint64_t seed, int threads, double tol) {
  if (W_ref.rows() != V.rows() || W_ref.cols() != H_fixed.rows() || H_fixed.cols() != V.cols())
    throw std::invalid_argument("V, W and H are not conformable");
  for (Eigen::Index k = 0; k < H_fixed.rows(); ++k)
    if (std::abs(H_fixed.row(k).sum() - 1.0) > 1e-9 || (H_fixed.row(k).array() < 0).any())
      throw std::invalid_argument("fixed signatures must be probability vectors");
  for (double f : fractions)
    if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("downsampling fraction must be in (0, 1]");

  DownsampleReport report;
  report.fractions = fractions;
  report.n_replicates = std::max(0, n_reps);
  const std::size_t tasks = fractions.size() * static_cast<std::size_t>(report.n_replicates);
  std::vector<std::vector<DownsampleEntry>> per_task(tasks);

  parallel_for(tasks, resolve_threads(threads), [&](std::size_t task) {
    const std::size_t fi = task / static_cast<std::size_t>(report.n_replicates);
    const int rep = static_cast<int>(task % static_cast<std::size_t>(report.n_replicates));
    auto seeds = stream_rng(seed, task);
    const Eigen::MatrixXd thinned = downsample_counts(V, fractions[fi], seeds());
    const ExposureFit ef = fit_exposures(thinned, H_fixed, tol);
    for (Eigen::Index n = 0; n < V.rows(); ++n) {
      DownsampleEntry e{fractions[fi], rep, static_cast<int>(n), std::nullopt};
      if (thinned.row(n).sum() > 0) {
        const double c = cosine_similarity(ef.W.row(n).transpose(), W_ref.row(n).transpose());
        if (std::isfinite(c)) e.similarity = c;
      }
      per_task[task].push_back(e);
    }
  });
  for (auto& v : per_task)
    for (auto& e : v) report.entries.push_back(e);
  return report;
}

}  // namespace signet
