#include "doctest.h"

#include <random>

#include "helpers.hpp"
#include "signet/glm.hpp"

using namespace signet;

namespace {

DesignMatrix builtin(const std::string& name, int n) { return build_design(builtin_formula(name, n), MutationSpace(n)); }

// Main effects of two categorical factors with a and b levels (corner point on
// the second factor); the first factor's block is the intercept set.
DesignMatrix two_factor(int a, int b, bool interaction_col) {
  const int T = a * b;
  const int S = a + (b - 1) + (interaction_col ? 1 : 0);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(T, S);
  std::vector<int> intercept;
  for (int i = 0; i < a; ++i) intercept.push_back(i);
  for (int i = 0; i < a; ++i)
    for (int j = 0; j < b; ++j) {
      const int t = i * b + j;
      x(t, i) = 1;
      if (j > 0) x(t, a + j - 1) = 1;
      if (interaction_col && i == a - 1 && j == b - 1) x(t, S - 1) = 1;
    }
  return DesignMatrix::from_matrix(x, {}, intercept);
}

// Multinomial log-likelihood sum y log softmax(X beta), maximized by plain
// gradient ascent with backtracking. Independent of the Newton solver.
Eigen::VectorXd multinomial_oracle(const DesignMatrix& d, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd& X = d.matrix();
  const double n = y.sum();
  auto value = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = X * b;
    const double mx = eta.maxCoeff();
    const double lse = mx + std::log((eta.array() - mx).exp().sum());
    return y.dot(eta) - n * lse;
  };
  auto probs = [&](const Eigen::VectorXd& b) {
    Eigen::VectorXd e = X * b;
    e = (e.array() - e.maxCoeff()).exp();
    return Eigen::VectorXd(e / e.sum());
  };
  Eigen::VectorXd b = Eigen::VectorXd::Zero(X.cols());
  double step = 1.0 / n;
  double f = value(b);
  for (int it = 0; it < 2000000; ++it) {
    const Eigen::VectorXd g = X.transpose() * (y - n * probs(b));
    if (g.lpNorm<Eigen::Infinity>() < 1e-11 * n) break;
    while (true) {
      const Eigen::VectorXd nb = b + step * g;
      const double nf = value(nb);
      if (nf >= f + 0.25 * step * g.squaredNorm()) {
        b = nb;
        f = nf;
        step *= 1.5;
        break;
      }
      step *= 0.5;
      if (step < 1e-30) return probs(b);
    }
  }
  return probs(b);
}

}  // namespace

TEST_CASE("identity design: saturated fit is log y") {
  const DesignMatrix tri = builtin("tri", 1);
  std::mt19937_64 rng(1);
  const Eigen::VectorXd y = testutil::uniform_matrix(96, 1, rng, 0.5, 20).col(0);
  const GlmFit fit = fit_poisson_loglinear(tri, y, Eigen::VectorXd::Zero(96));
  CHECK(fit.converged);
  CHECK((fit.beta - y.array().log().matrix()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((fit.fitted_mean - y).cwiseAbs().maxCoeff() < 1e-14);

  GlmOptions newton;
  newton.exploit_identity = false;
  newton.max_iter = 100;
  const GlmFit nf = fit_poisson_loglinear(tri, y, Eigen::VectorXd::Zero(96), newton);
  CHECK(nf.converged);
  CHECK(testutil::max_rel_diff(nf.fitted_mean, y) < 1e-8);
}

TEST_CASE("intercept-only blocks fit block means") {
  const MutationSpace s(1);
  const DesignMatrix m = build_design(parse_formula("M", 1), s);
  std::mt19937_64 rng(2);
  const Eigen::VectorXd y = testutil::uniform_matrix(96, 1, rng, 0, 5).col(0);
  const GlmFit fit = fit_poisson_loglinear(m, y, Eigen::VectorXd::Zero(6));
  CHECK(fit.converged);
  for (int b = 0; b < 6; ++b) {
    const double mean = y.segment(b * 16, 16).mean();
    for (int t = 0; t < 16; ++t) CHECK(fit.fitted_mean[b * 16 + t] == doctest::Approx(mean).epsilon(1e-10));
  }
}

TEST_CASE("mono design reproduces product-measure responses") {
  const DesignMatrix mono = builtin("mono", 1);
  const Eigen::Vector4d f(0.1, 0.2, 0.3, 0.4), q(0.4, 0.3, 0.2, 0.1);
  Eigen::VectorXd g(6);
  g << 0.05, 0.1, 0.4, 0.15, 0.2, 0.1;
  Eigen::VectorXd y(96);
  for (int b = 0; b < 6; ++b)
    for (int l = 0; l < 4; ++l)
      for (int r = 0; r < 4; ++r) y[b * 16 + l * 4 + r] = 1000.0 * f[l] * g[b] * q[r];
  const GlmFit fit = fit_poisson_loglinear(mono, y, Eigen::VectorXd::Zero(12));
  CHECK(fit.converged);
  CHECK(testutil::max_rel_diff(fit.fitted_mean, y) < 1e-9);
}

TEST_CASE("mono fit equals the independence MLE for arbitrary responses") {
  const DesignMatrix mono = builtin("mono", 1);
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::VectorXd y = testutil::uniform_matrix(96, 1, rng, 0, 30).col(0);
    y[rep] = 0.0;
    Eigen::VectorXd f = Eigen::VectorXd::Zero(4), g = Eigen::VectorXd::Zero(6), q = Eigen::VectorXd::Zero(4);
    for (int b = 0; b < 6; ++b)
      for (int l = 0; l < 4; ++l)
        for (int r = 0; r < 4; ++r) {
          f[l] += y[b * 16 + l * 4 + r];
          g[b] += y[b * 16 + l * 4 + r];
          q[r] += y[b * 16 + l * 4 + r];
        }
    const double n = y.sum();
    const Eigen::VectorXd h = normalize_to_signature(fit_poisson_loglinear(mono, y, Eigen::VectorXd::Zero(12)));
    for (int b = 0; b < 6; ++b)
      for (int l = 0; l < 4; ++l)
        for (int r = 0; r < 4; ++r)
          CHECK(h[b * 16 + l * 4 + r] == doctest::Approx(f[l] * g[b] * q[r] / (n * n * n)).epsilon(1e-10));
  }
}

TEST_CASE("Poisson trick matches a direct multinomial maximizer") {
  std::mt19937_64 rng(7);
  std::vector<DesignMatrix> designs{two_factor(4, 6, false), two_factor(3, 4, true), two_factor(2, 3, false)};
  for (const auto& d : designs) {
    for (int rep = 0; rep < 3; ++rep) {
      const Eigen::VectorXd y =
          testutil::uniform_matrix(static_cast<Eigen::Index>(d.n_types()), 1, rng, 0.2, 12).col(0);
      const Eigen::VectorXd h = normalize_to_signature(fit_poisson_loglinear(d, y, Eigen::VectorXd::Zero(d.n_params())));
      const Eigen::VectorXd oracle = multinomial_oracle(d, y);
      CHECK((h - oracle).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("analytic score matches finite differences") {
  std::mt19937_64 rng(8);
  for (const char* name : {"mono", "di"}) {
    const DesignMatrix d = builtin(name, 1);
    const Eigen::VectorXd y = testutil::uniform_matrix(96, 1, rng, 0, 10).col(0);
    const Eigen::VectorXd beta = testutil::uniform_matrix(d.n_params(), 1, rng, -0.5, 0.5).col(0);
    const Eigen::VectorXd g = poisson_score(d, y, beta);
    for (int j = 0; j < d.n_params(); ++j) {
      const double h = 1e-5;
      Eigen::VectorXd bp = beta, bm = beta;
      bp[j] += h;
      bm[j] -= h;
      const double fd = (poisson_loglik(d, y, bp) - poisson_loglik(d, y, bm)) / (2 * h);
      CHECK(std::abs(fd - g[j]) <= 1e-6 * std::max(1.0, std::abs(g[j])));
    }
  }
}

TEST_CASE("accepted iterates never lower the likelihood") {
  const DesignMatrix di = builtin("di", 1);
  std::mt19937_64 rng(9);
  const Eigen::VectorXd y = testutil::uniform_matrix(96, 1, rng, 0, 3).col(0);
  const Eigen::VectorXd start = testutil::uniform_matrix(42, 1, rng, -3, 3).col(0);
  double prev = -std::numeric_limits<double>::infinity();
  for (int cap = 1; cap <= 12; ++cap) {
    GlmOptions o;
    o.max_iter = cap;
    const GlmFit f = fit_poisson_loglinear(di, y, start, o);
    CHECK(f.log_likelihood >= prev - 1e-9 * std::abs(prev));
    prev = f.log_likelihood;
  }
}

TEST_CASE("scaling the response leaves the signature unchanged") {
  const DesignMatrix di = builtin("di", 1);
  std::mt19937_64 rng(10);
  const Eigen::VectorXd y = testutil::uniform_matrix(96, 1, rng, 0, 3).col(0);
  const Eigen::VectorXd h1 = normalize_to_signature(fit_poisson_loglinear(di, y, Eigen::VectorXd::Zero(42)));
  const Eigen::VectorXd h2 = normalize_to_signature(fit_poisson_loglinear(di, 250.0 * y, Eigen::VectorXd::Zero(42)));
  CHECK((h1 - h2).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("warm start at the optimum converges immediately") {
  const DesignMatrix di = builtin("di", 1);
  std::mt19937_64 rng(14);
  const Eigen::VectorXd y = testutil::uniform_matrix(96, 1, rng, 0.5, 3).col(0);
  const GlmFit a = fit_poisson_loglinear(di, y, Eigen::VectorXd::Zero(42));
  const GlmFit b = fit_poisson_loglinear(di, y, a.beta);
  CHECK(b.converged);
  CHECK(b.iterations <= 1);
}

TEST_CASE("a vanishing level drives its parameter down without failing") {
  const DesignMatrix mono = builtin("mono", 1);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(96, 2.0);
  y.segment(32, 16).setZero();
  const GlmFit f = fit_poisson_loglinear(mono, y, Eigen::VectorXd::Zero(12));
  const Eigen::VectorXd h = normalize_to_signature(f);
  CHECK(h.allFinite());
  CHECK(h.segment(32, 16).maxCoeff() < 1e-6);
  CHECK(h.sum() == doctest::Approx(1.0));
}

TEST_CASE("normalization") {
  GlmFit f;
  f.fitted_mean = Eigen::Vector3d(2, 2, 6);
  const Eigen::VectorXd h = normalize_to_signature(f);
  CHECK(h[0] == doctest::Approx(0.2));
  CHECK(h[2] == doctest::Approx(0.6));
}

TEST_CASE("input validation") {
  const DesignMatrix mono = builtin("mono", 1);
  CHECK_THROWS_AS(fit_poisson_loglinear(mono, Eigen::VectorXd::Zero(96), Eigen::VectorXd::Zero(12)),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_poisson_loglinear(mono, Eigen::VectorXd::Ones(95), Eigen::VectorXd::Zero(12)),
                  std::invalid_argument);
  Eigen::VectorXd neg = Eigen::VectorXd::Ones(96);
  neg[3] = -1;
  CHECK_THROWS_AS(fit_poisson_loglinear(mono, neg, Eigen::VectorXd::Zero(12)), std::invalid_argument);
  CHECK_THROWS_AS(DesignMatrix::from_matrix(Eigen::MatrixXd::Ones(4, 2)), std::logic_error);
}
