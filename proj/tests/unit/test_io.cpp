#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "signet/io.hpp"

using namespace signet;

namespace {

CountMatrix random_counts(int n, int flanks, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const MutationSpace s(flanks);
  CountMatrix V{testutil::poisson_counts(testutil::uniform_matrix(n, static_cast<Eigen::Index>(s.size()), rng, 0, 8), rng),
                {},
                s};
  for (int i = 0; i < n; ++i) V.sample_ids.push_back("P" + std::to_string(i + 1));
  return V;
}

std::string to_csv(const CountMatrix& V) {
  std::ostringstream os;
  write_counts(V, os);
  return os.str();
}

CountMatrix from_string(const std::string& s, LoadOptions o = {}) {
  std::istringstream is(s);
  return read_counts(is, o);
}

// Rewrites a table with its type columns in the given order.
std::string reorder(const CountMatrix& V, const std::vector<std::size_t>& perm, char sep = ',',
                    bool purine = false) {
  std::ostringstream os;
  os << "id";
  for (auto t : perm) {
    std::string l = V.space.label(t);
    if (purine) {
      const MutationType m = V.space.type_at(t);
      l = reverse_complement(m.right) + "[" + complement(m.ref()) + ">" + complement(m.alt()) + "]" +
          reverse_complement(m.left);
    }
    os << sep << l;
  }
  os << '\n';
  for (Eigen::Index n = 0; n < V.n_samples(); ++n) {
    os << V.sample_ids[static_cast<std::size_t>(n)];
    for (auto t : perm) os << sep << V.counts(n, static_cast<Eigen::Index>(t));
    os << '\n';
  }
  return os.str();
}

}  // namespace

TEST_CASE("write then read is the identity") {
  for (int flanks = 0; flanks <= 2; ++flanks) {
    const CountMatrix V = random_counts(4, flanks, 10 + static_cast<std::uint64_t>(flanks));
    const CountMatrix back = from_string(to_csv(V));
    CHECK(back.counts == V.counts);
    CHECK(back.sample_ids == V.sample_ids);
    CHECK(back.space == V.space);
    CHECK(to_csv(back) == to_csv(V));
  }
}

TEST_CASE("column order in the file does not matter") {
  const CountMatrix V = random_counts(3, 1, 7);
  std::vector<std::size_t> perm(96);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(1));
  CHECK(from_string(reorder(V, perm)).counts == V.counts);
  CHECK(from_string(reorder(V, perm, '\t')).counts == V.counts);
  CHECK(from_string(reorder(V, perm, ',', true)).counts == V.counts);
}

TEST_CASE("fits do not depend on the file's column order") {
  const CountMatrix V = random_counts(5, 1, 8);
  std::vector<std::size_t> perm(96);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  const CountMatrix U = from_string(reorder(V, perm));
  FitConfig cfg = FitConfig::uniform(2, SignatureModel::parse("di", V.space));
  cfg.n_starts = 3;
  cfg.start_iters = 10;
  const auto a = fit(V, cfg), b = fit(U, cfg);
  CHECK(a.loglik == b.loglik);
  CHECK(a.gkl == b.gkl);
}

TEST_CASE("format errors") {
  const CountMatrix V = random_counts(2, 1, 9);
  std::string good = to_csv(V);
  SUBCASE("unknown label") {
    std::string s = good;
    s.replace(s.find("A[C>A]A"), 7, "A[C>X]A");
    CHECK_THROWS_AS(from_string(s), std::invalid_argument);
  }
  SUBCASE("duplicate after canonicalization") {
    std::string s = good;
    s.replace(s.find("A[C>A]A"), 7, "G[G>T]T");  // reverse complement of A[C>A]C
    CHECK_THROWS_WITH_AS(from_string(s), doctest::Contains("duplicate"), std::invalid_argument);
  }
  SUBCASE("missing type: strict rejects, lenient zero-fills") {
    std::vector<std::size_t> perm;
    for (std::size_t t = 1; t < 96; ++t) perm.push_back(t);
    const std::string s = reorder(V, perm);
    CHECK_THROWS_WITH_AS(from_string(s), doctest::Contains("missing"), std::invalid_argument);
    LoadOptions lenient;
    lenient.lenient = true;
    const CountMatrix L = from_string(s, lenient);
    CHECK(L.counts.col(0).isZero());
    CHECK(L.counts.rightCols(95) == V.counts.rightCols(95));
  }
  SUBCASE("bad entries") {
    const auto first_row = good.find('\n') + 1;
    const auto comma = good.find(',', first_row);
    for (const char* bad : {"-1", "2.5", "abc", "", "nan"}) {
      std::string s = good;
      const auto end = s.find(',', comma + 1);
      s.replace(comma + 1, end - comma - 1, bad);
      CAPTURE(bad);
      CHECK_THROWS_WITH_AS(from_string(s), doctest::Contains("line 2"), std::invalid_argument);
    }
    std::string s = good;
    s.replace(comma + 1, s.find(',', comma + 1) - comma - 1, "3.0");
    CHECK_NOTHROW(from_string(s));
  }
  SUBCASE("ragged rows") {
    std::string s = good;
    s.insert(s.find('\n', s.find('\n') + 1), ",7");
    CHECK_THROWS_AS(from_string(s), std::invalid_argument);
  }
  SUBCASE("mixed flank widths") {
    std::string s = good;
    s.replace(s.find("A[C>A]C"), 7, "AA[C>A]CC");
    CHECK_THROWS_AS(from_string(s), std::invalid_argument);
  }
  CHECK_THROWS_AS(from_string(""), std::invalid_argument);
  CHECK_THROWS_AS(from_string(good.substr(0, good.find('\n') + 1)), std::invalid_argument);
  CHECK_THROWS_AS(load_counts("/nonexistent/file.csv"), std::invalid_argument);
}

TEST_CASE("BRCA21 fixture") {
  const CountMatrix V = load_counts(std::string(SIGNET_TEST_DATA) + "/BRCA21.csv");
  CHECK(V.n_samples() == 21);
  CHECK(V.n_types() == 96);
  CHECK(V.total() == 183916);
  CHECK(V.sample_ids.front() == "PD3851a");
}

TEST_CASE("fit documents round-trip") {
  const CountMatrix V = random_counts(6, 1, 11);
  FitConfig cfg;
  cfg.k = 2;
  cfg.models = {SignatureModel::parse("mono", V.space), SignatureModel::unconstrained()};
  cfg.n_starts = 3;
  cfg.start_iters = 10;
  const auto f = fit(V, cfg);
  const auto doc = fit_to_json(f, V, cfg);
  const std::string text = doc.dump(1);
  CHECK(text == fit_to_json(f, V, cfg).dump(1));
  const StoredFit back = fit_from_json(nlohmann::json::parse(text));
  CHECK(back.fit.W == f.W);
  CHECK(back.fit.H == f.H);
  CHECK(back.sample_ids == V.sample_ids);
  CHECK(back.fit.models[0].name == f.models[0].name);
  CHECK(back.fit.models[1].parametric() == f.models[1].parametric());
  CHECK(*back.fit.betas[0] == *f.betas[0]);
  CHECK(back.fit.gkl == f.gkl);
  CHECK(doc["signatures"][0]["beta_labels"].size() == 12);
  CHECK(doc["types"][0] == "A[C>A]A");
  CHECK(doc["starts"].size() == 3);
  CHECK_THROWS_AS(fit_from_json(nlohmann::json::object()), std::invalid_argument);
}

TEST_CASE("report writers") {
  CHECK(format_fixed(1234.56789) == "1234.57");
  CHECK(format_fixed(std::numeric_limits<double>::quiet_NaN()) == "NA");

  DownsampleReport d;
  d.fractions = {0.01};
  d.entries = {{0.01, 0, 0, 0.5}, {0.01, 0, 1, std::nullopt}};
  std::ostringstream os;
  write_downsample_csv(d, {"a", "b"}, os);
  CHECK(os.str() == "fraction,replicate,sample,similarity\n0.01,0,a,0.5\n0.01,0,b,\n");

  BootstrapReport b;
  BootstrapReplicate rep;
  rep.replicate = 0;
  rep.matched = Eigen::Vector2d(0.99, 0.5);
  rep.permutation = {1, 0};
  b.replicates.push_back(rep);
  b.n_replicates = 1;
  std::ostringstream bs;
  write_bootstrap_csv(b, bs);
  CHECK(bs.str() == "replicate,signature,matched,similarity\n0,1,2,0.99\n0,2,1,0.5\n");
}
