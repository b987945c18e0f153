#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "signet/io.hpp"
#include "signet/selection.hpp"
#include "signet/stability.hpp"

namespace py = pybind11;
using namespace signet;

namespace {

CountMatrix as_counts(const Eigen::MatrixXd& counts, int flanks) {
  CountMatrix V{counts, {}, MutationSpace(flanks)};
  for (Eigen::Index n = 0; n < counts.rows(); ++n) V.sample_ids.push_back("s" + std::to_string(n + 1));
  V.validate();
  return V;
}

FitConfig make_config(const MutationSpace& space, int k, const std::vector<std::string>& models, int n_starts,
                      int start_iters, double tol, int max_iters, std::uint64_t seed, int threads) {
  if (models.size() != 1 && static_cast<int>(models.size()) != k)
    throw std::invalid_argument("models takes one entry or one per signature");
  FitConfig c;
  c.k = k;
  for (const auto& m : models) c.models.push_back(SignatureModel::parse(m, space));
  if (c.models.size() == 1) c.models.assign(static_cast<std::size_t>(k), c.models.front());
  c.n_starts = n_starts;
  c.start_iters = start_iters;
  c.tol = tol;
  c.max_iters = max_iters;
  c.seed = seed;
  c.threads = threads;
  return c;
}

struct PyFit {
  FittedFactorization fit;
  CountMatrix data;
  FitConfig config;

  std::vector<std::string> model_names() const {
    std::vector<std::string> out;
    for (const auto& m : fit.models) out.push_back(m.name);
    return out;
  }
};

}  // namespace

PYBIND11_MODULE(_signet, m) {
  m.doc() = "Poisson NMF with formula-constrained mutational signatures";
  m.attr("__version__") = SIGNET_VERSION;

  py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);

  m.def("mutation_labels", [](int flanks) { return MutationSpace(flanks).labels(); }, py::arg("flanks") = 1);

  m.def("normalize_formula", [](const std::string& f, int flanks) { return parse_formula(f, flanks).to_string(); },
        py::arg("formula"), py::arg("flanks") = 1);

  m.def(
      "design_matrix",
      [](const std::string& model, int flanks) {
        const auto sm = SignatureModel::parse(model, MutationSpace(flanks));
        if (!sm.parametric()) throw std::invalid_argument("an unconstrained signature has no design matrix");
        return py::make_tuple(sm.design->matrix(), sm.design->column_labels());
      },
      py::arg("model"), py::arg("flanks") = 1, "Design matrix and column labels of a builtin name or formula.");

  py::class_<CountMatrix>(m, "CountMatrix")
      .def_readonly("counts", &CountMatrix::counts)
      .def_readonly("sample_ids", &CountMatrix::sample_ids)
      .def_property_readonly("flanks", [](const CountMatrix& V) { return V.space.flanks(); })
      .def_property_readonly("labels", [](const CountMatrix& V) { return V.space.labels(); })
      .def("__repr__", [](const CountMatrix& V) {
        return "<CountMatrix " + std::to_string(V.n_samples()) + " x " + std::to_string(V.n_types()) + ">";
      });

  m.def(
      "load_counts",
      [](const std::string& path, bool lenient) {
        LoadOptions o;
        o.lenient = lenient;
        return load_counts(path, o);
      },
      py::arg("path"), py::arg("lenient") = false);

  py::class_<PyFit>(m, "Fit")
      .def_property_readonly("W", [](const PyFit& f) { return f.fit.W; })
      .def_property_readonly("H", [](const PyFit& f) { return f.fit.H; })
      .def_property_readonly("models", &PyFit::model_names)
      .def_property_readonly("loglik", [](const PyFit& f) { return f.fit.loglik; })
      .def_property_readonly("gkl", [](const PyFit& f) { return f.fit.gkl; })
      .def_property_readonly("converged", [](const PyFit& f) { return f.fit.converged; })
      .def_property_readonly("iterations", [](const PyFit& f) { return f.fit.iterations; })
      .def_property_readonly("signature_params", [](const PyFit& f) { return f.fit.signature_params; })
      .def_property_readonly("n_params", [](const PyFit& f) { return f.fit.n_params; })
      .def_property_readonly("betas",
                             [](const PyFit& f) {
                               py::list out;
                               for (const auto& b : f.fit.betas) out.append(b ? py::cast(*b) : py::none());
                               return out;
                             })
      .def("to_json", [](const PyFit& f) { return fit_to_json(f.fit, f.data, f.config).dump(1); });

  m.def(
      "fit",
      [](const Eigen::MatrixXd& counts, int k, const std::vector<std::string>& models, int flanks, int n_starts,
         int start_iters, double tol, int max_iters, std::uint64_t seed, int threads) {
        PyFit out;
        out.data = as_counts(counts, flanks);
        out.config = make_config(out.data.space, k, models, n_starts, start_iters, tol, max_iters, seed, threads);
        {
          py::gil_scoped_release release;
          out.fit = fit(out.data, out.config);
        }
        return out;
      },
      py::arg("counts"), py::arg("k"), py::arg("models"), py::arg("flanks") = 1, py::arg("n_starts") = 100,
      py::arg("start_iters") = 100, py::arg("tol") = 1e-8, py::arg("max_iters") = 10000, py::arg("seed") = 1,
      py::arg("threads") = 0);

  m.def("enumerate_mixtures",
        [](const std::vector<std::string>& options, int k) {
          std::vector<std::vector<std::string>> out;
          for (const auto& s : enumerate_mixtures(options, k)) out.push_back(s.parts());
          return out;
        },
        py::arg("options"), py::arg("k"));

  m.def("bic", &bic, py::arg("n_prm"), py::arg("n_obs"), py::arg("gkl"));

  m.def(
      "select",
      [](const Eigen::MatrixXd& counts, int k, const std::vector<std::string>& options, int flanks,
         const std::string& n_obs, int n_starts, int start_iters, double tol, std::uint64_t seed, int threads) {
        if (n_obs != "nonzero" && n_obs != "dense") throw std::invalid_argument("n_obs must be 'nonzero' or 'dense'");
        const CountMatrix V = as_counts(counts, flanks);
        FitConfig base;
        base.n_starts = n_starts;
        base.start_iters = start_iters;
        base.tol = tol;
        base.seed = seed;
        base.threads = threads;
        SelectionReport r;
        {
          py::gil_scoped_release release;
          r = run_selection(V, enumerate_mixtures(options, k), base,
                            n_obs == "dense" ? ObservationCount::dense : ObservationCount::nonzero);
        }
        py::list rows;
        for (std::size_t i = 0; i < r.rows.size(); ++i) {
          const auto& row = r.rows[i];
          py::dict d;
          d["models"] = row.spec.parts();
          d["n_prm"] = row.n_prm;
          d["penalty"] = row.penalty;
          d["gkl"] = row.gkl;
          d["bic"] = row.bic;
          d["delta_bic"] = row.delta_bic;
          d["converged"] = row.converged;
          d["best"] = static_cast<int>(i) == r.best;
          d["error"] = row.error ? py::cast(*row.error) : py::none();
          rows.append(d);
        }
        return rows;
      },
      py::arg("counts"), py::arg("k"), py::arg("options") = std::vector<std::string>{"mono", "di", "tri"},
      py::arg("flanks") = 1, py::arg("n_obs") = "nonzero", py::arg("n_starts") = 100, py::arg("start_iters") = 100,
      py::arg("tol") = 1e-8, py::arg("seed") = 1, py::arg("threads") = 0,
      "Fits every mixture of k parametrizations and returns one dict per spec, sorted by n_prm.");

  m.def("simulate_counts", &simulate_counts, py::arg("W"), py::arg("H"), py::arg("seed"));
  m.def("downsample_counts", &downsample_counts, py::arg("counts"), py::arg("fraction"), py::arg("seed"));
  m.def("cosine_similarity", &cosine_similarity, py::arg("a"), py::arg("b"));
  m.def(
      "match_signatures",
      [](const Eigen::MatrixXd& ref, const Eigen::MatrixXd& other) {
        const auto r = match_signatures(ref, other);
        return py::make_tuple(r.permutation, r.similarity);
      },
      py::arg("reference"), py::arg("other"));

  m.def(
      "bootstrap",
      [](const PyFit& f, int reps, int n_starts, int start_iters, std::uint64_t seed, int threads) {
        ResampleConfig rc;
        rc.n_starts = n_starts;
        rc.start_iters = start_iters;
        rc.seed = seed;
        rc.threads = threads;
        BootstrapReport r;
        {
          py::gil_scoped_release release;
          r = parametric_bootstrap(f.fit, f.data.space, reps, rc);
        }
        const auto K = f.fit.H.rows();
        Eigen::MatrixXd matched = Eigen::MatrixXd::Constant(reps, K, std::numeric_limits<double>::quiet_NaN());
        for (const auto& rep : r.replicates)
          if (!rep.error) matched.row(rep.replicate) = rep.matched.transpose();
        return matched;
      },
      py::arg("fit"), py::arg("reps") = 50, py::arg("n_starts") = 20, py::arg("start_iters") = 100,
      py::arg("seed") = 1, py::arg("threads") = 0,
      "Matched cosine similarities, one row per replicate (NaN for failed replicates).");

  m.def(
      "exposure_recovery",
      [](const Eigen::MatrixXd& counts, const Eigen::MatrixXd& W, const Eigen::MatrixXd& H,
         const std::vector<double>& fractions, int reps, std::uint64_t seed, int threads) {
        DownsampleReport r;
        {
          py::gil_scoped_release release;
          r = exposure_recovery(counts, W, H, fractions, reps, seed, threads);
        }
        py::dict out;
        for (double fr : fractions) {
          Eigen::MatrixXd s = Eigen::MatrixXd::Constant(reps, counts.rows(), std::numeric_limits<double>::quiet_NaN());
          for (const auto& e : r.entries)
            if (e.fraction == fr && e.similarity) s(e.replicate, e.sample) = *e.similarity;
          out[py::float_(fr)] = s;
        }
        return out;
      },
      py::arg("counts"), py::arg("W"), py::arg("H"), py::arg("fractions") = std::vector<double>{0.01, 0.02, 0.05},
      py::arg("reps") = 50, py::arg("seed") = 1, py::arg("threads") = 0,
      "Per fraction, a replicates x samples array of exposure cosine similarities (NaN when a sample is empty).");
}
