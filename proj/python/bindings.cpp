#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mcuos/config.hpp"
#include "mcuos/datagen.hpp"
#include "mcuos/errors.hpp"
#include "mcuos/evaluation.hpp"
#include "mcuos/experiment.hpp"
#include "mcuos/geometry.hpp"
#include "mcuos/kernel.hpp"
#include "mcuos/kernel_learning.hpp"
#include "mcuos/linear.hpp"
#include "mcuos/missing.hpp"
#include "mcuos/observed.hpp"
#include "mcuos/preimage.hpp"

namespace py = pybind11;
using namespace mcuos;

namespace {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
using BoolVector = Eigen::Matrix<bool, Eigen::Dynamic, 1>;

std::vector<int> omega_of(const Eigen::Ref<const BoolVector>& mask) {
  std::vector<int> out;
  for (Eigen::Index u = 0; u < mask.size(); ++u)
    if (mask(u)) out.push_back(static_cast<int>(u));
  return out;
}

// Columns of `data` seen where `mask` is true; no mask means fully observed.
std::vector<ObservedSignal> signals_of(const Eigen::MatrixXd& data, const std::optional<BoolMatrix>& mask) {
  if (!mask) return observe_all(data);
  if (mask->rows() != data.rows() || mask->cols() != data.cols())
    fail(ErrorCode::ShapeMismatch, "mask must have the shape of the data");
  std::vector<std::vector<int>> masks;
  for (Eigen::Index i = 0; i < data.cols(); ++i) masks.push_back(omega_of(mask->col(i)));
  return observe(data, masks);
}

ObservedSignal signal_of(const Eigen::VectorXd& z, const std::optional<BoolVector>& mask) {
  if (!mask) return ObservedSignal::complete(z);
  if (mask->size() != z.size()) fail(ErrorCode::ShapeMismatch, "mask must have the length of the signal");
  return ObservedSignal::from_full(z, omega_of(*mask));
}

KernelSpec kernel_of(const std::string& kind, double c, int d) {
  if (kind == "gaussian") return KernelSpec::gaussian(c);
  if (kind == "polynomial") return KernelSpec::polynomial(c, d);
  fail(ErrorCode::InvalidArgument, "kernel must be 'gaussian' or 'polynomial'");
}

py::dict model_dict(const McUosModel& model) {
  py::dict out;
  out["bases"] = bases_of(model.subspaces);
  out["mean"] = model.mean;
  out["assignments"] = model.assignments;
  out["objective"] = model.objective;
  return out;
}

py::dict dataset_dict(const Dataset& d) {
  py::dict out;
  out["clean"] = d.clean;
  out["noisy"] = d.noisy;
  out["labels"] = d.labels;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Learning unions of subspaces from complete and partially observed data";

  static py::exception<Error> error_type(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object cls = py::reinterpret_borrow<py::object>(error_type);
      py::object exc = cls(std::string(to_string(e.code())) + ": " + e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("subspace_distance", py::overload_cast<const Eigen::MatrixXd&, const Eigen::MatrixXd&>(&subspace_distance),
        py::arg("a"), py::arg("b"), "Distance between the spans of two orthonormal bases.");

  m.def(
      "average_distance",
      [](const std::vector<Eigen::MatrixXd>& learned, const std::vector<Eigen::MatrixXd>& truth) {
        return match_subspaces(subspaces_of(learned), subspaces_of(truth)).d_avg;
      },
      py::arg("learned"), py::arg("truth"), "Mean normalized distance after greedy matching.");

  m.def("estimate_dimension", &estimate_dimension, py::arg("points"), py::arg("k1") = 6, py::arg("k2") = 10);

  m.def("clustering_error", &clustering_error, py::arg("assignments"), py::arg("labels"), py::arg("L"),
        "Percentage of misassigned points under the best label matching.");

  m.def(
      "generate_synthetic",
      [](int dim, int s, int L, double t_s, std::vector<int> cluster_sizes, double sigma_tr_sq, double sigma_te_sq,
         std::uint64_t seed) {
        SyntheticSpec spec;
        spec.m = dim;
        spec.s = s;
        spec.L = L;
        spec.t_s = t_s;
        spec.cluster_sizes = std::move(cluster_sizes);
        spec.sigma_tr_sq = sigma_tr_sq;
        spec.sigma_te_sq = sigma_te_sq;
        spec.rng_seed = seed;
        const SyntheticPair pair = generate_synthetic(spec);
        py::dict out;
        out["train"] = dataset_dict(pair.train);
        out["test"] = dataset_dict(pair.test);
        out["truth"] = bases_of(pair.train.truth);
        return out;
      },
      py::arg("m") = 180, py::arg("s") = 13, py::arg("L") = 5, py::arg("t_s") = 0.04,
      py::arg("cluster_sizes") = std::vector<int>{150, 100, 150, 100, 150}, py::arg("sigma_tr_sq") = 0.1,
      py::arg("sigma_te_sq") = 0.1, py::arg("seed") = 0);

  m.def(
      "micusal",
      [](const Eigen::MatrixXd& data, int L, int s, double lam, int restarts, int max_outer_iters, double rel_tol,
         std::uint64_t seed) {
        MicusalParams p;
        p.L = L;
        p.s = s;
        p.lambda = lam;
        p.restarts = restarts;
        p.max_outer_iters = max_outer_iters;
        p.rel_tol = rel_tol;
        p.rng_seed = seed;
        McUosModel model;
        {
          py::gil_scoped_release release;
          model = micusal(data, p);
        }
        return model_dict(model);
      },
      py::arg("data"), py::arg("L"), py::arg("s"), py::arg("lam") = 2.0, py::arg("restarts") = 1,
      py::arg("max_outer_iters") = 100, py::arg("rel_tol") = 1e-6, py::arg("seed") = 0,
      "Union of L s-dimensional subspaces fitted to the columns of data.");

  m.def(
      "amicusal",
      [](const Eigen::MatrixXd& data, int L_max, int s_max, double lam, int k1, int k2, double eps_min, int restarts,
         std::uint64_t seed) {
        AmicusalParams p;
        p.L_max = L_max;
        p.s_max = s_max;
        p.lambda = lam;
        p.k1 = k1;
        p.k2 = k2;
        p.eps_min = eps_min;
        p.restarts = restarts;
        p.rng_seed = seed;
        McUosModel model;
        {
          py::gil_scoped_release release;
          model = amicusal(data, p);
        }
        return model_dict(model);
      },
      py::arg("data"), py::arg("L_max") = 8, py::arg("s_max") = 20, py::arg("lam") = 2.0, py::arg("k1") = 6,
      py::arg("k2") = 10, py::arg("eps_min") = 0.0, py::arg("restarts") = 1, py::arg("seed") = 0,
      "Like micusal, estimating the number and dimension of the subspaces.");

  m.def(
      "rmicusal",
      [](const Eigen::MatrixXd& data, const std::optional<BoolMatrix>& mask, int L, int s, double lam, double eta,
         int inner_iters, int max_outer_iters, int restarts, std::uint64_t seed) {
        RmicusalParams p;
        p.L = L;
        p.s = s;
        p.lambda = lam;
        p.eta = eta;
        p.inner_iters = inner_iters;
        p.max_outer_iters = max_outer_iters;
        p.restarts = restarts;
        p.rng_seed = seed;
        const auto signals = signals_of(data, mask);
        McUosModel model;
        {
          py::gil_scoped_release release;
          model = rmicusal(signals, p);
        }
        return model_dict(model);
      },
      py::arg("data"), py::arg("mask") = py::none(), py::arg("L") = 1, py::arg("s") = 1, py::arg("lam") = 2.0,
      py::arg("eta") = 0.5, py::arg("inner_iters") = 100, py::arg("max_outer_iters") = 50, py::arg("restarts") = 1,
      py::arg("seed") = 0, "Subspace learning from the entries of data where mask is true.");

  py::class_<KernelModel>(m, "KernelModel")
      .def_readonly("assignments", &KernelModel::assignments)
      .def_readonly("clusters", &KernelModel::clusters)
      .def_readonly("coefficients", &KernelModel::coefficients)
      .def_readonly("objective", &KernelModel::objective)
      .def_readonly("psd_repaired", &KernelModel::psd_repaired)
      .def_property_readonly("L", &KernelModel::subspace_count)
      .def(
          "assign",
          [](const KernelModel& model, const Eigen::VectorXd& y, const std::optional<BoolVector>& mask) {
            return kernel_assign(model, signal_of(y, mask));
          },
          py::arg("y"), py::arg("mask") = py::none())
      .def(
          "preimage",
          [](const KernelModel& model, const Eigen::VectorXd& z, const std::optional<BoolVector>& mask) {
            return preimage(model, signal_of(z, mask));
          },
          py::arg("z"), py::arg("mask") = py::none(),
          "Signal whose feature image best matches the projection of z onto its nearest subspace.");

  m.def(
      "mckusal",
      [](const Eigen::MatrixXd& data, const std::optional<BoolMatrix>& mask, const std::string& kernel, double c,
         int d, int L, int s, double lam, std::uint64_t seed) {
        KernelParams p;
        p.L = L;
        p.s = s;
        p.lambda = lam;
        p.rng_seed = seed;
        const KernelSpec spec = kernel_of(kernel, c, d);
        py::gil_scoped_release release;
        if (mask) return rmckusal(signals_of(data, mask), spec, p);
        return mckusal(data, spec, p);
      },
      py::arg("data"), py::arg("mask") = py::none(), py::arg("kernel") = "gaussian", py::arg("c") = 4.0,
      py::arg("d") = 1, py::arg("L") = 2, py::arg("s") = 1, py::arg("lam") = 2.0, py::arg("seed") = 0,
      "Union of subspaces in a kernel feature space; partial data when a mask is given.");

  m.def(
      "kernel_estimate",
      [](const Eigen::VectorXd& a, const BoolVector& mask_a, const Eigen::VectorXd& b, const BoolVector& mask_b,
         const std::string& kernel, double c, int d) {
        return estimate_kernel_missing(kernel_of(kernel, c, d), signal_of(a, mask_a), signal_of(b, mask_b));
      },
      py::arg("a"), py::arg("mask_a"), py::arg("b"), py::arg("mask_b"), py::arg("kernel") = "gaussian",
      py::arg("c") = 4.0, py::arg("d") = 1, "Kernel value estimated from the shared observed coordinates.");

  m.def(
      "run_config",
      [](const std::string& text) {
        const ExperimentConfig config = parse_config(text);
        std::vector<ResultRecord> records;
        {
          py::gil_scoped_release release;
          records = run_experiment(config);
        }
        py::list out;
        for (const auto& r : records) {
          py::dict row;
          row["run_id"] = r.run_id;
          row["method"] = r.method;
          row["metric"] = r.metric;
          row["lambda"] = r.lambda;
          row["L"] = r.L;
          row["s"] = r.s;
          row["missing_frac"] = r.missing_frac;
          row["sigma_tr_sq"] = r.sigma_tr_sq;
          row["sigma_te_sq"] = r.sigma_te_sq;
          row["seed"] = r.seed;
          row["trial"] = r.trial == kAggregateTrial ? py::object(py::none()) : py::int_(r.trial);
          row["value"] = r.value;
          out.append(std::move(row));
        }
        return out;
      },
      py::arg("text"), "Runs an INI experiment description and returns its result rows.");
}
