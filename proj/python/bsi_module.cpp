#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bsi/beam.hpp"
#include "bsi/inference.hpp"
#include "bsi/kernels.hpp"
#include "bsi/likelihood.hpp"
#include "bsi/models.hpp"
#include "bsi/structured.hpp"
#include "bsi/study.hpp"

namespace py = pybind11;
using namespace bsi;

PYBIND11_MODULE(_bsi, m) {
  m.doc() =
      "Bayesian system identification with spatially and temporally correlated "
      "model-prediction error: structured Gaussian likelihoods, a twin-girder "
      "beam model and nested-sampling evidence estimation.";

  py::enum_<KernelKind>(m, "KernelKind")
      .value("IID", KernelKind::IID)
      .value("RBF", KernelKind::RBF)
      .value("EXP", KernelKind::EXP);

  py::enum_<ErrorStructure>(m, "ErrorStructure")
      .value("Multiplicative", ErrorStructure::Multiplicative)
      .value("Additive", ErrorStructure::Additive);

  py::enum_<Lane>(m, "Lane").value("Left", Lane::Left).value("Right", Lane::Right);

  py::class_<SpaceTimeGrid>(m, "SpaceTimeGrid")
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("x_coords"),
           py::arg("t_coords"))
      .def_property_readonly("x_coords", &SpaceTimeGrid::x_coords)
      .def_property_readonly("t_coords", &SpaceTimeGrid::t_coords)
      .def_property_readonly("n_x", &SpaceTimeGrid::n_x)
      .def_property_readonly("n_t", &SpaceTimeGrid::n_t)
      .def("__len__", &SpaceTimeGrid::size);

  m.def("eval_kernel", &eval_kernel, py::arg("kind"), py::arg("a"), py::arg("b"),
        py::arg("l_corr"));
  m.def("correlation_matrix", &correlation_matrix, py::arg("kind"), py::arg("coords"),
        py::arg("l_corr"));

  py::class_<SymTridiagonal>(m, "SymTridiagonal")
      .def(py::init([](Eigen::VectorXd d, Eigen::VectorXd c) {
             if (c.size() + 1 != d.size()) {
               throw std::invalid_argument("need len(c) = len(d) - 1");
             }
             return SymTridiagonal{std::move(d), std::move(c)};
           }),
           py::arg("d"), py::arg("c"))
      .def_readonly("d", &SymTridiagonal::d)
      .def_readonly("c", &SymTridiagonal::c)
      .def("dense", &SymTridiagonal::dense);

  m.def(
      "exp_kernel_precision",
      [](const std::vector<double>& t, const std::vector<double>& scale, double l) {
        return exp_kernel_precision(t, scale, l);
      },
      py::arg("t_coords"), py::arg("scale"), py::arg("l_corr"));
  m.def(
      "exp_kernel_cov_logdet",
      [](const std::vector<double>& t, const std::vector<double>& scale, double l) {
        return exp_kernel_cov_logdet(t, scale, l);
      },
      py::arg("t_coords"), py::arg("scale"), py::arg("l_corr"));
  m.def("thomas_solve", &thomas_solve, py::arg("tridiagonal"), py::arg("rhs"));
  m.def("kron_logdet", &kron_logdet, py::arg("logdet_a"), py::arg("dim_a"),
        py::arg("logdet_b"), py::arg("dim_b"));
  m.def("kron_matvec", &kron_matvec, py::arg("a"), py::arg("b"), py::arg("v"));
  m.def(
      "separable_correlation",
      [](KernelKind kt, KernelKind kx, const SpaceTimeGrid& g, double lt, double lx) {
        return separable_correlation(kt, kx, g, lt, lx);
      },
      py::arg("kt"), py::arg("kx"), py::arg("grid"), py::arg("l_corr_t"), py::arg("l_corr_x"));

  py::class_<ProbModelSpec>(m, "ProbModelSpec")
      .def(py::init<>())
      .def_readwrite("error_structure", &ProbModelSpec::error_structure)
      .def_readwrite("kt", &ProbModelSpec::kt)
      .def_readwrite("kx", &ProbModelSpec::kx)
      .def_readwrite("c_v", &ProbModelSpec::c_v)
      .def_readwrite("sigma_model", &ProbModelSpec::sigma_model)
      .def_readwrite("sigma_meas", &ProbModelSpec::sigma_meas)
      .def_readwrite("l_corr_t", &ProbModelSpec::l_corr_t)
      .def_readwrite("l_corr_x", &ProbModelSpec::l_corr_x);

  m.def("build_covariance_dense", &build_covariance_dense, py::arg("spec"), py::arg("grid"),
        py::arg("y_model"), py::arg("dense_cap") = kDenseCapDefault);
  m.def("loglik_dense", &loglik_dense, py::arg("y_obs"), py::arg("y_model"), py::arg("sigma"));
  m.def("loglik_multiplicative_fast", &loglik_multiplicative_fast, py::arg("y_obs"),
        py::arg("y_model"), py::arg("spec"), py::arg("grid"));
  m.def("loglik_additive_fast", &loglik_additive_fast, py::arg("y_obs"), py::arg("y_model"),
        py::arg("spec"), py::arg("grid"));
  m.def(
      "loglik",
      [](const Eigen::VectorXd& y_obs, const Eigen::VectorXd& y_model,
         const ProbModelSpec& spec, const SpaceTimeGrid& grid, std::size_t cap) {
        const auto res = loglik(y_obs, y_model, spec, grid, cap);
        return py::make_tuple(res.value, to_string(res.path));
      },
      py::arg("y_obs"), py::arg("y_model"), py::arg("spec"), py::arg("grid"),
      py::arg("dense_cap") = kDenseCapDefault);

  py::class_<SectionZone>(m, "SectionZone")
      .def(py::init<>())
      .def_readwrite("until_x_m", &SectionZone::until_x_m)
      .def_readwrite("youngs_modulus_pa", &SectionZone::youngs_modulus_pa)
      .def_readwrite("second_moment_m4", &SectionZone::second_moment_m4)
      .def_readwrite("bottom_fiber_m", &SectionZone::bottom_fiber_m);

  py::class_<BeamGeometry>(m, "BeamGeometry")
      .def(py::init<>())
      .def_readwrite("span_lengths_m", &BeamGeometry::span_lengths_m)
      .def_readwrite("sections", &BeamGeometry::sections)
      .def_readwrite("max_element_length_m", &BeamGeometry::max_element_length_m)
      .def_readwrite("coupling_spacing_m", &BeamGeometry::coupling_spacing_m)
      .def_readwrite("girder_spacing_m", &BeamGeometry::girder_spacing_m)
      .def_readwrite("deck_width_m", &BeamGeometry::deck_width_m)
      .def("total_length_m", &BeamGeometry::total_length_m);

  py::class_<ThetaS>(m, "ThetaS")
      .def(py::init<>())
      .def_readwrite("log10_kr", &ThetaS::log10_kr)
      .def_readwrite("log10_kv", &ThetaS::log10_kv);

  py::class_<TruckLoad>(m, "TruckLoad")
      .def(py::init<>())
      .def_readwrite("axle_offsets_m", &TruckLoad::axle_offsets_m)
      .def_readwrite("axle_loads_kn", &TruckLoad::axle_loads_kn)
      .def_readwrite("lane", &TruckLoad::lane)
      .def_readwrite("z_m", &TruckLoad::z_m)
      .def_static("default_truck", &TruckLoad::default_truck, py::arg("lane"),
                  py::arg("geometry"));

  m.def("lateral_load_function", &lateral_load_function, py::arg("z"), py::arg("geometry"));

  py::class_<TwinGirderModel>(m, "TwinGirderModel")
      .def(py::init<BeamGeometry>(), py::arg("geometry"))
      .def_property_readonly("node_positions", &TwinGirderModel::node_positions)
      .def("influence_line", &TwinGirderModel::influence_line, py::arg("theta"),
           py::arg("truck"), py::arg("sensor_x"), py::arg("load_positions"))
      .def("response_grid", &TwinGirderModel::response_grid, py::arg("theta"),
           py::arg("trucks"), py::arg("grid"));

  py::class_<PriorBox>(m, "PriorBox")
      .def(py::init<>())
      .def_readwrite("names", &PriorBox::names)
      .def_readwrite("lower", &PriorBox::lower)
      .def_readwrite("upper", &PriorBox::upper)
      .def("transform", &PriorBox::transform, py::arg("u"));

  py::class_<NestedConfig>(m, "NestedConfig")
      .def(py::init<>())
      .def_readwrite("n_live", &NestedConfig::n_live)
      .def_readwrite("dlogz", &NestedConfig::dlogz)
      .def_readwrite("walk_steps", &NestedConfig::walk_steps)
      .def_readwrite("seed", &NestedConfig::seed)
      .def_readwrite("max_iterations", &NestedConfig::max_iterations);

  py::class_<NestedSample>(m, "NestedSample")
      .def_readonly("theta", &NestedSample::theta)
      .def_readonly("loglik", &NestedSample::loglik)
      .def_readonly("logweight", &NestedSample::logweight);

  py::class_<NestedRun>(m, "NestedRun")
      .def_readonly("samples", &NestedRun::samples)
      .def_readonly("logz", &NestedRun::logz)
      .def_readonly("logz_err", &NestedRun::logz_err)
      .def_readonly("information", &NestedRun::information)
      .def_readonly("nfe", &NestedRun::nfe)
      .def_readonly("n_live", &NestedRun::n_live)
      .def_readonly("termination", &NestedRun::termination);

  m.def("nested_sample", &nested_sample, py::arg("loglik"), py::arg("prior_box"),
        py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("model_posteriors", &model_posteriors, py::arg("logz"), py::arg("prior_probs"));
  m.def(
      "bayes_factor",
      [](double z1, double z2, double p1, double p2) {
        const auto bf = bayes_factor(z1, z2, p1, p2);
        return py::make_tuple(bf.ratio, bf.jeffreys);
      },
      py::arg("logz_1"), py::arg("logz_2"), py::arg("prior_1") = 0.5, py::arg("prior_2") = 0.5);
  m.def("map_estimate", &map_estimate, py::arg("run"));
  m.def("posterior_mean", &posterior_mean, py::arg("run"));
  m.def("hd_interval", &hd_interval, py::arg("values"), py::arg("weights"),
        py::arg("mass") = 0.9);

  m.def("make_sensor_grid", &make_sensor_grid, py::arg("n_x_per_span"), py::arg("n_t"),
        py::arg("geometry"));
  m.def(
      "sample_synthetic",
      [](const ProbModelSpec& spec, const SpaceTimeGrid& grid, const Eigen::VectorXd& y,
         std::uint64_t seed) { return sample_synthetic(spec, grid, y, seed); },
      py::arg("spec"), py::arg("grid"), py::arg("y_model"), py::arg("seed"));
}
