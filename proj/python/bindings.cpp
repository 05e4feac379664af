// Copyright 2026 The gpsindy Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <optional>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gpsindy/errors.hpp"
#include "gpsindy/experiment.hpp"
#include "gpsindy/features.hpp"
#include "gpsindy/gp.hpp"
#include "gpsindy/kernels.hpp"
#include "gpsindy/metrics.hpp"
#include "gpsindy/mfgp.hpp"
#include "gpsindy/pipeline.hpp"
#include "gpsindy/simdata.hpp"
#include "gpsindy/sparse.hpp"

namespace py = pybind11;
using namespace gpsindy;

namespace {

py::tuple field_tuple(const PosteriorField& f) {
  if (f.variance.size() == 0) return py::make_tuple(f.mean, py::none());
  return py::make_tuple(f.mean, f.variance);
}

PredictionGrid make_grid(const Dataset& data, const std::optional<Eigen::MatrixXd>& points) {
  if (points) return PredictionGrid::from_points(*points);
  if (data.grid) return PredictionGrid::from_grid(*data.grid);
  return PredictionGrid::from_points(data.inputs);
}

Dataset make_dataset(Eigen::MatrixXd inputs, Eigen::MatrixXd values, std::vector<std::string> input_names,
                     std::vector<std::string> channel_names) {
  Dataset d;
  d.inputs = std::move(inputs);
  d.values = std::move(values);
  if (input_names.empty())
    for (int i = 0; i < d.inputs.rows(); ++i) input_names.push_back(i == 0 ? "t" : "x" + std::to_string(i));
  if (channel_names.empty())
    for (int i = 0; i < d.values.cols(); ++i) channel_names.push_back("u" + std::to_string(i));
  d.input_names = std::move(input_names);
  d.channel_names = std::move(channel_names);
  d.grid = detect_grid(d.inputs);
  d.validate();
  return d;
}

py::dict run_dict(const RunRecord& r) {
  py::dict d;
  d["sigma_nr"] = r.noise_ratio;
  d["seed"] = r.seed;
  d["status"] = r.status;
  d["message"] = r.message;
  d["e_inf"] = r.e_inf;
  d["e_2"] = r.e_2;
  d["tpr"] = r.tpr;
  d["runtime_s"] = r.runtime_seconds;
  d["coefficients"] = r.coefficients;
  return d;
}

}  // namespace

PYBIND11_MODULE(_gpsindy, m) {
  m.doc() = "Sparse equation discovery with GP and multi-fidelity GP surrogates";

  static py::exception<Error> error_type(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      exc.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<SeHyperparams>(m, "SeHyperparams")
      .def(py::init<double, Eigen::VectorXd>(), py::arg("amplitude"), py::arg("lengthscales"))
      .def_readwrite("amplitude", &SeHyperparams::amplitude)
      .def_readwrite("lengthscales", &SeHyperparams::lengthscales);

  m.def("se_eval", [](const Eigen::VectorXd& x, const Eigen::VectorXd& xp, const SeHyperparams& t) {
    return se_eval(x, xp, t);
  });
  m.def("nlml", &nlml, py::arg("theta"), py::arg("noise_variance"), py::arg("x"), py::arg("y"));
  m.def("nlml_grad", &nlml_grad, py::arg("theta"), py::arg("noise_variance"), py::arg("x"), py::arg("y"));

  py::class_<GpConfig>(m, "GpConfig")
      .def(py::init<>())
      .def_readwrite("restarts", &GpConfig::restarts)
      .def_readwrite("seed", &GpConfig::seed)
      .def_readwrite("init_low", &GpConfig::init_low)
      .def_readwrite("init_high", &GpConfig::init_high)
      .def_readwrite("train_cap", &GpConfig::train_cap)
      .def_readwrite("condition_on_full", &GpConfig::condition_on_full)
      .def_readwrite("standardize", &GpConfig::standardize)
      .def_readwrite("noise_floor", &GpConfig::noise_floor)
      .def_readwrite("use_kronecker", &GpConfig::use_kronecker)
      .def_property(
          "iterations", [](const GpConfig& c) { return c.rprop.iterations; },
          [](GpConfig& c, int v) { c.rprop.iterations = v; });

  py::class_<GpModel>(m, "GpModel")
      .def_property_readonly("hyperparams", &GpModel::hyperparams)
      .def_property_readonly("noise_variance", &GpModel::noise_variance)
      .def_property_readonly("nlml", &GpModel::nlml_value)
      .def_property_readonly("size", &GpModel::size)
      .def(
          "predict",
          [](const GpModel& g, const Eigen::MatrixXd& xs, int dim, int order, bool var) {
            return field_tuple(g.predict(xs, dim, order, var));
          },
          py::arg("xs"), py::arg("dim") = 0, py::arg("order") = 0, py::arg("with_variance") = true);

  m.def(
      "fit_gp", [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpConfig& c) { return fit(x, y, c); },
      py::arg("x"), py::arg("y"), py::arg("config") = GpConfig{});

  py::class_<MfgpModel>(m, "MfgpModel")
      .def_property_readonly("noise_variance", &MfgpModel::noise_variance)
      .def_property_readonly("low_noise_variance", &MfgpModel::low_noise_variance)
      .def_property_readonly("nlml", &MfgpModel::nlml_value)
      .def(
          "predict",
          [](const MfgpModel& g, const Eigen::MatrixXd& xs, int dim, int order, bool var) {
            return field_tuple(g.predict(xs, dim, order, var));
          },
          py::arg("xs"), py::arg("dim") = 0, py::arg("order") = 0, py::arg("with_variance") = true);

  m.def(
      "fit_mfgp",
      [](const Eigen::MatrixXd& x1, const Eigen::VectorXd& y1, const Eigen::MatrixXd& x2, const Eigen::VectorXd& y2,
         const GpConfig& low, const GpConfig& high) { return mfgp_fit(x1, y1, x2, y2, MfgpConfig{low, high}); },
      py::arg("x_low"), py::arg("y_low"), py::arg("x_high"), py::arg("y_high"), py::arg("low") = GpConfig{},
      py::arg("high") = GpConfig{});

  py::class_<StwlsConfig>(m, "StwlsConfig")
      .def(py::init<>())
      .def(py::init([](std::vector<double> lambdas, double eta, int outer, int inner) {
             return StwlsConfig{std::move(lambdas), eta, outer, inner};
           }),
           py::arg("lambdas"), py::arg("eta") = 1.0, py::arg("outer") = 20, py::arg("inner") = 10)
      .def_readwrite("lambdas", &StwlsConfig::lambdas)
      .def_readwrite("eta", &StwlsConfig::eta)
      .def_readwrite("outer", &StwlsConfig::outer)
      .def_readwrite("inner", &StwlsConfig::inner);

  py::class_<SparseSolution>(m, "SparseSolution")
      .def_readonly("coefficients", &SparseSolution::coefficients)
      .def_readonly("support", &SparseSolution::support)
      .def_readonly("loss", &SparseSolution::loss)
      .def_readonly("accepted_losses", &SparseSolution::accepted_losses);

  m.def("wls_solve", &wls_solve, py::arg("phi"), py::arg("z"), py::arg("w"));
  m.def("penalized_loss", &penalized_loss, py::arg("phi"), py::arg("z"), py::arg("w"), py::arg("c"), py::arg("eta"));
  m.def("stwls", &stwls, py::arg("phi"), py::arg("z"), py::arg("w"), py::arg("config"));

  py::class_<Library>(m, "Library")
      .def_readonly("name", &Library::name)
      .def_readonly("state_names", &Library::state_names)
      .def("names", &Library::names)
      .def("__len__", &Library::size);
  m.def("standard_library", &standard_library, py::arg("kind"));
  m.def("custom_library", &parse_custom_library, py::arg("name"), py::arg("states"), py::arg("terms"));

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("inputs"), py::arg("values"),
           py::arg("input_names") = std::vector<std::string>{}, py::arg("channel_names") = std::vector<std::string>{})
      .def_readonly("inputs", &Dataset::inputs)
      .def_readonly("values", &Dataset::values)
      .def_readonly("clean", &Dataset::clean)
      .def_readonly("input_names", &Dataset::input_names)
      .def_readonly("channel_names", &Dataset::channel_names)
      .def_readonly("noise_sigma", &Dataset::noise_sigma)
      .def("__len__", &Dataset::size);

  m.def(
      "lorenz",
      [](double t_end, double dt) {
        GridSpec g;
        g.t_end = t_end;
        g.dt = dt;
        return lorenz_dataset(g);
      },
      py::arg("t_end") = 10.0, py::arg("dt") = 0.001);
  m.def("noise_sigma", &noise_sigma, py::arg("clean"), py::arg("noise_ratio"));
  m.def("add_noise", &add_noise, py::arg("clean"), py::arg("noise_ratio"), py::arg("seed"));
  m.def("load_csv", &load_csv, py::arg("path"));
  m.def("save_csv", &save_csv, py::arg("dataset"), py::arg("path"));

  py::class_<DiscoveryResult>(m, "DiscoveryResult")
      .def_readonly("coefficients", &DiscoveryResult::coefficients)
      .def_readonly("solutions", &DiscoveryResult::solutions)
      .def_readonly("feature_names", &DiscoveryResult::feature_names)
      .def_readonly("channel_names", &DiscoveryResult::channel_names)
      .def_property_readonly("points", [](const DiscoveryResult& r) { return r.grid.points; })
      .def_property_readonly("state", [](const DiscoveryResult& r) { return r.fields.bundle.state; })
      .def_property_readonly("time_derivative", [](const DiscoveryResult& r) { return r.fields.time_derivative; })
      .def_property_readonly("time_variance", [](const DiscoveryResult& r) { return r.fields.time_variance; });

  m.def(
      "gp_sindy",
      [](const Dataset& data, const Library& lib, const StwlsConfig& s, const GpConfig& g,
         const std::optional<Eigen::MatrixXd>& points) { return gp_sindy(data, make_grid(data, points), lib, s, g); },
      py::arg("data"), py::arg("library"), py::arg("stwls"), py::arg("gp") = GpConfig{}, py::arg("points") = py::none());
  m.def(
      "mfgp_sindy",
      [](const Dataset& low, const Dataset& high, const Library& lib, const StwlsConfig& s, const GpConfig& gl,
         const GpConfig& gh, const std::optional<Eigen::MatrixXd>& points) {
        return mfgp_sindy(low, high, make_grid(high, points), lib, s, MfgpConfig{gl, gh});
      },
      py::arg("low"), py::arg("high"), py::arg("library"), py::arg("stwls"), py::arg("gp_low") = GpConfig{},
      py::arg("gp_high") = GpConfig{}, py::arg("points") = py::none());

  m.def("e_inf", &e_inf, py::arg("c"), py::arg("truth"));
  m.def("e_2", &e_2, py::arg("c"), py::arg("truth"));
  m.def("tpr", &tpr, py::arg("c"), py::arg("truth"), py::arg("zero_tol") = 0.0);
  m.def("truth_coefficients", [](const std::string& name) { return truth_preset(name).coefficients; });
  m.def("truth_presets", &truth_preset_names);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_readwrite("name", &ExperimentConfig::name)
      .def_readwrite("noise_ratios", &ExperimentConfig::noise_ratios)
      .def_readwrite("seeds", &ExperimentConfig::seeds)
      .def_readwrite("library", &ExperimentConfig::library)
      .def_readwrite("truth", &ExperimentConfig::truth)
      .def_readwrite("stwls", &ExperimentConfig::stwls)
      .def_readwrite("gp", &ExperimentConfig::gp)
      .def_readwrite("gp_low", &ExperimentConfig::gp_low)
      .def_readwrite("workers", &ExperimentConfig::workers)
      .def_readwrite("timeout_seconds", &ExperimentConfig::timeout_seconds)
      .def_readwrite("emit_fields", &ExperimentConfig::emit_fields)
      .def_readwrite("output_dir", &ExperimentConfig::output_dir)
      .def_property_readonly("kind", [](const ExperimentConfig& c) { return to_string(c.kind); })
      .def("validate", &ExperimentConfig::validate);

  m.def("load_config", &load_config, py::arg("path"));
  m.def("preset", [](const std::string& kind) { return preset(parse_experiment_kind(kind)); }, py::arg("kind"));
  m.def("preset_names", &preset_names);
  m.def(
      "run_experiment",
      [](const ExperimentConfig& cfg, bool write) {
        ExperimentReport r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg);
          if (write) write_outputs(cfg, r);
        }
        py::list runs;
        for (const RunRecord& run : r.runs) runs.append(run_dict(run));
        py::dict out;
        out["runs"] = runs;
        out["feature_names"] = r.feature_names;
        out["channel_names"] = r.channel_names;
        return out;
      },
      py::arg("config"), py::arg("write_outputs") = false);
}
