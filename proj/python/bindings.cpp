#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nearfield/bench.hpp"
#include "nearfield/fresnel.hpp"
#include "nearfield/polar_dictionary.hpp"

namespace py = pybind11;
using namespace nearfield;

namespace {

ExperimentConfig config_from_kwargs(const py::kwargs& kw) {
  ExperimentConfig cfg;
  if (kw.contains("paper_scale") && kw["paper_scale"].cast<bool>()) cfg.apply_full_scale();
  py::object obj = py::cast(cfg, py::return_value_policy::reference);
  for (auto item : kw) {
    const auto key = item.first.cast<std::string>();
    if (key == "paper_scale") continue;
    if (!py::hasattr(obj, key.c_str())) throw py::key_error("unknown config key: " + key);
    py::setattr(obj, key.c_str(), item.second);
  }
  return cfg;
}

py::dict record_to_dict(const ResultRecord& r) {
  py::dict d;
  d["method"] = r.method;
  d["sweep_name"] = r.sweep_name;
  d["sweep_value"] = r.sweep_value;
  d["trial"] = r.trial;
  d["seed"] = r.seed;
  d["nmse_linear"] = r.nmse_linear;
  d["nmse_db"] = r.nmse_db;
  d["wall_ms"] = r.wall_ms;
  d["error"] = r.error;
  d["objective_trace"] = r.objective_trace;
  return d;
}

}  // namespace

PYBIND11_MODULE(_nearfield, m) {
  m.doc() = "Near-field XL-MIMO channel estimation";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<ArrayGeometry>(m, "ArrayGeometry")
      .def(py::init<int, double, double>(), py::arg("num_antennas"), py::arg("spacing"), py::arg("wavelength"))
      .def_static("half_wavelength", &ArrayGeometry::half_wavelength, py::arg("num_antennas"),
                  py::arg("carrier_hz"))
      .def_property_readonly("num_antennas", &ArrayGeometry::num_antennas)
      .def_property_readonly("spacing", &ArrayGeometry::spacing)
      .def_property_readonly("wavelength", &ArrayGeometry::wavelength)
      .def_property_readonly("aperture", &ArrayGeometry::aperture)
      .def_property_readonly("wavenumber", &ArrayGeometry::wavenumber)
      .def("__repr__", [](const ArrayGeometry& g) {
        return "ArrayGeometry(N=" + std::to_string(g.num_antennas()) + ", d=" + std::to_string(g.spacing()) +
               ", wavelength=" + std::to_string(g.wavelength()) + ")";
      });

  py::class_<PathParam>(m, "PathParam")
      .def(py::init([](Complex gain, double angle, double distance) { return PathParam{gain, angle, distance}; }),
           py::arg("gain") = Complex(1.0, 0.0), py::arg("angle") = 0.0, py::arg("distance") = kInfiniteDistance)
      .def_readwrite("gain", &PathParam::gain)
      .def_readwrite("angle", &PathParam::angle)
      .def_readwrite("distance", &PathParam::distance);

  m.def("element_distance", &element_distance, py::arg("geometry"), py::arg("n"), py::arg("theta"), py::arg("r"));
  m.def("far_steering", &far_steering, py::arg("geometry"), py::arg("theta"));
  m.def("near_steering", &near_steering, py::arg("geometry"), py::arg("theta"), py::arg("r"));
  m.def("rayleigh_distance", &rayleigh_distance, py::arg("geometry"));
  m.def("fresnel_validity_bound", &fresnel_validity_bound, py::arg("geometry"));
  m.def(
      "synthesize_channel",
      [](const ArrayGeometry& g, int subcarriers, double bandwidth_hz, const std::vector<PathParam>& paths) {
        return synthesize_channel(g, FrequencyGrid::ofdm(subcarriers, bandwidth_hz, g.carrier_frequency()), paths).H;
      },
      py::arg("geometry"), py::arg("subcarriers"), py::arg("bandwidth_hz"), py::arg("paths"),
      "N x M channel matrix");

  m.def("fresnel", [](double x) {
    const FresnelPair p = fresnel(x);
    return py::make_tuple(p.c, p.s);
  }, py::arg("x"), "(C(x), S(x))");
  m.def("g_magnitude", &g_magnitude, py::arg("beta"));
  m.def("coherence_plot", &coherence_plot, py::arg("beta_max") = 10.0, py::arg("points") = 1001);

  py::class_<PolarDictionary>(m, "PolarDictionary")
      .def_readonly("W", &PolarDictionary::W)
      .def_readonly("rings", &PolarDictionary::rings)
      .def_property_readonly("num_columns", &PolarDictionary::num_columns)
      .def_property_readonly("angles", [](const PolarDictionary& d) {
        std::vector<double> v;
        for (const auto& a : d.atoms) v.push_back(a.angle);
        return v;
      })
      .def_property_readonly("distances", [](const PolarDictionary& d) {
        std::vector<double> v;
        for (const auto& a : d.atoms) v.push_back(a.distance);
        return v;
      })
      .def("threshold_distance", [](const PolarDictionary& d) { return d.config.threshold_distance(); });

  m.def(
      "build_polar_dictionary",
      [](const ArrayGeometry& g, double beta_delta, double rho_min) {
        return build_polar_dictionary({g, beta_delta, rho_min});
      },
      py::arg("geometry"), py::arg("beta_delta") = 1.2, py::arg("rho_min") = 3.0);
  m.def("uniform_dictionary", &uniform_dictionary, py::arg("geometry"), py::arg("rings"), py::arg("rho_min"),
        py::arg("rho_max"));
  m.def("coherence_exact", &coherence_exact, py::arg("b1"), py::arg("b2"));

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("antennas", &ExperimentConfig::antennas)
      .def_readwrite("rf_chains", &ExperimentConfig::rf_chains)
      .def_readwrite("carrier_hz", &ExperimentConfig::carrier_hz)
      .def_readwrite("bandwidth_hz", &ExperimentConfig::bandwidth_hz)
      .def_readwrite("subcarriers", &ExperimentConfig::subcarriers)
      .def_readwrite("rho_min", &ExperimentConfig::rho_min)
      .def_readwrite("paths", &ExperimentConfig::paths)
      .def_readwrite("beta_delta", &ExperimentConfig::beta_delta)
      .def_readwrite("iterations", &ExperimentConfig::iterations)
      .def_readwrite("detected_paths", &ExperimentConfig::detected_paths)
      .def_readwrite("pilots", &ExperimentConfig::pilots)
      .def_readwrite("snr_db", &ExperimentConfig::snr_db)
      .def_readwrite("angle_min", &ExperimentConfig::angle_min)
      .def_readwrite("angle_max", &ExperimentConfig::angle_max)
      .def_readwrite("distance_min", &ExperimentConfig::distance_min)
      .def_readwrite("distance_max", &ExperimentConfig::distance_max)
      .def_readwrite("uniform_rings", &ExperimentConfig::uniform_rings)
      .def_readwrite("uniform_rho_max", &ExperimentConfig::uniform_rho_max)
      .def_property(
          "sweep", [](const ExperimentConfig& c) { return sweep_name(c.sweep); },
          [](ExperimentConfig& c, const std::string& s) { c.sweep = parse_sweep(s); })
      .def_readwrite("values", &ExperimentConfig::values)
      .def_readwrite("trials", &ExperimentConfig::trials)
      .def_readwrite("methods", &ExperimentConfig::methods)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("threads", &ExperimentConfig::threads)
      .def("validate", &ExperimentConfig::validate);

  m.def("make_config", &config_from_kwargs, "ExperimentConfig from keyword overrides");
  m.def("known_methods", &known_methods);
  m.def("nmse", &nmse, py::arg("H"), py::arg("H_hat"));

  m.def(
      "run_point",
      [](const ExperimentConfig& cfg, double sweep_value, int trial, const std::vector<std::string>& methods) {
        std::vector<ResultRecord> records;
        {
          py::gil_scoped_release release;
          records = run_point(cfg, sweep_value, trial, methods);
        }
        py::list out;
        for (const auto& r : records) out.append(record_to_dict(r));
        return out;
      },
      py::arg("config"), py::arg("sweep_value"), py::arg("trial"), py::arg("methods"),
      "one paired trial; a list of per-method result dicts");

  m.def(
      "estimate",
      [](const ExperimentConfig& cfg, const std::string& method, int trial) {
        EstimationResult est;
        Eigen::MatrixXcd H;
        {
          py::gil_scoped_release release;
          const PointContext ctx = make_point_context(cfg);
          const TrialInstance inst = make_trial(cfg, trial_seed(cfg, trial));
          est = run_method(method, ctx, inst, nullptr);
          H = inst.channel.H;
        }
        py::dict d;
        d["H"] = H;
        d["H_hat"] = est.H;
        d["support"] = est.support;
        std::vector<double> angles, distances;
        for (const auto& p : est.paths) {
          angles.push_back(p.angle);
          distances.push_back(p.distance);
        }
        d["angles"] = angles;
        d["distances"] = distances;
        d["objective_trace"] = est.objective_trace;
        d["nmse"] = nmse(H, est.H);
        return d;
      },
      py::arg("config"), py::arg("method"), py::arg("trial") = 0,
      "run one estimator on one trial and return the true and estimated channels");

  m.def(
      "run_campaign",
      [](const ExperimentConfig& cfg, const std::string& csv_path) {
        CampaignOutput out;
        {
          py::gil_scoped_release release;
          out = run_campaign(cfg, csv_path);
        }
        py::list rows;
        for (const auto& r : out.summary) {
          py::dict d;
          d["method"] = r.method;
          d["sweep_value"] = r.sweep_value;
          d["trials"] = r.trials;
          d["mean_nmse_linear"] = r.mean_linear;
          d["mean_nmse_db"] = r.mean_db;
          d["ci_low_db"] = r.ci_low_db;
          d["ci_high_db"] = r.ci_high_db;
          d["failures"] = r.failures;
          rows.append(d);
        }
        return py::make_tuple(rows, out.failures, out.skipped);
      },
      py::arg("config"), py::arg("csv_path") = "",
      "(summary rows, failures, resumed rows); outputs are written next to csv_path when given");
}
