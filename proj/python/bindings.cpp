#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>
#include <string>
#include <vector>

#include "wsl/coupling.hpp"
#include "wsl/detection.hpp"
#include "wsl/experiments.hpp"
#include "wsl/geometry.hpp"
#include "wsl/sausage.hpp"
#include "wsl/spherewalk.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

wsl::Shape shape_from(const std::string& text, int dim) { return wsl::parse_shape(json::parse(text), dim); }

wsl::Path path_from(const std::vector<std::vector<double>>& points) {
  if (points.empty()) throw std::invalid_argument("path: need at least one point");
  wsl::Path p;
  for (std::size_t k = 0; k < points.size(); ++k) {
    p.times.push_back(static_cast<double>(k));
    p.positions.push_back(wsl::Point::from_span(points[k]));
  }
  return p;
}

py::dict volume_dict(const wsl::VolumeEstimate& e) {
  py::dict d;
  d["value"] = e.value;
  d["std_error"] = e.std_error;
  d["samples"] = e.samples;
  d["method"] = wsl::to_string(e.method);
  d["discretization_bound"] = e.discretization_bound;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Wiener sausage lab core";
  m.attr("CSV_SCHEMA_VERSION") = wsl::kCsvSchemaVersion;

  py::register_exception<wsl::ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("experiment_names", &wsl::experiment_names);

  m.def(
      "volume",
      [](const std::string& shape, int dim) {
        const auto v = wsl::volume(shape_from(shape, dim));
        return py::make_tuple(v.value, v.exact, v.std_error);
      },
      py::arg("shape"), py::arg("dim"), "(value, exact, std_error) for a JSON shape");

  m.def(
      "equivalent_radius", [](const std::string& shape, int dim) { return wsl::equivalent_radius(shape_from(shape, dim)); },
      py::arg("shape"), py::arg("dim"));

  m.def(
      "sausage_volume",
      [](const std::vector<std::vector<double>>& path, const std::string& shape, const std::string& method,
         std::size_t samples, std::uint64_t seed) {
        const wsl::Path p = path_from(path);
        wsl::SausageOptions o;
        o.method = wsl::parse_sausage_method(method);
        o.samples = samples;
        wsl::RngStream rng(seed, 0);
        return volume_dict(wsl::sausage_volume(wsl::SausageSpec::make(p, shape_from(shape, p.dim())), o, rng));
      },
      py::arg("path"), py::arg("shape"), py::arg("method") = "hitting", py::arg("samples") = 1 << 14,
      py::arg("seed") = 1, "Volume of the union of path[k] + shape");

  m.def(
      "cap_measure", [](double R, int d, double eps) { return wsl::cap_measure(wsl::SphereSpec(R, d), eps); },
      py::arg("R"), py::arg("d"), py::arg("eps"));

  m.def(
      "coupling_failure_curve",
      [](double L, double c, std::size_t n, double eps, int d, const std::vector<double>& R_list,
         std::size_t replicates, std::uint64_t seed, unsigned workers) {
        py::list out;
        for (const auto& row : wsl::coupling_failure_curve({L, c, n, eps}, d, R_list, replicates, seed, workers)) {
          py::dict r;
          r["R"] = row.R;
          r["failure_prob"] = row.failure_prob;
          r["std_error"] = row.std_error;
          r["replicates"] = row.replicates;
          out.append(r);
        }
        return out;
      },
      py::arg("L"), py::arg("c"), py::arg("n"), py::arg("eps"), py::arg("d"), py::arg("R_list"),
      py::arg("replicates") = 20000, py::arg("seed") = 1, py::arg("workers") = 1);

  m.def(
      "detection_survival",
      [](double lambda, double r, double t, const std::string& drift, int grid_n, std::size_t replicates,
         std::uint64_t seed, unsigned workers) {
        wsl::DetectionConfig cfg;
        cfg.lambda = lambda;
        cfg.r = r;
        cfg.t = t;
        cfg.f = wsl::parse_drift(json::parse(drift));
        wsl::ReplicateSettings rep;
        rep.replicates = replicates;
        rep.seed = seed;
        rep.workers = workers;
        py::list out;
        for (const auto& p : wsl::detection_survival(cfg, grid_n, rep).points) {
          out.append(py::make_tuple(p.t, p.survival, p.std_error));
        }
        return out;
      },
      py::arg("lambda_"), py::arg("r"), py::arg("t"), py::arg("drift"), py::arg("grid_n") = 6,
      py::arg("replicates") = 10000, py::arg("seed") = 1, py::arg("workers") = 1,
      "[(t, survival, std_error)] on the grid times");

  m.def(
      "run_experiment",
      [](const std::string& config) {
        wsl::ExperimentOutput out;
        const auto cfg = wsl::parse_config(json::parse(config));
        {
          py::gil_scoped_release release;
          out = wsl::run_experiment(cfg);
        }
        py::dict d;
        d["csv"] = out.csv;
        d["summary"] = out.summary;
        d["invariants_pass"] = out.invariants_pass;
        d["wall_time_ms"] = out.wall_time_ms;
        return d;
      },
      py::arg("config"), "Runs an experiment from a JSON config string");

  m.def(
      "selftest",
      [](std::uint64_t seed, unsigned workers, double fault) {
        py::list out;
        for (const auto& c : wsl::selftest(seed, workers, fault)) {
          py::dict d;
          d["suite"] = c.suite;
          d["name"] = c.name;
          d["pass"] = c.pass;
          d["detail"] = c.detail;
          out.append(d);
        }
        return out;
      },
      py::arg("seed") = 1, py::arg("workers") = 1, py::arg("cap_measure_fault") = 1.0);
}
