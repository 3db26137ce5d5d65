#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hadamard/emt.hpp"
#include "hadamard/error.hpp"
#include "hadamard/runner.hpp"
#include "hadamard/variation.hpp"

namespace py = pybind11;
using namespace hadamard;

namespace {

using Pair = std::pair<double, double>;

Point point(const Pair& p) { return Point{{p.first, p.second}}; }

py::object to_python(const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::null:
      return py::none();
    case nlohmann::json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case nlohmann::json::value_t::number_integer:
    case nlohmann::json::value_t::number_unsigned:
      return py::int_(j.get<long long>());
    case nlohmann::json::value_t::number_float:
      return py::float_(j.get<double>());
    case nlohmann::json::value_t::string:
      return py::str(j.get<std::string>());
    case nlohmann::json::value_t::array: {
      py::list out;
      for (const auto& v : j) out.append(to_python(v));
      return out;
    }
    default: {
      py::dict out;
      for (const auto& [k, v] : j.items()) out[py::str(k)] = to_python(v);
      return out;
    }
  }
}

MetricField metric_from(const std::optional<std::vector<std::tuple<int, int, double>>>& phi) {
  if (!phi) return euclidean_metric(2);
  ConformalMetric2D m;
  for (const auto& [px, py_, c] : *phi) m.terms.push_back({px, py_, c});
  return m.metric();
}

VelocityExtension extension_from(const std::string& name) { return velocity_extension_from_string(name); }

QuadParams quad_from(int n_r, int n_theta, int n_patch) {
  QuadParams q;
  q.n_r = n_r;
  q.n_theta = n_theta;
  q.n_patch = n_patch;
  return q;
}

py::tuple outcome(const RunOutcome& r) { return py::make_tuple(r.exit_code, r.text); }

}  // namespace

PYBIND11_MODULE(hadamard, m) {
  m.doc() = "Hadamard variation of Dirichlet Green functions on conformal images of the disk";
  py::register_exception<Error>(m, "HadamardError", PyExc_ValueError);

  py::class_<ConformalMap>(m, "ConformalMap")
      .def(py::init([](std::vector<Complex> coeffs) { return ConformalMap(Polynomial(std::move(coeffs))); }),
           py::arg("coeffs"))
      .def_static("identity", &ConformalMap::identity)
      .def("__call__", &ConformalMap::operator())
      .def("derivative", &ConformalMap::derivative)
      .def("inverse", &ConformalMap::inverse)
      .def("contains", &ConformalMap::contains, py::arg("x"), py::arg("tol") = 0.0)
      .def_property_readonly("coeffs", [](const ConformalMap& f) { return f.polynomial().coeffs(); });

  py::class_<DomainFamily>(m, "DomainFamily")
      .def(py::init([](std::vector<Complex> base, std::vector<Complex> perturbation, std::optional<double> t_max) {
             return DomainFamily(Polynomial(std::move(base)), Polynomial(std::move(perturbation)), t_max);
           }),
           py::arg("base"), py::arg("perturbation"), py::arg("t_max") = std::nullopt)
      .def_property_readonly("t_max", &DomainFamily::t_max)
      .def("map_at", &DomainFamily::map_at, py::arg("t"))
      .def("to_json", [](const DomainFamily& f) { return family_to_json(f).dump(); });

  m.def("builtin_family", &builtin_family, py::arg("name"));
  m.def("builtin_family_names", &builtin_family_names);

  m.def("disk_green", [](Pair x, Pair a) { return disk_green(point(x), point(a)); }, py::arg("x"), py::arg("a"));
  m.def(
      "mapped_green", [](const ConformalMap& f, Pair x, Pair a) { return mapped_green(f, point(x), point(a)); },
      py::arg("map"), py::arg("x"), py::arg("a"));
  m.def(
      "green_gradient",
      [](const ConformalMap& f, Pair x, Pair a) {
        const Vec g = GreenFunction(f).gradient(point(x), point(a));
        return Pair{g(0), g(1)};
      },
      py::arg("map"), py::arg("x"), py::arg("a"));
  m.def(
      "mutual_energy",
      [](const ConformalMap& f, Pair a, Pair b, std::optional<std::vector<std::tuple<int, int, double>>> phi) {
        const IntegrationResult r = mutual_energy(GreenFunction(f), metric_from(phi), point(a), point(b));
        return py::make_tuple(r.value, r.converged);
      },
      py::arg("map"), py::arg("a"), py::arg("b"), py::arg("conformal_phi") = std::nullopt);

  m.def(
      "boundary_variation",
      [](const DomainFamily& f, Pair a, Pair b, std::size_t nodes) {
        return boundary_variation(f, point(a), point(b), nodes);
      },
      py::arg("family"), py::arg("a"), py::arg("b"), py::arg("nodes") = kDefaultBoundaryNodes);
  m.def(
      "flux_variation",
      [](const DomainFamily& f, Pair a, Pair b, std::size_t nodes,
         std::optional<std::vector<std::tuple<int, int, double>>> phi) {
        return flux_variation(f, metric_from(phi), point(a), point(b), nodes);
      },
      py::arg("family"), py::arg("a"), py::arg("b"), py::arg("nodes") = kDefaultBoundaryNodes,
      py::arg("conformal_phi") = std::nullopt);
  m.def(
      "volume_variation",
      [](const DomainFamily& f, Pair a, Pair b, std::optional<std::vector<std::tuple<int, int, double>>> phi,
         const std::string& extension, int n_r, int n_theta, int n_patch) {
        const VolumeVariation v = volume_variation(f, metric_from(phi), point(a), point(b),
                                                   quad_from(n_r, n_theta, n_patch), 5e-3, extension_from(extension));
        py::dict out;
        out["value"] = v.value;
        out["integral"] = v.integral;
        out["source_pairing"] = v.source_pairing;
        out["half_value"] = v.half_value;
        out["converged"] = v.converged;
        return out;
      },
      py::arg("family"), py::arg("a"), py::arg("b"), py::arg("conformal_phi") = std::nullopt,
      py::arg("extension") = "holomorphic", py::arg("n_r") = 64, py::arg("n_theta") = 128, py::arg("n_patch") = 32);
  m.def(
      "fd_oracle",
      [](const DomainFamily& f, Pair a, Pair b, std::optional<double> dt) {
        return fd_oracle(f, point(a), point(b), dt);
      },
      py::arg("family"), py::arg("a"), py::arg("b"), py::arg("dt") = std::nullopt);
  m.def(
      "triple_permutations",
      [](const ConformalMap& f, Pair a, Pair b, Pair c, std::size_t nodes) {
        return triple_permutations(f, point(a), point(b), point(c), nodes);
      },
      py::arg("map"), py::arg("a"), py::arg("b"), py::arg("c"), py::arg("nodes") = kDefaultBoundaryNodes);
  m.def(
      "variation_report",
      [](const DomainFamily& f, Pair a, Pair b, std::optional<std::vector<std::tuple<int, int, double>>> phi,
         const std::string& extension) {
        VariationOptions o;
        o.extension = extension_from(extension);
        return to_python(build_report(f, metric_from(phi), point(a), point(b), o).to_json());
      },
      py::arg("family"), py::arg("a"), py::arg("b"), py::arg("conformal_phi") = std::nullopt,
      py::arg("extension") = "holomorphic");

  m.def(
      "run_verify", [](const std::string& config) { return outcome(run_verify(parse_config_text(config))); },
      py::arg("config_json") = "{}", "Returns (exit_code, json_text).");
  m.def(
      "run_vary", [](const std::string& config) { return outcome(run_vary(parse_config_text(config))); },
      py::arg("config_json") = "{}");
  m.def(
      "run_convergence",
      [](const std::string& config, int levels) { return outcome(run_convergence(parse_config_text(config), levels)); },
      py::arg("config_json") = "{}", py::arg("levels") = 5);
  m.def(
      "run_triple", [](const std::string& config) { return outcome(run_triple(parse_config_text(config))); },
      py::arg("config_json"));
}
