#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qcontract/cli.hpp"
#include "qcontract/norms.hpp"
#include "qcontract/squant.hpp"
#include "qcontract/ticoq.hpp"
#include "qcontract/tvcoq.hpp"
#include "qcontract/vquant.hpp"

namespace py = pybind11;
using namespace qcontract;

namespace {

// Configs and reports cross the boundary as JSON text; the Python side
// converts to and from dicts.
py::tuple command(cli::CommandResult r) { return py::make_tuple(r.exit_code, r.output, r.message); }

std::optional<std::vector<std::uint64_t>> seeds_arg(const std::optional<std::vector<std::uint64_t>>& s) { return s; }

cli::Format fmt(const std::string& f) { return cli::format_from_string(f); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Convergence-optimal quantizer design for contractive iterations";
  m.attr("SCHEMA_VERSION") = cli::kSchemaVersion;

  py::register_exception<cli::ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("weighted_max_norm", [](const Vector& x, const Vector& a) { return weighted_max_norm(x, a); }, py::arg("x"),
        py::arg("a"));
  m.def("lp_norm", [](const Vector& x, double p) { return lp_norm(x, p); }, py::arg("x"), py::arg("p"));
  m.def(
      "block_norm",
      [](const Vector& x, const std::string& norm_json) {
        const auto [part, spec] = norm_from_json(nlohmann::json::parse(norm_json));
        return block_norm(x, part, spec);
      },
      py::arg("x"), py::arg("norm_json"));

  py::class_<ScalarQuantizer>(m, "ScalarQuantizer")
      .def(py::init([](double lo, double hi, int bits) { return ScalarQuantizer({lo, hi}, bits); }), py::arg("lo"),
           py::arg("hi"), py::arg("bits"))
      .def("encode", &ScalarQuantizer::encode)
      .def("decode", &ScalarQuantizer::decode)
      .def("quantize", &ScalarQuantizer::quantize)
      .def_property_readonly("bits", &ScalarQuantizer::bits)
      .def_property_readonly("worst_case_error", &ScalarQuantizer::worst_case_error);

  m.def("sq_worst_case_error", &sq_worst_case_error, py::arg("length"), py::arg("bits"));
  m.def(
      "vq_worst_case_error",
      [](const Vector& lengths, std::size_t n, int bits) { return vq_worst_case_error(lengths, n, bits); },
      py::arg("lengths"), py::arg("n"), py::arg("bits"));
  m.def(
      "nearest_point_a_star", [](const Vector& y, double scale) { return nearest_point_a_star(y, scale).point; },
      py::arg("y"), py::arg("scale"));

  m.def(
      "tvcoq_master",
      [](double alpha, std::size_t n, int L, std::size_t T, double L_prime) {
        return schedule_to_json(tvcoq_master(alpha, n, L, T, L_prime)).dump();
      },
      py::arg("alpha"), py::arg("n"), py::arg("L"), py::arg("T"), py::arg("L_prime") = 0.0);
  m.def("tvcoq_error_bound", &tvcoq_error_bound, py::arg("alpha"), py::arg("n"), py::arg("L"), py::arg("T"),
        py::arg("eta"));

  m.def(
      "design",
      [](const std::string& cfg, const std::string& format) {
        return command(cli::cmd_design(nlohmann::json::parse(cfg), fmt(format)));
      },
      py::arg("config_json"), py::arg("format") = "json");
  m.def(
      "simulate",
      [](const std::string& cfg, std::optional<std::vector<std::uint64_t>> seeds, const std::string& format) {
        return command(cli::cmd_simulate(nlohmann::json::parse(cfg), seeds_arg(seeds), fmt(format)));
      },
      py::arg("config_json"), py::arg("seeds") = py::none(), py::arg("format") = "csv");
  m.def(
      "tradeoff",
      [](const std::string& cfg, std::optional<std::vector<std::uint64_t>> seeds, const std::string& format) {
        return command(cli::cmd_tradeoff(nlohmann::json::parse(cfg), seeds_arg(seeds), fmt(format)));
      },
      py::arg("config_json"), py::arg("seeds") = py::none(), py::arg("format") = "csv");
}
