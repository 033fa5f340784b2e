// Python module crlab._core.  Structured arguments travel as JSON text; the
// package wrapper in crlab/__init__.py converts to and from dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "crlab/experiments.hpp"

namespace py = pybind11;
using namespace crlab;

namespace {

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::config, e.what());
  }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "crlab native core";

  // The module attribute keeps the type alive for the translator.
  static PyObject* error_type = py::exception<Error>(m, "CrlabError").ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type)(py::str(e.what()));
      exc.attr("code") = py::str(to_string(e.code()));
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  m.def("spectrum", [](const std::string& spec, int t_resolution, const std::string& method) {
    const Json j = parse(spec);
    const auto s = loop_spec_from_json(JsonReader(j));
    return to_json(spectrum(assemble_loop_operator(s, t_resolution, loop_method_from_string(method)))).dump();
  }, py::arg("spec"), py::arg("t_resolution") = 33, py::arg("method") = "fourier");

  m.def("count_window", [](const std::string& spec, double lo, double hi, int t_resolution) {
    const Json j = parse(spec);
    return count_window(spectrum(assemble_loop_operator(loop_spec_from_json(JsonReader(j)), t_resolution)), lo, hi);
  }, py::arg("spec"), py::arg("lo"), py::arg("hi"), py::arg("t_resolution") = 33);

  m.def("spectral_flow", [](const std::string& a, const std::string& b, int steps, int t_resolution) {
    const Json ja = parse(a);
    const Json jb = parse(b);
    return spectral_flow(linear_path(loop_spec_from_json(JsonReader(ja)), loop_spec_from_json(JsonReader(jb))),
                         steps, t_resolution);
  }, py::arg("a"), py::arg("b"), py::arg("steps") = 200, py::arg("t_resolution") = 33);

  m.def("problem", [](const std::string& problem) {
    const Json j = parse(problem);
    return to_json(problem_from_json(JsonReader(j))).dump();
  }, py::arg("problem"));

  m.def("numerical_index", [](const std::string& problem, const std::string& policy) {
    const Json jp = parse(problem);
    const Json jpol = parse(policy);
    const auto p = problem_from_json(JsonReader(jp));
    IndexReport r;
    {
      py::gil_scoped_release release;
      r = numerical_index(assemble(p), policy_from_json(JsonReader(jpol)));
    }
    return to_json(r).dump();
  }, py::arg("problem"), py::arg("policy") = "{}");

  m.def("analytic_index", [](const std::string& problem) {
    const Json j = parse(problem);
    return analytic_index(problem_from_json(JsonReader(j)));
  }, py::arg("problem"));

  m.def("multi_end_index", &multi_end_index, py::arg("positive_ends"), py::arg("negative_ends"));

  m.def("codimension", [](const std::string& degenerate, const std::string& smooth) {
    const Json a = parse(degenerate);
    const Json b = parse(smooth);
    return codimension(graph_from_json(JsonReader(a)), graph_from_json(JsonReader(b)));
  }, py::arg("degenerate"), py::arg("smooth"));

  m.def("canonical_cases", [] {
    Json out = Json::array();
    for (const auto& c : canonical_cases()) {
      out.push_back({{"name", c.name},
                     {"degenerate", to_json(c.degenerate)},
                     {"smooth", to_json(c.smooth)},
                     {"expected_codimension", c.expected_codimension}});
    }
    return out.dump();
  });

  m.def("validate_config", [](const std::string& config) {
    return to_json(experiment_from_json(parse(config))).dump();
  }, py::arg("config"));

  m.def("run_experiment", [](const std::string& config) {
    const auto c = experiment_from_json(parse(config));
    RunResult r;
    {
      py::gil_scoped_release release;
      r = run_experiment(c);
    }
    return py::make_tuple(r.exit_code(), r.summary);
  }, py::arg("config"));
}
