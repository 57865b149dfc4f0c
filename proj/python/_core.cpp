// Python bindings. Queries, assignments and reports cross the boundary as JSON text.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cfx/axioms.hpp"
#include "cfx/error.hpp"
#include "cfx/io.hpp"
#include "cfx/sat_explain.hpp"

namespace py = pybind11;
using cfx::io::Json;

namespace {

cfx::ExplainerKind kind_of(const std::string& text) {
  auto kind = cfx::parse_kind(text);
  if (!kind) throw cfx::Error(cfx::ErrorCode::InvalidArgument, "unknown explainer kind " + text);
  return *kind;
}

cfx::Query query_of(const std::string& text) { return cfx::io::query_from_json(cfx::io::parse_json(text)); }

/// Hamming unless a weights object is given.
cfx::DistanceMeasure distance_of(const std::optional<std::string>& weights, const cfx::Theory& t) {
  if (!weights) return cfx::DistanceMeasure::hamming(t.num_features());
  return cfx::io::weights_from_json(t, cfx::io::parse_json(*weights));
}

cfx::sat::SatOracle oracle_of(const std::string& backend) {
  return backend == "builtin" ? cfx::sat::SatOracle::builtin() : cfx::sat::SatOracle::from_spec(backend);
}

std::string explain(const std::string& kind, const std::string& query, std::size_t cap,
                    const std::optional<std::string>& weights, double tau) {
  const cfx::Query q = query_of(query);
  const cfx::DistanceMeasure dd = distance_of(weights, q.theory());
  const cfx::Cap c = cap == 0 ? cfx::Cap() : cfx::Cap(cap);
  py::gil_scoped_release release;
  return cfx::io::dump(cfx::io::explanations_to_json(q.theory(), cfx::explain(kind_of(kind), q, c, &dd, tau)));
}

std::pair<bool, std::size_t> decide(const std::string& kind, const std::string& query,
                                    const std::string& explanation, const std::optional<std::string>& weights,
                                    double tau, const std::string& backend) {
  const cfx::Query q = query_of(query);
  const cfx::DistanceMeasure dd = distance_of(weights, q.theory());
  const auto e = cfx::io::assignment_from_json(q.theory(), cfx::io::parse_json(explanation));
  auto oracle = oracle_of(backend);
  const bool member = cfx::decide_exp(kind_of(kind), q, e, oracle, &dd, tau);
  return {member, oracle.calls()};
}

std::pair<std::optional<std::string>, std::size_t> find(const std::string& kind, const std::string& query,
                                                        const std::optional<std::string>& weights, double tau,
                                                        const std::string& backend) {
  const cfx::Query q = query_of(query);
  const cfx::DistanceMeasure dd = distance_of(weights, q.theory());
  auto oracle = oracle_of(backend);
  const auto found = cfx::find_exp(kind_of(kind), q, oracle, &dd, tau);
  std::optional<std::string> out;
  if (found) out = cfx::io::dump(cfx::io::assignment_to_json(q.theory(), *found));
  return {out, oracle.calls()};
}

std::string cores(const std::string& query) {
  const cfx::Query q = query_of(query);
  const cfx::Theory& t = q.theory();
  Json j = Json::object();
  for (cfx::ClassId c = 0; c < t.num_classes(); ++c) {
    j[t.class_name(c)] = cfx::io::assignment_to_json(t, cfx::core_literals(q.classifier(), c));
  }
  return cfx::io::dump(j);
}

cfx::ExplainerUnderTest explainer_by_name(const std::string& name) {
  if (name == "L0") return cfx::constant_empty();
  if (name == "L1") return cfx::constant_trivial();
  if (name == "L2") return cfx::old_values();
  return cfx::builtin_explainer(kind_of(name));
}

std::string audit(const std::vector<std::string>& explainers, unsigned jobs, std::size_t budget,
                  std::uint64_t seed) {
  std::vector<cfx::ExplainerUnderTest> ls;
  for (const auto& name : explainers) ls.push_back(explainer_by_name(name));
  py::gil_scoped_release release;
  const cfx::QuerySuite suite = cfx::builtin_suite({budget, seed});
  Json profiles = Json::array();
  for (const auto& l : ls) profiles.push_back(cfx::io::profile_to_json(cfx::audit(l, suite, jobs), suite));
  return cfx::io::dump(profiles);
}

std::string witness(int i) {
  const cfx::ImpossibilityWitness w = cfx::impossibility_witness(i);
  Json axioms = Json::array();
  for (auto a : w.axioms) axioms.push_back(std::string(cfx::to_string(a)));
  Json queries = Json::array();
  for (std::size_t k = 0; k < w.suite.size(); ++k) queries.push_back(cfx::io::query_to_json(w.suite.query(k)));
  return cfx::io::dump({{"id", w.id},
                        {"axioms", std::move(axioms)},
                        {"conflict_verified", w.conflict_verified},
                        {"queries", std::move(queries)},
                        {"trace", w.trace}});
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Counterfactual explanation engine";

  // Kept alive for the life of the interpreter.
  static py::handle error_type = py::exception<cfx::Error>(m, "Error", PyExc_ValueError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const cfx::Error& e) {
      py::object ex = error_type(std::string(cfx::to_string(e.code())) + ": " + e.what());
      ex.attr("code") = std::string(cfx::to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), ex.ptr());
    }
  });

  m.def("explain", &explain, py::arg("kind"), py::arg("query"), py::arg("cap") = 0,
        py::arg("weights") = py::none(), py::arg("tau") = cfx::kInfinity);
  m.def("decide", &decide, py::arg("kind"), py::arg("query"), py::arg("explanation"),
        py::arg("weights") = py::none(), py::arg("tau") = cfx::kInfinity, py::arg("backend") = "builtin");
  m.def("find", &find, py::arg("kind"), py::arg("query"), py::arg("weights") = py::none(),
        py::arg("tau") = cfx::kInfinity, py::arg("backend") = "builtin");
  m.def("cores", &cores, py::arg("query"));
  m.def("audit", &audit, py::arg("explainers"), py::arg("jobs") = 1, py::arg("budget") = 5000,
        py::arg("seed") = 20240601);
  m.def("witness", &witness, py::arg("index"));
}
