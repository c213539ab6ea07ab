#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "varq/error.hpp"
#include "varq/harness.hpp"
#include "varq/io.hpp"
#include "varq/transference.hpp"
#include "varq/variation.hpp"

namespace py = pybind11;
using namespace varq;
using io::json;

namespace {

// Structured values cross the boundary as JSON text; the Python side wraps
// these with json.loads/json.dumps.
Space space_of(const std::string& norm, std::size_t dim) {
  return io::space_from_json(json{{"dim", dim}, {"norm", norm}});
}

SamplePath make_path(const std::vector<std::vector<double>>& values, const std::string& norm,
                     const std::vector<double>& labels) {
  if (values.empty()) throw Error(ErrorKind::domain, "path needs at least one sample");
  const Space s = space_of(norm, values.front().size());
  std::vector<Point> pts;
  for (const auto& v : values) pts.emplace_back(s, v);
  return labels.empty() ? SamplePath::indexed(std::move(pts)) : SamplePath(labels, std::move(pts));
}

py::tuple as_tuple(const VariationResult& r) { return py::make_tuple(r.value, r.chain); }

std::string rows_json(const std::vector<ReportRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) out.push_back(io::to_json(r));
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_varq, m) {
  m.doc() = "q-variation of operator families and vector-valued martingales";

  auto base = py::register_exception<Error>(m, "VarqError", PyExc_ValueError);
  py::register_exception<ResolutionError>(m, "ResolutionError", base.ptr());

  m.def(
      "vq",
      [](const std::vector<std::vector<double>>& values, double q, const std::string& norm,
         const std::vector<double>& labels) { return as_tuple(vq_dp(make_path(values, norm, labels), q)); },
      py::arg("values"), py::arg("q"), py::arg("norm") = "l2", py::arg("labels") = std::vector<double>{});
  m.def(
      "vq_bruteforce",
      [](const std::vector<std::vector<double>>& values, double q, const std::string& norm) {
        return as_tuple(vq_bruteforce(make_path(values, norm, {}), q));
      },
      py::arg("values"), py::arg("q"), py::arg("norm") = "l2");

  m.def(
      "evaluate",
      [](const std::string& family_json, const std::string& f_json, const std::string& norm, double t, double x) {
        const auto fj = json::parse(f_json);
        const auto family = io::family_from_json(json::parse(family_json));
        const std::size_t dim = fj.at("values").at(0).is_array() ? fj.at("values").at(0).size() : 1;
        const auto f = io::step_function_from_json(fj, space_of(norm, dim));
        const Point v = eval(family, f, t, x);
        return std::vector<double>(v.coords().begin(), v.coords().end());
      },
      py::arg("family"), py::arg("function"), py::arg("norm"), py::arg("t"), py::arg("x"));

  m.def(
      "estimate",
      [](const std::string& config_json) {
        py::gil_scoped_release release;
        return io::to_json(estimate_constant(io::config_from_json(json::parse(config_json)))).dump();
      },
      py::arg("config"));

  m.def(
      "structured_report",
      [](const std::string& rows, const std::string& config) {
        std::vector<ReportRow> parsed;
        for (const auto& r : json::parse(rows)) parsed.push_back(io::row_from_json(r));
        std::optional<ExperimentConfig> c;
        if (!config.empty()) c = io::config_from_json(json::parse(config));
        return io::structured_report(parsed, c);
      },
      py::arg("rows"), py::arg("config") = "");

  m.def(
      "identity_suite",
      [](std::uint64_t seed, std::size_t triples, bool corrupt) {
        py::gil_scoped_release release;
        return rows_json(identity_suite(seed, {triples, corrupt}));
      },
      py::arg("seed"), py::arg("triples") = 100, py::arg("corrupt") = false);

  m.def(
      "cotype_ratio",
      [](const std::string& martingale_json, double q) {
        const auto c = cotype_ratio(io::martingale_from_json(json::parse(martingale_json)), q);
        return py::make_tuple(c.ratio, c.numerator, c.denominator);
      },
      py::arg("martingale"), py::arg("q"));

  m.def(
      "witness_linfty", [](std::size_t n, std::size_t m) { return io::to_json(witness_linfty(n, m)).dump(); },
      py::arg("n"), py::arg("m"));

  m.def(
      "chain_report",
      [](const std::string& martingale_json, double q, double eps, int fejer_degree, std::uint64_t seed) {
        const auto M = io::martingale_from_json(json::parse(martingale_json));
        py::gil_scoped_release release;
        return io::to_json(cotype_chain_report(M, q, eps, fejer_degree, 0, 0, seed)).dump();
      },
      py::arg("martingale"), py::arg("q"), py::arg("eps"), py::arg("fejer_degree") = 31, py::arg("seed") = 0);
}
