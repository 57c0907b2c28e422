#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dq/analysis.hpp"
#include "dq/error.hpp"
#include "dq/exact_tests.hpp"
#include "dq/io.hpp"
#include "dq/pi0.hpp"
#include "dq/qvalue.hpp"
#include "dq/simulation.hpp"

namespace py = pybind11;

namespace {

using Fraction = std::pair<std::int64_t, std::int64_t>;

dq::TestKind test_kind(const std::string& name) {
  const auto kind = dq::parse_test_kind(name);
  if (!kind) throw py::value_error("unknown test '" + name + "'");
  return *kind;
}

dq::Pi0Method pi0_method(const std::string& name) {
  const auto method = dq::parse_pi0_method(name);
  if (!method || *method == dq::Pi0Method::real) throw py::value_error("unknown pi0 method '" + name + "'");
  return *method;
}

std::vector<Fraction> fractions(const dq::Support& support) {
  std::vector<Fraction> out;
  for (const auto& p : support.points()) out.emplace_back(p.num(), p.den());
  return out;
}

std::optional<dq::Support> support_from(const std::optional<std::string>& spec) {
  if (!spec) return std::nullopt;
  return dq::parse_support_spec(*spec);
}

py::dict estimate_dict(const dq::Pi0Estimate& e) {
  py::dict d;
  d["method"] = std::string(dq::to_string(e.method));
  d["pi0"] = e.value;
  d["raw"] = e.raw;
  d["lambda"] = e.lambda;
  d["fallback"] = e.fallback;
  return d;
}

py::dict pi0(const std::vector<double>& pvalues, const std::string& method,
             const std::optional<std::string>& support, std::uint64_t seed) {
  const auto s = support_from(support);
  const dq::PValueSample sample = s ? dq::PValueSample(pvalues, *s) : dq::PValueSample(pvalues);
  dq::RandParams rand;
  rand.seed = seed;
  return estimate_dict(dq::estimate_pi0(pi0_method(method), sample, {}, rand));
}

py::dict analyze(const std::vector<double>& pvalues, const std::optional<std::string>& support,
                 const std::vector<std::string>& methods, double alpha, std::uint64_t seed) {
  dq::AnalysisOptions options;
  options.alpha = alpha;
  options.seed = seed;
  if (!methods.empty()) {
    options.methods.clear();
    for (const auto& name : methods) options.methods.push_back(pi0_method(name));
  }
  const auto result = dq::analyze_pvalues(pvalues, support_from(support), options);
  py::dict out;
  for (const auto& m : result.methods) {
    py::dict d = estimate_dict(m.pi0);
    d["qvalues"] = m.qvalues;
    d["rejections"] = m.rejections;
    out[py::str(std::string(dq::to_string(m.pi0.method)))] = d;
  }
  return out;
}

double pvalue(const std::string& test, const std::vector<double>& x, const std::vector<double>& y,
              double bandwidth) {
  const auto kind = test_kind(test);
  dq::JiConfig ji;
  ji.bandwidth = bandwidth;
  const int n2 = dq::is_one_sample(kind) ? 0 : static_cast<int>(y.size());
  const dq::RowTester tester(kind, static_cast<int>(x.size()), n2, ji);
  return tester.pvalue(x, y);
}

std::string simulate(const std::string& config_json, std::optional<std::uint64_t> seed, int threads) {
  auto config = dq::parse_config(config_json);
  if (seed) config.seed = *seed;
  return dq::report_to_json(dq::run_monte_carlo(config, threads));
}

}  // namespace

PYBIND11_MODULE(_dqvalue, m) {
  m.doc() = "q-value procedures for discrete uniform P-values.";

  py::register_exception<dq::Error>(m, "Error", PyExc_ValueError);

  m.def("exact_support",
        [](const std::string& test, int n1, int n2) {
          const auto kind = test_kind(test);
          const auto support = dq::pvalue_support(kind, n1, dq::is_one_sample(kind) ? 0 : n2);
          if (!support) throw py::value_error("'" + test + "' has continuous P-values");
          return fractions(*support);
        },
        py::arg("test"), py::arg("n1"), py::arg("n2") = 0,
        "Attainable P-values of a test as (numerator, denominator) pairs.");
  m.def("pvalue", &pvalue, py::arg("test"), py::arg("x"), py::arg("y") = std::vector<double>{},
        py::arg("bandwidth") = 1.0, "P-value of one test on samples x and y.");
  m.def("pi0", &pi0, py::arg("pvalues"), py::arg("method"), py::arg("support") = py::none(),
        py::arg("seed") = 0, "Estimate the proportion of true nulls.");
  m.def("qvalues", [](const std::vector<double>& p, double pi0) { return dq::qvalues(p, pi0); },
        py::arg("pvalues"), py::arg("pi0") = 1.0);
  m.def("adaptive_bh",
        [](const std::vector<double>& p, double pi0, double alpha) {
          return dq::adaptive_bh_reject(p, pi0, alpha).rejected;
        },
        py::arg("pvalues"), py::arg("pi0"), py::arg("alpha"),
        "Indices rejected by BH at level min(alpha / pi0, 1).");
  m.def("analyze", &analyze, py::arg("pvalues"), py::arg("support") = py::none(),
        py::arg("methods") = std::vector<std::string>{}, py::arg("alpha") = 0.05, py::arg("seed") = 1);
  m.def("simulate", &simulate, py::arg("config"), py::arg("seed") = py::none(), py::arg("threads") = 0,
        "Run a Monte Carlo study from a JSON config; returns the JSON report.");
}
