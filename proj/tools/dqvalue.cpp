// dqvalue: q-value analysis for discrete uniform P-values.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dq/analysis.hpp"
#include "dq/error.hpp"
#include "dq/exact_tests.hpp"
#include "dq/io.hpp"
#include "dq/pi0.hpp"
#include "dq/simulation.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kDataError = 1;
constexpr int kUsageError = 2;

// Raised for problems the user can fix on the command line.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dq::ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw dq::ParseError("cannot write '" + path + "'");
  out << text;
  if (!out) throw dq::ParseError("write failed for '" + path + "'");
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_file(out_path, text);
  }
}

// "a/b.csv" -> "a/b.<tag>.csv"
std::string sibling(const std::string& path, const std::string& tag) {
  std::filesystem::path p(path);
  const auto ext = p.extension().string();
  p.replace_extension();
  return p.string() + "." + tag + (ext.empty() ? ".csv" : ext);
}

dq::TestKind test_kind(const std::string& name) {
  const auto kind = dq::parse_test_kind(name);
  if (!kind) throw UsageError("unknown test '" + name + "'");
  return *kind;
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::string token;
    for (char c : item + ",") {
      if (c == ',') {
        if (!token.empty()) out.push_back(token);
        token.clear();
      } else if (c != ' ') {
        token.push_back(c);
      }
    }
  }
  return out;
}

std::vector<dq::Pi0Method> methods_from(const std::vector<std::string>& names, bool discrete) {
  std::vector<dq::Pi0Method> out;
  for (const auto& name : split_list(names)) {
    const auto m = dq::parse_pi0_method(name);
    if (!m || *m == dq::Pi0Method::real) throw UsageError("unknown pi0 method '" + name + "'");
    if (dq::needs_support(*m) && !discrete) {
      throw UsageError(name + " needs discrete P-values (a permutation test or --support)");
    }
    out.push_back(*m);
  }
  if (out.empty()) {
    if (discrete) {
      out = {dq::Pi0Method::ss, dq::Pi0Method::st, dq::Pi0Method::liang, dq::Pi0Method::chen,
             dq::Pi0Method::rand};
    } else {
      out = {dq::Pi0Method::ss, dq::Pi0Method::st};
    }
  }
  return out;
}

// "0.01,0.05,0.1" or "from:to:step".
std::vector<double> alpha_grid_from(const std::string& spec) {
  if (spec.empty()) return {};
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::string token;
    for (char c : spec + ":") {
      if (c == ':') {
        const auto v = dq::parse_double(token);
        if (!v) throw UsageError("bad --alpha-grid '" + spec + "'");
        parts.push_back(*v);
        token.clear();
      } else {
        token.push_back(c);
      }
    }
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
      throw UsageError("--alpha-grid range must be from:to:step with step > 0");
    }
    const auto steps = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    if (steps > 100000) throw UsageError("--alpha-grid has too many points");
    for (long k = 0; k <= steps; ++k) out.push_back(parts[0] + static_cast<double>(k) * parts[2]);
  } else {
    for (const auto& item : split_list({spec})) {
      const auto v = dq::parse_double(item);
      if (!v) throw UsageError("bad --alpha-grid value '" + item + "'");
      out.push_back(*v);
    }
  }
  for (double a : out) {
    if (!(a > 0.0 && a <= 1.0)) throw UsageError("--alpha-grid values must lie in (0, 1]");
  }
  return out;
}

void write_analysis(const dq::AnalysisResult& result, const std::string& out, const std::string& format) {
  if (format == "json") {
    emit(out, dq::analysis_to_json(result));
    return;
  }
  emit(out, dq::analysis_to_csv(result));
  if (out.empty() || out == "-") {
    for (const auto& m : result.methods) {
      std::cerr << dq::to_string(m.pi0.method) << ": pi0 = " << dq::format_decimal(m.pi0.value)
                << ", rejections at alpha " << dq::format_decimal(result.alpha) << " = "
                << m.rejections << "\n";
    }
    return;
  }
  write_file(sibling(out, "summary"), dq::analysis_summary_csv(result));
  if (!result.alpha_grid.empty()) write_file(sibling(out, "sweep"), dq::analysis_sweep_csv(result));
}

struct Options {
  std::string test;
  int n1 = 0;
  int n2 = 0;
  std::vector<std::string> methods;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::string support;
  std::string out;
  std::string format = "csv";
  std::string alpha_grid;
  std::string input;
  double bandwidth = 1.0;
  int threads = 0;
};

int run_nulldist(const Options& o) {
  const auto kind = test_kind(o.test);
  const int n2 = dq::is_one_sample(kind) ? 0 : o.n2;
  if (!dq::is_discrete(kind)) throw UsageError("'" + o.test + "' has continuous P-values");
  const auto support = dq::pvalue_support(kind, o.n1, n2);
  emit(o.out, o.format == "json" ? dq::support_to_json(*support) : dq::support_to_csv(*support));
  return kOk;
}

int run_pi0(const Options& o) {
  std::optional<dq::Support> support;
  if (!o.support.empty()) support = dq::parse_support_spec(o.support);
  const auto methods = methods_from(o.methods, support.has_value());
  std::ifstream in(o.input);
  if (!in) throw dq::ParseError("cannot open '" + o.input + "'");
  auto p = dq::read_pvalues(in);
  const dq::PValueSample sample = support ? dq::PValueSample(std::move(p), *support)
                                          : dq::PValueSample(std::move(p));
  dq::RandParams rand;
  rand.seed = o.seed;
  std::vector<dq::Pi0Estimate> estimates;
  for (auto m : methods) estimates.push_back(dq::estimate_pi0(m, sample, {}, rand));
  emit(o.out, o.format == "json" ? dq::pi0_to_json(estimates) : dq::pi0_to_csv(estimates));
  return kOk;
}

dq::AnalysisOptions analysis_options(const Options& o, bool discrete) {
  dq::AnalysisOptions a;
  a.methods = methods_from(o.methods, discrete);
  a.alpha = o.alpha;
  a.alpha_grid = alpha_grid_from(o.alpha_grid);
  a.seed = o.seed;
  return a;
}

int run_qvalue(const Options& o) {
  std::optional<dq::Support> support;
  if (!o.support.empty()) support = dq::parse_support_spec(o.support);
  const auto options = analysis_options(o, support.has_value());
  std::ifstream in(o.input);
  if (!in) throw dq::ParseError("cannot open '" + o.input + "'");
  auto p = dq::read_pvalues(in);
  write_analysis(dq::analyze_pvalues(std::move(p), std::move(support), options), o.out, o.format);
  return kOk;
}

int run_analyze(const Options& o) {
  const auto kind = test_kind(o.test);
  const bool one = dq::is_one_sample(kind);
  if (o.n1 < 2) throw UsageError("--n1 must be at least 2");
  const auto options = analysis_options(o, dq::is_discrete(kind));
  std::ifstream in(o.input);
  if (!in) throw dq::ParseError("cannot open '" + o.input + "'");
  std::optional<int> columns;
  if (one) columns = o.n1;
  else if (o.n2 > 0) columns = o.n1 + o.n2;
  const auto matrix = dq::read_matrix(in, columns);
  const int width = static_cast<int>(matrix.rows.front().size());
  const int n2 = one ? 0 : width - o.n1;
  if (!one && n2 < 2) {
    throw dq::ParseError("matrix has " + std::to_string(width) + " data columns; need n1 + n2 with n2 >= 2");
  }
  dq::JiConfig ji;
  ji.bandwidth = o.bandwidth;
  const dq::RowTester tester(kind, o.n1, n2, ji);
  write_analysis(dq::analyze_matrix(matrix.rows, matrix.ids, tester, options), o.out, o.format);
  return kOk;
}

int run_simulate(const Options& o, bool seed_given) {
  auto config = dq::parse_config(read_file(o.input));
  if (seed_given) config.seed = o.seed;
  const auto report = dq::run_monte_carlo(config, o.threads);
  if (o.out.empty() || o.out == "-") {
    std::cout << (o.format == "json" ? dq::report_to_json(report) : dq::report_to_csv(report));
    return kOk;
  }
  std::filesystem::path base(o.out);
  if (base.extension() == ".csv" || base.extension() == ".json") base.replace_extension();
  write_file(base.string() + ".csv", dq::report_to_csv(report));
  write_file(base.string() + ".json", dq::report_to_json(report));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  CLI::App app{"q-values for discrete uniform P-values"};
  app.require_subcommand(1);
  Options o;

  const std::vector<std::string> formats = {"csv", "json"};
  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output file (default: standard output)");
    sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember(formats));
  };
  auto add_methods = [&](CLI::App* sub) {
    sub->add_option("--methods,--method", o.methods,
                    "pi0 methods: SS, ST, Liang, Chen, Rand (comma separated)");
  };
  const auto prob = CLI::Range(0.0, 1.0);

  auto* nulldist = app.add_subcommand("nulldist", "Support of the exact null P-values of a test");
  nulldist->add_option("--test", o.test, "Test name")->required();
  nulldist->add_option("--n1", o.n1, "First sample size")->required()->check(CLI::Range(1, 64));
  nulldist->add_option("--n2", o.n2, "Second sample size")->check(CLI::Range(0, 64));
  add_output(nulldist);

  auto* pi0 = app.add_subcommand("pi0", "Estimate the proportion of true nulls");
  pi0->add_option("input", o.input, "P-value file")->required();
  pi0->add_option("--support", o.support, "uniform:N, <test>:<n1>:<n2> or a list of fractions");
  add_methods(pi0);
  pi0->add_option("--seed", o.seed, "Seed for Rand");
  add_output(pi0);

  auto* qvalue = app.add_subcommand("qvalue", "q-values of a list of P-values");
  qvalue->add_option("input", o.input, "P-value file")->required();
  qvalue->add_option("--support", o.support, "uniform:N, <test>:<n1>:<n2> or a list of fractions");
  add_methods(qvalue);
  qvalue->add_option("--alpha", o.alpha, "FDR level")->check(prob);
  qvalue->add_option("--alpha-grid", o.alpha_grid, "Levels for the rejection sweep (list or from:to:step)");
  qvalue->add_option("--seed", o.seed, "Seed for Rand");
  add_output(qvalue);

  auto* analyze = app.add_subcommand("analyze", "Test every row of a data matrix and compute q-values");
  analyze->add_option("input", o.input, "Matrix CSV: rows are variables, columns samples")->required();
  analyze->add_option("--test", o.test, "Test name")->required();
  analyze->add_option("--n1", o.n1, "Size of the first group (leading columns)")->required();
  analyze->add_option("--n2", o.n2, "Size of the second group (default: remaining columns)");
  analyze->add_option("--bandwidth", o.bandwidth, "Kernel bandwidth of the ji test")
      ->check(CLI::PositiveNumber);
  add_methods(analyze);
  analyze->add_option("--alpha", o.alpha, "FDR level")->check(prob);
  analyze->add_option("--alpha-grid", o.alpha_grid, "Levels for the rejection sweep (list or from:to:step)");
  analyze->add_option("--seed", o.seed, "Seed for Rand");
  add_output(analyze);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo study from a JSON scenario");
  simulate->add_option("config", o.input, "Scenario JSON")->required();
  auto* seed_opt = simulate->add_option("--seed", o.seed, "Override the configured seed");
  simulate->add_option("--threads", o.threads, "Worker threads (default: DQ_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--out", o.out, "Output prefix; writes <prefix>.csv and <prefix>.json");
  simulate->add_option("--format", o.format, "Format on standard output")->check(CLI::IsMember(formats));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*nulldist) return run_nulldist(o);
    if (*pi0) return run_pi0(o);
    if (*qvalue) return run_qvalue(o);
    if (*analyze) return run_analyze(o);
    if (*simulate) return run_simulate(o, seed_opt->count() > 0);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const dq::SnapError& e) {
    std::cerr << "error: P-value " << (e.index() + 1) << " (" << dq::format_decimal(e.value())
              << ") is not a point of the support\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}
