#include "dq/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dq/error.hpp"
#include "dq/qvalue.hpp"

namespace dq {

RowTester::RowTester(TestKind test, int n1, int n2, JiConfig ji) : test_(test), n1_(n1), n2_(n2) {
  if (is_one_sample(test)) {
    if (n1 < 2) throw DomainError("one-sample tests need n1 >= 2");
    n2_ = 0;
    if (test == TestKind::signed_rank) {
      signed_.emplace(n1);
      support_ = signed_->support();
    }
    return;
  }
  if (n1 < 2 || n2 < 2) throw DomainError("each group needs at least 2 values");
  if (is_two_sample_permutation(test)) {
    PermutationOptions opts;
    opts.ji = ji;
    perm_.emplace(test, n1, n2, opts);
    support_ = perm_->support();
  }
}

std::optional<Rational> RowTester::exact_pvalue(std::span<const double> x,
                                                std::span<const double> y) const {
  if (perm_) return perm_->pvalue(x, y);
  if (signed_) return signed_->pvalue(x);
  return std::nullopt;
}

double RowTester::pvalue(std::span<const double> x, std::span<const double> y) const {
  if (auto exact = exact_pvalue(x, y)) return exact->to_double();
  auto two = [&] { return TwoSampleData({x.begin(), x.end()}, {y.begin(), y.end()}); };
  switch (test_) {
    case TestKind::t_one_sample: return one_sample_t_test(x);
    case TestKind::t_pooled: return t_test(two(), TVariant::pooled);
    case TestKind::t_welch: return t_test(two(), TVariant::welch);
    case TestKind::f: return f_test(two());
    case TestKind::levene: return levene_test(two());
    default: break;
  }
  throw DomainError("unsupported test: " + std::string(to_string(test_)));
}

namespace {

void check_options(const AnalysisOptions& options) {
  if (options.methods.empty()) throw DomainError("at least one pi0 method is required");
  if (!(options.alpha > 0.0 && options.alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
  for (double a : options.alpha_grid) {
    if (!(a > 0.0 && a <= 1.0)) throw DomainError("alpha grid values must lie in (0, 1]");
  }
  for (auto method : options.methods) {
    if (method == Pi0Method::real) throw DomainError("Real is available only in simulations");
  }
}

std::vector<MethodResult> run_methods(const PValueSample& sample, const AnalysisOptions& options) {
  RandParams rand;
  rand.seed = options.seed;
  rand.replications = options.rand_replications;
  std::vector<MethodResult> out;
  for (auto method : options.methods) {
    MethodResult r;
    r.pi0 = estimate_pi0(method, sample, options.chen, rand);
    r.qvalues = qvalues(sample.values(), r.pi0.value);
    const auto rep = reject(r.qvalues, options.alpha);
    r.rejected.assign(sample.m(), false);
    for (auto i : rep.rejected) r.rejected[i] = true;
    r.rejections = rep.count();
    for (double a : options.alpha_grid) r.sweep.push_back(reject(r.qvalues, a).count());
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

AnalysisResult analyze_pvalues(std::vector<double> pvalues, std::optional<Support> support,
                               const AnalysisOptions& options) {
  check_options(options);
  AnalysisResult result;
  result.alpha = options.alpha;
  result.alpha_grid = options.alpha_grid;
  result.support = support;
  const PValueSample sample = support ? PValueSample(pvalues, *support) : PValueSample(pvalues);
  result.variables.resize(sample.m());
  for (std::size_t i = 0; i < sample.m(); ++i) {
    auto& v = result.variables[i];
    v.id = std::to_string(i + 1);
    v.pvalue = sample.values()[i];
    if (support) v.exact = (*support)[sample.support_index()[i]];
  }
  result.methods = run_methods(sample, options);
  return result;
}

AnalysisResult analyze_matrix(std::span<const std::vector<double>> rows,
                              std::span<const std::string> ids, const RowTester& tester,
                              const AnalysisOptions& options) {
  check_options(options);
  if (rows.empty()) throw DomainError("no variables to analyze");
  if (!ids.empty() && ids.size() != rows.size()) throw DomainError("one id per row is required");
  const auto n1 = static_cast<std::size_t>(tester.n1());
  const auto n2 = static_cast<std::size_t>(tester.n2());

  AnalysisResult result;
  result.alpha = options.alpha;
  result.alpha_grid = options.alpha_grid;
  result.support = tester.support();
  result.variables.resize(rows.size());

  std::vector<double> valid;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& v = result.variables[i];
    v.id = ids.empty() ? std::to_string(i + 1) : ids[i];
    const auto& row = rows[i];
    if (row.size() != n1 + n2) {
      v.error = "expected " + std::to_string(n1 + n2) + " values, got " + std::to_string(row.size());
      continue;
    }
    const std::span<const double> all(row);
    const auto x = all.first(n1);
    const auto y = all.subspan(n1);
    try {
      v.exact = tester.exact_pvalue(x, y);
      v.pvalue = v.exact ? v.exact->to_double() : tester.pvalue(x, y);
      valid.push_back(*v.pvalue);
      where.push_back(i);
    } catch (const Error& e) {
      v.exact.reset();
      v.error = e.what();
    }
  }
  if (valid.empty()) throw DomainError("no variable produced a P-value");

  const PValueSample sample = result.support ? PValueSample(valid, *result.support)
                                             : PValueSample(valid);
  auto methods = run_methods(sample, options);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (auto& m : methods) {
    std::vector<double> q(rows.size(), nan);
    std::vector<bool> rej(rows.size(), false);
    for (std::size_t k = 0; k < where.size(); ++k) {
      q[where[k]] = m.qvalues[k];
      rej[where[k]] = m.rejected[k];
    }
    m.qvalues = std::move(q);
    m.rejected = std::move(rej);
  }
  result.methods = std::move(methods);
  return result;
}

}  // namespace dq
