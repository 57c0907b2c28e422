#pragma once

// Per-variable testing of a data matrix followed by pi0 estimation and
// q-values for each requested method.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dq/exact_tests.hpp"
#include "dq/pi0.hpp"
#include "dq/pvalue_core.hpp"
#include "dq/rational.hpp"

namespace dq {

/// Applies one test to many rows of fixed sample sizes. For one-sample tests
/// n2 is 0 and the second span is ignored.
class RowTester {
 public:
  RowTester(TestKind test, int n1, int n2, JiConfig ji = {});

  TestKind test() const noexcept { return test_; }
  int n1() const noexcept { return n1_; }
  int n2() const noexcept { return n2_; }
  /// Support of the P-values, nullopt for parametric tests.
  const std::optional<Support>& support() const noexcept { return support_; }

  /// Exact P-value for permutation tests, nullopt for parametric ones.
  std::optional<Rational> exact_pvalue(std::span<const double> x, std::span<const double> y) const;
  double pvalue(std::span<const double> x, std::span<const double> y) const;

 private:
  TestKind test_;
  int n1_;
  int n2_;
  std::optional<PermutationTest> perm_;
  std::optional<SignedRankTest> signed_;
  std::optional<Support> support_;
};

struct AnalysisOptions {
  std::vector<Pi0Method> methods = {Pi0Method::ss, Pi0Method::st, Pi0Method::liang,
                                    Pi0Method::chen, Pi0Method::rand};
  double alpha = 0.05;
  /// Optional alpha sweep; rejection counts are reported for each level.
  std::vector<double> alpha_grid;
  std::uint64_t seed = 1;  // stream for Rand
  ChenParams chen;
  int rand_replications = 100;
};

struct VariableResult {
  std::string id;
  std::optional<double> pvalue;   // absent when the test failed
  std::optional<Rational> exact;  // exact P-value for permutation tests
  std::string error;              // reason the test failed
};

struct MethodResult {
  Pi0Estimate pi0;
  std::vector<double> qvalues;    // aligned with variables, NaN where the test failed
  std::vector<bool> rejected;
  std::size_t rejections = 0;
  std::vector<std::size_t> sweep;  // rejections at each alpha_grid level
};

struct AnalysisResult {
  std::vector<VariableResult> variables;
  std::optional<Support> support;
  double alpha = 0.05;
  std::vector<double> alpha_grid;
  std::vector<MethodResult> methods;
};

/// q-value analysis of given P-values (all must be valid).
AnalysisResult analyze_pvalues(std::vector<double> pvalues, std::optional<Support> support,
                               const AnalysisOptions& options);

/// Tests each row (first n1 values versus the remaining n2) and runs the
/// q-value analysis on the rows that produced a P-value. Rows whose test
/// fails (ties, degenerate variance) are reported with an error and
/// excluded. ids may be empty, in which case rows are numbered from 1.
AnalysisResult analyze_matrix(std::span<const std::vector<double>> rows,
                              std::span<const std::string> ids, const RowTester& tester,
                              const AnalysisOptions& options);

}  // namespace dq
