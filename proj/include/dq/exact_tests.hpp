#pragma once

// Two-sample and one-sample tests. Nonparametric tests use the exact
// permutation null obtained by enumerating every label assignment, which
// yields discrete uniform P-values; parametric tests give continuous ones.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dq/pvalue_core.hpp"
#include "dq/rational.hpp"

namespace dq {

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

enum class TestKind {
  wilcoxon,
  ks,
  abs_mean,
  ji,
  siegel_tukey,
  ansari_bradley,
  t_pooled,
  t_welch,
  f,
  levene,
  t_one_sample,
  signed_rank,
};

/// Canonical names: wilcoxon, ks, abs, ji, siegel_tukey, ansari_bradley, t,
/// welch, f, levene, t1, signed_rank. A few aliases are accepted on parse.
std::string_view to_string(TestKind kind) noexcept;
std::optional<TestKind> parse_test_kind(std::string_view name) noexcept;

/// Depends on the data only through the ranks of the pooled sample.
bool is_rank_based(TestKind kind) noexcept;
/// Produces discrete (permutation) P-values.
bool is_discrete(TestKind kind) noexcept;
bool is_one_sample(TestKind kind) noexcept;
bool is_two_sample_permutation(TestKind kind) noexcept;

/// Two independent samples, each of size >= 2.
class TwoSampleData {
 public:
  TwoSampleData(std::vector<double> x, std::vector<double> y);
  std::span<const double> x() const noexcept { return x_; }
  std::span<const double> y() const noexcept { return y_; }
  std::size_t n1() const noexcept { return x_.size(); }
  std::size_t n2() const noexcept { return y_.size(); }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

/// Gaussian-kernel bandwidth of the J statistic.
struct JiConfig {
  double bandwidth = 1.0;

  friend bool operator==(const JiConfig&, const JiConfig&) = default;
};

struct PermutationOptions {
  JiConfig ji;
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
};

/// Enumerated permutation law of a rank statistic: distinct statistic values
/// in increasing order and the exact upper-tail probability P(T >= value).
struct ExactNull {
  std::vector<double> statistic_values;
  std::vector<Rational> tail_prob;
  std::uint64_t n_assignments = 0;
};

/// Binomial coefficient, saturating at UINT64_MAX.
std::uint64_t binomial(int n, int k) noexcept;

/// Exact permutation P-value P(T_perm >= T_obs) over all C(n1+n2, n1)
/// assignments. Rank statistics (wilcoxon, siegel_tukey, ansari_bradley) are
/// folded about their permutation mean; ks, abs and ji are used as is.
/// Throws TieError for tied pooled values under rank statistics and
/// SizeError above the enumeration cap.
Rational perm_pvalue(const TwoSampleData& data, TestKind statistic,
                     const PermutationOptions& options = {});

/// Null law of a rank statistic for sample sizes (n1, n2).
ExactNull exact_null(TestKind statistic, int n1, int n2,
                     std::uint64_t cap = kDefaultEnumerationCap);

/// Attainable P-values of a rank statistic for sample sizes (n1, n2).
Support exact_support(TestKind statistic, int n1, int n2,
                      std::uint64_t cap = kDefaultEnumerationCap);

/// Support of a data-dependent permutation test (abs, ji) for continuous
/// data: {1/N, ..., 1} with N = C(n1+n2, n1), halved when n1 == n2 because
/// the statistic is invariant under swapping the groups.
Support generic_permutation_support(int n1, int n2, std::uint64_t cap = kDefaultEnumerationCap);

/// Support of the P-values of `kind` at the given sizes; nullopt for
/// parametric tests.
std::optional<Support> pvalue_support(TestKind kind, int n1, int n2,
                                      std::uint64_t cap = kDefaultEnumerationCap);

/// L2 distance between Gaussian kernel density estimates of the two samples.
double ji_statistic(const TwoSampleData& data, const JiConfig& config);

enum class TVariant { pooled, welch };

/// Two-sided two-sample t-test. DegenerateError when the variance estimate is 0.
double t_test(const TwoSampleData& data, TVariant variant);

/// Two-sided F-test of equal variances: 2 min(P(F <= f), P(F >= f)), capped at 1.
double f_test(const TwoSampleData& data);

/// Levene test (absolute deviations from group means), F(1, n1+n2-2) reference.
double levene_test(const TwoSampleData& data);

/// Two-sided one-sample t-test of zero mean.
double one_sample_t_test(std::span<const double> sample);

/// Exact two-sided Wilcoxon signed-rank test over all 2^n sign patterns.
Rational signed_rank_test(std::span<const double> sample,
                          std::uint64_t cap = kDefaultEnumerationCap);

ExactNull signed_rank_null(int n, std::uint64_t cap = kDefaultEnumerationCap);
Support signed_rank_support(int n, std::uint64_t cap = kDefaultEnumerationCap);

/// Reusable test for fixed sample sizes. Rank statistics look up a null
/// table built once; abs and ji enumerate a shared assignment list per call.
class PermutationTest {
 public:
  PermutationTest(TestKind kind, int n1, int n2, PermutationOptions options = {});

  TestKind kind() const noexcept { return kind_; }
  const Support& support() const noexcept { return support_; }
  Rational pvalue(std::span<const double> x, std::span<const double> y) const;

 private:
  TestKind kind_;
  int n1_;
  int n2_;
  PermutationOptions options_;
  Support support_;
  std::uint64_t total_ = 0;
  std::vector<std::int64_t> keys_;
  std::vector<std::uint64_t> tail_counts_;
};

/// Reusable exact signed-rank test for a fixed sample size.
class SignedRankTest {
 public:
  explicit SignedRankTest(int n, std::uint64_t cap = kDefaultEnumerationCap);
  const Support& support() const noexcept { return support_; }
  Rational pvalue(std::span<const double> sample) const;

 private:
  int n_;
  Support support_;
  std::uint64_t total_ = 0;
  std::vector<std::int64_t> keys_;
  std::vector<std::uint64_t> tail_counts_;
};

}  // namespace dq
