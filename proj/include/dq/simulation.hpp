#pragma once

// Monte Carlo study of q-value methods: VAR(1)-dependent samples, mixture
// scenarios with a known set of true nulls, and FDR / power / pi0 summaries.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dq/exact_tests.hpp"
#include "dq/pi0.hpp"
#include "dq/rng.hpp"

namespace dq {

/// Lower-bidiagonal VAR(1) coefficient matrix: `diag` on the diagonal and
/// `subdiag` on the first subdiagonal.
struct DependenceSpec {
  enum class Kind { independent, dependent };
  Kind kind = Kind::independent;
  double diag = 0.0;
  double subdiag = 0.0;

  static DependenceSpec independent() { return {Kind::independent, 0.0, 0.0}; }
  static DependenceSpec dependent() { return {Kind::dependent, 0.5, 0.4}; }

  Eigen::MatrixXd matrix(int eta) const;

  friend bool operator==(const DependenceSpec&, const DependenceSpec&) = default;
};

std::string_view to_string(DependenceSpec::Kind kind) noexcept;

/// location, scale and shape pick one of the four-density collections used
/// for two-sample designs; one_sample draws N(0,1) nulls and N(mu,1)
/// alternatives for a single group.
enum class Family { location, scale, shape, one_sample };

std::string_view to_string(Family family) noexcept;
std::optional<Family> parse_family(std::string_view name) noexcept;

struct ScenarioConfig {
  Family family = Family::location;
  double mu = 2.0;
  int m = 100;
  int n1 = 5;
  int n2 = 5;
  double delta = 0.5;
  DependenceSpec dependence = DependenceSpec::independent();
  TestKind test = TestKind::wilcoxon;
  int replicates = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::vector<Pi0Method> methods = {Pi0Method::ss, Pi0Method::st, Pi0Method::liang,
                                    Pi0Method::chen, Pi0Method::rand, Pi0Method::real};
  JiConfig ji;

  double pi0() const noexcept { return 1.0 - delta; }
  /// Throws DomainError describing the first violated constraint.
  void validate() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

struct MethodSummary {
  Pi0Method method = Pi0Method::ss;
  double fdr = 0.0;
  std::optional<double> power;    // absent when no replicate had a false null
  double pi0_bias = 0.0;
  std::optional<double> pi0_sd;   // absent for a single replicate
  double mean_rejections = 0.0;

  friend bool operator==(const MethodSummary&, const MethodSummary&) = default;
};

struct McReport {
  ScenarioConfig config;
  std::vector<MethodSummary> methods;

  const MethodSummary* find(Pi0Method method) const noexcept;

  friend bool operator==(const McReport&, const McReport&) = default;
};

/// Fixed point of S = M^T S M + I starting from S = I. ConvergenceError when
/// the iteration does not settle (spectral radius of M >= 1).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a);

/// Symmetric M with M S M = I, from the eigendecomposition of S.
Eigen::MatrixXd sym_inv_sqrt(const Eigen::MatrixXd& sigma);

/// Draws m consecutive VAR(1) states of dimension eta, started from the
/// stationary law and whitened so every row is marginally N(0, I).
class GroupGenerator {
 public:
  GroupGenerator(const DependenceSpec& spec, int eta);
  Eigen::MatrixXd generate(int m, Rng& rng) const;

  const Eigen::MatrixXd& stationary_covariance() const noexcept { return sigma_; }

 private:
  int eta_;
  Eigen::MatrixXd a_;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd sigma_chol_;
  Eigen::MatrixXd whitening_;
};

Eigen::MatrixXd generate_group(const DependenceSpec& spec, int eta, int m, Rng& rng);

struct ScenarioData {
  Eigen::MatrixXd x;               // m x n1
  Eigen::MatrixXd y;               // m x n2 (empty for one-sample designs)
  std::vector<int> x_density;      // I_i in 1..4 (1..2 for one-sample)
  std::vector<int> y_density;      // L_i
  std::vector<bool> null_mask;     // I_i == L_i
};

/// One draw of the mixture design. Uses three sub-streams of (seed, replicate).
ScenarioData generate_scenario(const ScenarioConfig& config, std::uint64_t replicate);

/// P-values of every variable for one replicate (support attached for
/// discrete tests) together with the truth.
struct ReplicatePValues {
  std::vector<double> pvalues;
  std::optional<Support> support;
  std::vector<bool> null_mask;
};

ReplicatePValues replicate_pvalues(const ScenarioConfig& config, std::uint64_t replicate);

/// Worker count from DQ_THREADS, else the hardware concurrency.
int default_thread_count();

/// Runs config.replicates independent replicates on `threads` workers
/// (0 = default_thread_count()). Output is bit-identical for any thread count.
McReport run_monte_carlo(const ScenarioConfig& config, int threads = 0);

}  // namespace dq
