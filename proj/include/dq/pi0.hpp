#pragma once

// Estimators of the proportion of true null hypotheses.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dq/pvalue_core.hpp"
#include "dq/rng.hpp"

namespace dq {

/// ss: Storey at lambda = 1/2. st: spline-smoothed Storey. liang: right-boundary
/// lambda on the support. chen: averaged truncated trial estimators. rand:
/// Storey on randomized P-values. real: the true value, known only in simulation.
enum class Pi0Method { ss, st, liang, chen, rand, real };

std::string_view to_string(Pi0Method method) noexcept;
/// Case-insensitive.
std::optional<Pi0Method> parse_pi0_method(std::string_view name) noexcept;
/// Liang, Chen and Rand need the support of the P-values.
bool needs_support(Pi0Method method) noexcept;

struct Pi0Estimate {
  double value = 1.0;  // min(raw, 1)
  double raw = 1.0;
  Pi0Method method = Pi0Method::ss;
  std::optional<double> lambda;
  /// Set when the estimator had to fall back (e.g. Liang with no candidate).
  bool fallback = false;
};

struct ChenParams {
  int guiding_count = 100;
};

struct RandParams {
  int replications = 100;
  double lambda = 0.5;
  std::uint64_t seed = 0;
};

/// (#{pv > lambda} + 1) / (m (1 - lambda)).
double storey_raw(std::span<const double> pvalues, double lambda);

Pi0Estimate storey_pi0(std::span<const double> pvalues, double lambda);
Pi0Estimate storey_pi0(const PValueSample& sample, double lambda);

/// lambda = 0, 0.01, ..., 0.95.
std::span<const double> st_lambda_grid();

/// Storey estimates on the grid, smoothed by a natural cubic smoothing spline
/// with 3 degrees of freedom and evaluated at lambda = 1. Needs m >= 10.
Pi0Estimate st_pi0(std::span<const double> pvalues);
Pi0Estimate st_pi0(const PValueSample& sample);

/// Right-boundary choice of lambda among support points <= 1/2 with baseline
/// lambda_0 = 0. Falls back to lambda = 0 when no candidate exists.
Pi0Estimate liang_pi0(const SupportFrequencies& freqs);

/// Average of truncated trial estimators over guiding values from
/// q + (0.5 - q) / 2 to 0.5, q the smallest support point.
Pi0Estimate chen_pi0(const SupportFrequencies& freqs, const ChenParams& params = {});

/// Randomized P-value pv - u (t_k - t_{k-1}) for every value of the sample,
/// each u drawn in order from the stream.
std::vector<double> randomize_pvalues(const PValueSample& sample, Rng& rng);

/// Storey at params.lambda on randomized P-values, averaged over
/// params.replications runs. Run j draws from the stream (seed, j).
Pi0Estimate randomized_pi0(const PValueSample& sample, const RandParams& params);

/// Dispatch for the support-free and support-based estimators. Methods that
/// need a support throw DomainError if the sample has none; `real` is rejected.
Pi0Estimate estimate_pi0(Pi0Method method, const PValueSample& sample,
                         const ChenParams& chen = {}, const RandParams& rand = {});

}  // namespace dq
