#pragma once

// Plug-in FDR estimation, q-values and the equivalent adaptive BH rule.

#include <cstddef>
#include <span>
#include <vector>

#include "dq/pi0.hpp"
#include "dq/pvalue_core.hpp"

namespace dq {

struct QValueResult {
  std::vector<double> qvalues;  // aligned with the input order
  Pi0Estimate pi0_used;
};

struct RejectionReport {
  double alpha = 0.05;
  std::vector<std::size_t> rejected;  // ascending indices
  std::size_t count() const noexcept { return rejected.size(); }
};

/// m * pi0 * t / #{pv <= t}. DomainError when no P-value is <= t.
double estimate_fdr(std::span<const double> pvalues, double pi0, double t);
double estimate_fdr(const PValueSample& sample, const Pi0Estimate& pi0, double t);

/// Minimum of the estimated FDR over observed thresholds t >= pv_i, capped at
/// 1. Tied P-values share one q-value.
std::vector<double> qvalues(std::span<const double> pvalues, double pi0);
QValueResult qvalues(const PValueSample& sample, const Pi0Estimate& pi0);

/// {i : q_i <= alpha}.
RejectionReport reject(std::span<const double> qvalues, double alpha);
RejectionReport reject(const QValueResult& q, double alpha);

/// Benjamini-Hochberg step-up at level min(alpha / pi0, 1).
RejectionReport adaptive_bh_reject(std::span<const double> pvalues, double pi0, double alpha);
RejectionReport adaptive_bh_reject(const PValueSample& sample, const Pi0Estimate& pi0,
                                   double alpha);

}  // namespace dq
