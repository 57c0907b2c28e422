#include "dq/qvalue.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "dq/error.hpp"

namespace dq {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
}

void check_pi0(double pi0) {
  if (!(pi0 > 0.0)) throw DomainError("pi0 must be positive");
}

std::vector<std::size_t> ascending_order(std::span<const double> p) {
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  return order;
}

}  // namespace

double estimate_fdr(std::span<const double> pvalues, double pi0, double t) {
  check_pi0(pi0);
  if (!(t > 0.0 && t <= 1.0)) throw DomainError("FDR threshold must lie in (0, 1]");
  const auto hits = std::count_if(pvalues.begin(), pvalues.end(), [t](double p) { return p <= t; });
  if (hits == 0) throw DomainError("no P-value at or below the threshold");
  return static_cast<double>(pvalues.size()) * pi0 * t / static_cast<double>(hits);
}

double estimate_fdr(const PValueSample& sample, const Pi0Estimate& pi0, double t) {
  return estimate_fdr(sample.values(), pi0.value, t);
}

std::vector<double> qvalues(std::span<const double> pvalues, double pi0) {
  check_pi0(pi0);
  const std::size_t m = pvalues.size();
  std::vector<double> q(m);
  if (m == 0) return q;
  const auto order = ascending_order(pvalues);
  const double scale = static_cast<double>(m) * pi0;
  double running = std::numeric_limits<double>::infinity();
  // Walk from the largest P-value down; a block of ties is assigned at once
  // with #{pv <= t} equal to the position of its last member.
  std::size_t end = m;
  while (end > 0) {
    std::size_t begin = end - 1;
    const double p = pvalues[order[begin]];
    while (begin > 0 && pvalues[order[begin - 1]] == p) --begin;
    running = std::min(running, scale * p / static_cast<double>(end));
    const double value = std::min(running, 1.0);
    for (std::size_t i = begin; i < end; ++i) q[order[i]] = value;
    end = begin;
  }
  return q;
}

QValueResult qvalues(const PValueSample& sample, const Pi0Estimate& pi0) {
  return QValueResult{qvalues(sample.values(), pi0.value), pi0};
}

RejectionReport reject(std::span<const double> q, double alpha) {
  check_alpha(alpha);
  RejectionReport r;
  r.alpha = alpha;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= alpha) r.rejected.push_back(i);
  }
  return r;
}

RejectionReport reject(const QValueResult& q, double alpha) { return reject(q.qvalues, alpha); }

RejectionReport adaptive_bh_reject(std::span<const double> pvalues, double pi0, double alpha) {
  check_alpha(alpha);
  check_pi0(pi0);
  const double level = std::min(alpha / pi0, 1.0);
  const std::size_t m = pvalues.size();
  const auto order = ascending_order(pvalues);
  std::size_t k = 0;
  for (std::size_t i = m; i > 0; --i) {
    if (pvalues[order[i - 1]] <= static_cast<double>(i) * level / static_cast<double>(m)) {
      k = i;
      break;
    }
  }
  RejectionReport r;
  r.alpha = alpha;
  // Everything tied with the k-th order statistic is rejected with it.
  const double cutoff = k > 0 ? pvalues[order[k - 1]] : -1.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (pvalues[i] <= cutoff) r.rejected.push_back(i);
  }
  return r;
}

RejectionReport adaptive_bh_reject(const PValueSample& sample, const Pi0Estimate& pi0,
                                   double alpha) {
  return adaptive_bh_reject(sample.values(), pi0.value, alpha);
}

}  // namespace dq
