#include "dq/pvalue_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dq/error.hpp"

namespace dq {

SnapError::SnapError(std::size_t index, double value)
    : Error("value " + std::to_string(value) + " at index " + std::to_string(index) +
            " is not a support point"),
      index_(index),
      value_(value) {}

Support::Support(std::vector<Rational> points) : points_(std::move(points)) {
  if (points_.empty()) throw DomainError("support must contain at least one point");
  if (points_.front() <= Rational(0)) throw DomainError("support points must be positive");
  if (points_.back() != Rational(1)) throw DomainError("last support point must equal 1");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i - 1] < points_[i])) {
      throw DomainError("support points must be strictly increasing");
    }
  }
  values_.reserve(points_.size());
  for (const auto& p : points_) values_.push_back(p.to_double());
}

std::optional<std::size_t> Support::snap(double x) const noexcept {
  auto it = std::lower_bound(values_.begin(), values_.end(), x);
  std::optional<std::size_t> best;
  double best_dist = kSnapTolerance;
  auto consider = [&](std::vector<double>::const_iterator c) {
    const double d = std::abs(*c - x);
    if (d <= best_dist) {
      best_dist = d;
      best = static_cast<std::size_t>(c - values_.begin());
    }
  };
  if (it != values_.end()) consider(it);
  if (it != values_.begin()) consider(std::prev(it));
  return best;
}

std::optional<std::size_t> Support::floor_index(double x) const noexcept {
  auto it = std::upper_bound(values_.begin(), values_.end(), x);
  if (it == values_.begin()) return std::nullopt;
  return static_cast<std::size_t>(std::prev(it) - values_.begin());
}

double discrete_uniform_cdf(const Support& support, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("cdf argument outside [0,1]");
  if (x >= 1.0) return 1.0;
  const auto k = support.floor_index(x);
  return k ? support.value(*k) : 0.0;
}

Rational discrete_uniform_cdf(const Support& support, const Rational& x) {
  if (x < Rational(0) || x > Rational(1)) throw DomainError("cdf argument outside [0,1]");
  const auto pts = support.points();
  auto it = std::upper_bound(pts.begin(), pts.end(), x);
  if (it == pts.begin()) return Rational(0);
  return *std::prev(it);
}

Support classical_uniform_support(std::int64_t n_points) {
  if (n_points < 1) throw DomainError("classical support needs N >= 1");
  std::vector<Rational> pts;
  pts.reserve(static_cast<std::size_t>(n_points));
  for (std::int64_t k = 1; k <= n_points; ++k) pts.emplace_back(k, n_points);
  return Support(std::move(pts));
}

std::int64_t SupportFrequencies::m() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

std::int64_t SupportFrequencies::count_above(std::ptrdiff_t k) const noexcept {
  std::int64_t total = 0;
  for (std::size_t i = static_cast<std::size_t>(k + 1); i < counts.size(); ++i) total += counts[i];
  return total;
}

SupportFrequencies attach_and_tally(std::span<const double> values, const Support& support) {
  if (values.empty()) throw DomainError("cannot tally an empty sample");
  SupportFrequencies out{support, std::vector<std::int64_t>(support.size(), 0)};
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto k = support.snap(values[i]);
    if (!k) throw SnapError(i, values[i]);
    ++out.counts[*k];
  }
  return out;
}

namespace {

void check_probabilities(std::span<const double> values) {
  if (values.empty()) throw DomainError("empty P-value sample");
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!(v > 0.0 && v <= 1.0)) {
      throw DomainError("P-value " + std::to_string(v) + " at index " + std::to_string(i) +
                        " outside (0,1]");
    }
  }
}

}  // namespace

PValueSample::PValueSample(std::vector<double> values) : values_(std::move(values)) {
  check_probabilities(values_);
}

PValueSample::PValueSample(std::vector<double> values, Support support)
    : values_(std::move(values)), support_(std::move(support)) {
  if (values_.empty()) throw DomainError("empty P-value sample");
  index_.reserve(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const auto k = support_->snap(values_[i]);
    if (!k) throw SnapError(i, values_[i]);
    index_.push_back(*k);
    values_[i] = support_->value(*k);
  }
  check_probabilities(values_);
}

SupportFrequencies PValueSample::frequencies() const {
  if (!support_) throw DomainError("sample has no attached support");
  SupportFrequencies out{*support_, std::vector<std::int64_t>(support_->size(), 0)};
  for (auto k : index_) ++out.counts[k];
  return out;
}

}  // namespace dq
