#pragma once

// Discrete uniform P-value laws and validated P-value samples.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dq/rational.hpp"

namespace dq {

/// Absolute tolerance used when matching floating P-values to support points.
inline constexpr double kSnapTolerance = 1e-9;

/// Support A = {t_1 < ... < t_{s+1} = 1} of a discrete uniform P-value law.
/// The implicit t_0 = 0 is not stored.
class Support {
 public:
  /// Throws DomainError unless points are strictly increasing, in (0,1] and
  /// end at exactly 1.
  explicit Support(std::vector<Rational> points);

  std::span<const Rational> points() const noexcept { return points_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return points_.size(); }
  const Rational& operator[](std::size_t i) const { return points_[i]; }
  double value(std::size_t i) const { return values_[i]; }

  /// t_{i-1} as a double, with t_{-1} == 0 for the first point.
  double previous_value(std::size_t i) const { return i == 0 ? 0.0 : values_[i - 1]; }

  /// Index of the support point within kSnapTolerance of `x`, if any.
  std::optional<std::size_t> snap(double x) const noexcept;

  /// Index of the largest point <= x (exact comparison), if any.
  std::optional<std::size_t> floor_index(double x) const noexcept;

  friend bool operator==(const Support& a, const Support& b) { return a.points_ == b.points_; }

 private:
  std::vector<Rational> points_;
  std::vector<double> values_;
};

/// H_A(x): 0 below t_1, t_j on [t_j, t_{j+1}), 1 at and above 1.
double discrete_uniform_cdf(const Support& support, double x);

/// Exact variant for rational arguments.
Rational discrete_uniform_cdf(const Support& support, const Rational& x);

/// {1/N, 2/N, ..., N/N}.
Support classical_uniform_support(std::int64_t n_points);

/// Counts b_i of each support point in a sample.
struct SupportFrequencies {
  Support support;
  std::vector<std::int64_t> counts;

  std::int64_t m() const noexcept;
  /// #{pv > t_k} computed from the counts (k indexes the support; k == -1 means t_0 = 0).
  std::int64_t count_above(std::ptrdiff_t k) const noexcept;
};

/// Snaps every value onto the support and tallies. Throws SnapError on the
/// first value that matches no support point, DomainError on empty input.
SupportFrequencies attach_and_tally(std::span<const double> values, const Support& support);

/// m observed P-values, each in (0,1], optionally snapped to a common support.
class PValueSample {
 public:
  explicit PValueSample(std::vector<double> values);
  PValueSample(std::vector<double> values, Support support);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t m() const noexcept { return values_.size(); }
  const std::optional<Support>& support() const noexcept { return support_; }
  /// Support index of each value; empty when no support is attached.
  std::span<const std::size_t> support_index() const noexcept { return index_; }

  SupportFrequencies frequencies() const;

 private:
  std::vector<double> values_;
  std::optional<Support> support_;
  std::vector<std::size_t> index_;
};

}  // namespace dq
