#pragma once

// Natural cubic smoothing splines with the smoothing parameter chosen to hit
// a target equivalent degrees of freedom (trace of the smoother matrix).

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace dq {

/// A natural cubic spline given by its values and second derivatives at the
/// knots. Linear beyond the boundary knots.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::vector<double> knots, std::vector<double> values,
                     std::vector<double> second_derivatives);

  double operator()(double x) const;
  double derivative(double x) const;

  std::span<const double> knots() const noexcept { return knots_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> second_derivatives() const noexcept { return gamma_; }

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<double> gamma_;
};

/// Penalized least squares sum (y_i - f(x_i))^2 + penalty * int f''^2 over
/// natural cubic splines with knots at xs, prepared for one design.
class SplineSmoother {
 public:
  /// xs strictly increasing, at least 4 points; 2 < target_df < xs.size().
  /// Throws ConvergenceError if the target cannot be bracketed.
  SplineSmoother(std::vector<double> xs, double target_df);

  NaturalCubicSpline fit(std::span<const double> ys) const;

  double penalty() const noexcept { return penalty_; }
  /// Trace of the smoother matrix at the chosen penalty.
  double trace() const noexcept { return trace_at(penalty_); }
  double trace_at(double penalty) const noexcept;

  /// The n x n matrix S with fitted values S y.
  Eigen::MatrixXd smoother_matrix() const;
  /// Roughness matrix K = Q R^-1 Q^T, so that S = (I + penalty K)^-1.
  const Eigen::MatrixXd& roughness() const noexcept { return roughness_; }

 private:
  std::vector<double> xs_;
  Eigen::MatrixXd roughness_;
  Eigen::MatrixXd eigvecs_;
  Eigen::VectorXd eigvals_;
  Eigen::MatrixXd gamma_map_;  // R^-1 Q^T
  double penalty_ = 0.0;
};

/// One-shot convenience wrapper around SplineSmoother.
NaturalCubicSpline fit_smoothing_spline(std::span<const double> xs, std::span<const double> ys,
                                        double target_df);

}  // namespace dq
