#include "dq/spline.hpp"

#include <algorithm>
#include <cmath>

#include "dq/error.hpp"

namespace dq {

NaturalCubicSpline::NaturalCubicSpline(std::vector<double> knots, std::vector<double> values,
                                       std::vector<double> second_derivatives)
    : knots_(std::move(knots)), values_(std::move(values)), gamma_(std::move(second_derivatives)) {
  if (knots_.size() < 2 || values_.size() != knots_.size() || gamma_.size() != knots_.size()) {
    throw DomainError("inconsistent spline representation");
  }
}

double NaturalCubicSpline::operator()(double x) const {
  const std::size_t n = knots_.size();
  if (x <= knots_.front()) return values_.front() + derivative(knots_.front()) * (x - knots_.front());
  if (x >= knots_.back()) return values_.back() + derivative(knots_.back()) * (x - knots_.back());
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
  const std::size_t j = std::min(i + 1, n - 1);
  const double h = knots_[j] - knots_[i];
  const double a = x - knots_[i];
  const double b = knots_[j] - x;
  return (a * values_[j] + b * values_[i]) / h -
         a * b / 6.0 * ((1.0 + a / h) * gamma_[j] + (1.0 + b / h) * gamma_[i]);
}

double NaturalCubicSpline::derivative(double x) const {
  const std::size_t n = knots_.size();
  // Beyond the boundary knots the spline is linear with the end slope.
  const double xc = std::clamp(x, knots_.front(), knots_.back());
  auto it = std::upper_bound(knots_.begin(), knots_.end(), xc);
  std::size_t i = static_cast<std::size_t>(it - knots_.begin());
  i = std::clamp<std::size_t>(i, 1, n - 1) - 1;
  const double h = knots_[i + 1] - knots_[i];
  const double a = xc - knots_[i];
  const double b = knots_[i + 1] - xc;
  return (values_[i + 1] - values_[i]) / h -
         gamma_[i + 1] / 6.0 * (b - a + (2.0 * a * b - a * a) / h) -
         gamma_[i] / 6.0 * (b - a + (b * b - 2.0 * a * b) / h);
}

SplineSmoother::SplineSmoother(std::vector<double> xs, double target_df) : xs_(std::move(xs)) {
  const auto n = static_cast<Eigen::Index>(xs_.size());
  if (n < 4) throw DomainError("smoothing spline needs at least 4 points");
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(xs_[static_cast<std::size_t>(i)] > xs_[static_cast<std::size_t>(i - 1)])) {
      throw DomainError("smoothing spline abscissae must be strictly increasing");
    }
  }
  if (!(target_df > 2.0 && target_df < static_cast<double>(n))) {
    throw DomainError("target degrees of freedom must lie in (2, n)");
  }

  std::vector<double> h(static_cast<std::size_t>(n - 1));
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    h[static_cast<std::size_t>(i)] = xs_[static_cast<std::size_t>(i + 1)] - xs_[static_cast<std::size_t>(i)];
  }
  // Band matrices of the natural-spline roughness penalty (interior knots
  // j = 1..n-2 map to columns 0..n-3).
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n - 2);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n - 2, n - 2);
  for (Eigen::Index j = 1; j + 1 < n; ++j) {
    const double hl = h[static_cast<std::size_t>(j - 1)];
    const double hr = h[static_cast<std::size_t>(j)];
    const Eigen::Index c = j - 1;
    q(j - 1, c) = 1.0 / hl;
    q(j, c) = -1.0 / hl - 1.0 / hr;
    q(j + 1, c) = 1.0 / hr;
    r(c, c) = (hl + hr) / 3.0;
    if (c + 1 < n - 2) {
      r(c, c + 1) = hr / 6.0;
      r(c + 1, c) = hr / 6.0;
    }
  }
  const Eigen::LLT<Eigen::MatrixXd> r_chol(r);
  if (r_chol.info() != Eigen::Success) throw ConvergenceError("spline band matrix is singular");
  gamma_map_ = r_chol.solve(q.transpose());
  roughness_ = q * gamma_map_;
  roughness_ = 0.5 * (roughness_ + roughness_.transpose());

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(roughness_);
  if (eig.info() != Eigen::Success) throw ConvergenceError("spline eigendecomposition failed");
  eigvecs_ = eig.eigenvectors();
  eigvals_ = eig.eigenvalues().cwiseMax(0.0);
  // K has the affine functions as its null space; zero out the rounding
  // noise on those two eigenvalues.
  const double top = eigvals_.maxCoeff();
  for (auto& e : eigvals_) {
    if (e < 1e-12 * top) e = 0.0;
  }

  // trace_at is decreasing in the penalty: from n at 0 to 2 at infinity.
  const double dmax = eigvals_.maxCoeff();
  double lo = 1e-8 / dmax;
  double hi = 1e8 / dmax;
  int expansions = 0;
  while (trace_at(lo) < target_df) {
    lo /= 1e4;
    if (++expansions > 20) throw ConvergenceError("cannot bracket the target degrees of freedom");
  }
  expansions = 0;
  while (trace_at(hi) > target_df) {
    hi *= 1e4;
    if (++expansions > 40) throw ConvergenceError("cannot bracket the target degrees of freedom");
  }
  double log_lo = std::log(lo);
  double log_hi = std::log(hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (log_lo + log_hi);
    const double tr = trace_at(std::exp(mid));
    if (tr > target_df) {
      log_lo = mid;
    } else {
      log_hi = mid;
    }
    if (std::abs(tr - target_df) < 1e-10) break;
  }
  penalty_ = std::exp(0.5 * (log_lo + log_hi));
  if (std::abs(trace_at(penalty_) - target_df) > 1e-6) {
    throw ConvergenceError("smoothing parameter search did not reach the target");
  }
}

double SplineSmoother::trace_at(double penalty) const noexcept {
  double tr = 0.0;
  for (Eigen::Index k = 0; k < eigvals_.size(); ++k) tr += 1.0 / (1.0 + penalty * eigvals_(k));
  return tr;
}

Eigen::MatrixXd SplineSmoother::smoother_matrix() const {
  const Eigen::VectorXd shrink = (1.0 + penalty_ * eigvals_.array()).inverse().matrix();
  return eigvecs_ * shrink.asDiagonal() * eigvecs_.transpose();
}

NaturalCubicSpline SplineSmoother::fit(std::span<const double> ys) const {
  const auto n = static_cast<Eigen::Index>(xs_.size());
  if (static_cast<Eigen::Index>(ys.size()) != n) throw DomainError("ys length must match xs");
  const Eigen::Map<const Eigen::VectorXd> y(ys.data(), n);
  const Eigen::VectorXd shrink = (1.0 + penalty_ * eigvals_.array()).inverse().matrix();
  const Eigen::VectorXd g = eigvecs_ * shrink.cwiseProduct(eigvecs_.transpose() * y);
  const Eigen::VectorXd inner = gamma_map_ * g;
  std::vector<double> gamma(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index i = 0; i < inner.size(); ++i) gamma[static_cast<std::size_t>(i + 1)] = inner(i);
  return NaturalCubicSpline(xs_, std::vector<double>(g.data(), g.data() + n), std::move(gamma));
}

NaturalCubicSpline fit_smoothing_spline(std::span<const double> xs, std::span<const double> ys,
                                        double target_df) {
  return SplineSmoother(std::vector<double>(xs.begin(), xs.end()), target_df).fit(ys);
}

}  // namespace dq
