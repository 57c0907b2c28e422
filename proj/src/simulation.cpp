#include "dq/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "dq/analysis.hpp"
#include "dq/error.hpp"
#include "dq/qvalue.hpp"
#include "dq/special.hpp"

namespace dq {

namespace {

// Sub-stream identifiers within one replicate.
enum Stream : std::uint64_t { kLabels = 0, kGroupX = 1, kGroupY = 2, kRandomized = 3 };

struct Density {
  enum class Kind { normal, exponential };
  Kind kind;
  double a;  // mean, or rate
  double b;  // standard deviation (normal only)

  // F^{-1}(Phi(z)). For normals this is exactly mean + sd * z, written that
  // way to avoid the round trip through the cdf.
  double transform(double z) const {
    if (kind == Kind::normal) return a + b * z;
    return -std::log(normal_cdf(-z)) / a;
  }
};

Density normal(double mean, double variance) { return {Density::Kind::normal, mean, std::sqrt(variance)}; }
Density exponential(double rate) { return {Density::Kind::exponential, rate, 0.0}; }

// Densities f_1..f_4 (index 0..3), or f_1, f_2 for one-sample designs.
std::vector<Density> densities(const ScenarioConfig& c) {
  switch (c.family) {
    case Family::location:
      return {normal(0, 1), normal(0, 0.25), normal(c.mu, 1), normal(c.mu, 0.25)};
    case Family::scale:
      return {normal(0, 0.25), normal(3, 0.25), normal(0, 4), normal(3, 9)};
    case Family::shape:
      return {normal(2.5, 0.25), normal(3.5, 0.25), exponential(0.5), exponential(1.0 / 3.0)};
    case Family::one_sample:
      return {normal(0, 1), normal(c.mu, 1)};
  }
  return {};
}

// Alternative partner of each density: 1 <-> 3, 2 <-> 4.
constexpr int partner(int density) { return density <= 2 ? density + 2 : density - 2; }

std::vector<double> row_pvalues(const RowTester& tester, const ScenarioData& d) {
  const auto m = static_cast<std::size_t>(d.x.rows());
  std::vector<double> out(m);
  std::vector<double> x(static_cast<std::size_t>(d.x.cols()));
  std::vector<double> y(static_cast<std::size_t>(d.y.cols()));
  for (std::size_t i = 0; i < m; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = d.x(row, static_cast<Eigen::Index>(j));
    for (std::size_t j = 0; j < y.size(); ++j) y[j] = d.y(row, static_cast<Eigen::Index>(j));
    out[i] = tester.pvalue(x, y);
  }
  return out;
}

RowTester make_tester(const ScenarioConfig& c) {
  return RowTester(c.test, c.n1, is_one_sample(c.test) ? 0 : c.n2, c.ji);
}

struct MethodRecord {
  double fdr = 0.0;
  double power = 0.0;
  bool has_power = false;
  double pi0 = 0.0;
  std::int64_t rejections = 0;
};

std::vector<MethodRecord> run_replicate(const ScenarioConfig& c, const RowTester& tester,
                                        std::uint64_t replicate) {
  const auto data = generate_scenario(c, replicate);
  auto p = row_pvalues(tester, data);
  const PValueSample sample = tester.support() ? PValueSample(std::move(p), *tester.support())
                                               : PValueSample(std::move(p));
  const auto m1 = std::count(data.null_mask.begin(), data.null_mask.end(), false);

  RandParams rand;
  rand.seed = derive_seed(c.seed, {replicate, kRandomized});

  std::vector<MethodRecord> out;
  out.reserve(c.methods.size());
  for (auto method : c.methods) {
    double pi0;
    if (method == Pi0Method::real) {
      pi0 = c.pi0();
    } else {
      pi0 = estimate_pi0(method, sample, ChenParams{}, rand).value;
    }
    const auto q = qvalues(sample.values(), pi0);
    const auto rejected = reject(q, c.alpha);
    std::int64_t v = 0;
    for (auto i : rejected.rejected) v += data.null_mask[i] ? 1 : 0;
    const auto r = static_cast<std::int64_t>(rejected.count());
    MethodRecord rec;
    rec.fdr = static_cast<double>(v) / static_cast<double>(std::max<std::int64_t>(r, 1));
    rec.has_power = m1 > 0;
    rec.power = m1 > 0 ? static_cast<double>(r - v) / static_cast<double>(m1) : 0.0;
    rec.pi0 = pi0;
    rec.rejections = r;
    out.push_back(rec);
  }
  return out;
}

}  // namespace

Eigen::MatrixXd DependenceSpec::matrix(int eta) const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(eta, eta);
  for (int i = 0; i < eta; ++i) {
    a(i, i) = diag;
    if (i > 0) a(i, i - 1) = subdiag;
  }
  return a;
}

std::string_view to_string(DependenceSpec::Kind kind) noexcept {
  return kind == DependenceSpec::Kind::independent ? "independent" : "dependent";
}

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::location: return "location";
    case Family::scale: return "scale";
    case Family::shape: return "shape";
    case Family::one_sample: return "one_sample";
  }
  return "unknown";
}

std::optional<Family> parse_family(std::string_view name) noexcept {
  for (auto f : {Family::location, Family::scale, Family::shape, Family::one_sample}) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

void ScenarioConfig::validate() const {
  if (m < 1) throw DomainError("m must be at least 1");
  if (!(delta >= 0.0 && delta < 1.0)) throw DomainError("delta must lie in [0, 1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (replicates < 1) throw DomainError("replicates must be at least 1");
  if (methods.empty()) throw DomainError("at least one method is required");
  if (!(ji.bandwidth > 0.0)) throw DomainError("bandwidth must be positive");
  if (!std::isfinite(mu)) throw DomainError("mu must be finite");
  const bool one = family == Family::one_sample;
  if (one != is_one_sample(test)) {
    throw DomainError(one ? "one_sample family needs a one-sample test (t1, signed_rank)"
                          : "two-sample families need a two-sample test");
  }
  if (n1 < 2 || (!one && n2 < 2)) throw DomainError("group sizes must be at least 2");
  if (n1 > 64 || n2 > 64) throw DomainError("group sizes above 64 are not supported");
  if (is_discrete(test)) {
    const auto space = test == TestKind::signed_rank ? (n1 > 62 ? UINT64_MAX : std::uint64_t{1} << n1)
                                                     : binomial(n1 + n2, n1);
    if (space > kDefaultEnumerationCap) throw DomainError("permutation space exceeds the enumeration cap");
  }
  for (auto method : methods) {
    if (needs_support(method) && !is_discrete(test)) {
      throw DomainError(std::string(to_string(method)) + " needs a discrete test");
    }
  }
  if (dependence.kind == DependenceSpec::Kind::dependent &&
      !(std::abs(dependence.diag) < 1.0)) {
    throw DomainError("dependence matrix must be stable");
  }
}

const MethodSummary* McReport::find(Pi0Method method) const noexcept {
  for (const auto& s : methods) {
    if (s.method == method) return &s;
  }
  return nullptr;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw DomainError("Lyapunov equation needs a square matrix");
  const auto n = a.rows();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd sigma = identity;
  for (int iter = 0; iter < 100000; ++iter) {
    Eigen::MatrixXd next = a.transpose() * sigma * a + identity;
    next = 0.5 * (next + next.transpose());
    const double change = (next - sigma).cwiseAbs().maxCoeff();
    sigma = std::move(next);
    if (!std::isfinite(change) || sigma.cwiseAbs().maxCoeff() > 1e100) break;
    if (change <= 1e-15 * std::max(1.0, sigma.cwiseAbs().maxCoeff())) return sigma;
  }
  throw ConvergenceError("Lyapunov iteration did not converge (spectral radius >= 1?)");
}

Eigen::MatrixXd sym_inv_sqrt(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols()) throw DomainError("covariance must be square");
  const Eigen::MatrixXd sym = 0.5 * (sigma + sigma.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw ConvergenceError("eigendecomposition failed");
  const auto& values = eig.eigenvalues();
  if (values.minCoeff() <= 0.0) throw DomainError("covariance is not positive definite");
  const Eigen::VectorXd inv_root = values.array().rsqrt().matrix();
  return eig.eigenvectors() * inv_root.asDiagonal() * eig.eigenvectors().transpose();
}

GroupGenerator::GroupGenerator(const DependenceSpec& spec, int eta)
    : eta_(eta), a_(spec.matrix(eta)) {
  if (eta < 1) throw DomainError("group size must be positive");
  // The state W_t = A W_{t-1} + e_t has stationary covariance S = A S A^T + I,
  // i.e. the fixed point with A^T in the role of the iteration matrix.
  sigma_ = solve_lyapunov(a_.transpose());
  const Eigen::LLT<Eigen::MatrixXd> chol(sigma_);
  if (chol.info() != Eigen::Success) throw DomainError("stationary covariance not positive definite");
  sigma_chol_ = chol.matrixL();
  whitening_ = sym_inv_sqrt(sigma_);
}

Eigen::MatrixXd GroupGenerator::generate(int m, Rng& rng) const {
  Eigen::MatrixXd out(m, eta_);
  Eigen::VectorXd noise(eta_);
  auto draw = [&] {
    for (int j = 0; j < eta_; ++j) noise(j) = rng.normal();
  };
  draw();
  Eigen::VectorXd state = sigma_chol_ * noise;
  for (int t = 0; t < m; ++t) {
    draw();
    state = a_ * state + noise;
    out.row(t) = (whitening_ * state).transpose();
  }
  return out;
}

Eigen::MatrixXd generate_group(const DependenceSpec& spec, int eta, int m, Rng& rng) {
  return GroupGenerator(spec, eta).generate(m, rng);
}

ScenarioData generate_scenario(const ScenarioConfig& c, std::uint64_t replicate) {
  const auto dens = densities(c);
  const bool one = c.family == Family::one_sample;
  ScenarioData d;
  d.x_density.resize(static_cast<std::size_t>(c.m));
  d.y_density.resize(static_cast<std::size_t>(c.m));
  d.null_mask.resize(static_cast<std::size_t>(c.m));

  Rng labels(c.seed, {replicate, kLabels});
  for (std::size_t i = 0; i < d.null_mask.size(); ++i) {
    if (one) {
      const int k = labels.uniform() < c.delta ? 2 : 1;
      d.x_density[i] = k;
      d.y_density[i] = 1;
      d.null_mask[i] = k == 1;
    } else {
      const int k = static_cast<int>(labels.below(4)) + 1;
      const int l = labels.uniform() < c.delta ? partner(k) : k;
      d.x_density[i] = k;
      d.y_density[i] = l;
      d.null_mask[i] = k == l;
    }
  }

  Rng gx(c.seed, {replicate, kGroupX});
  d.x = GroupGenerator(c.dependence, c.n1).generate(c.m, gx);
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    const auto& f = dens[static_cast<std::size_t>(d.x_density[static_cast<std::size_t>(i)] - 1)];
    for (Eigen::Index j = 0; j < d.x.cols(); ++j) d.x(i, j) = f.transform(d.x(i, j));
  }
  if (!one) {
    Rng gy(c.seed, {replicate, kGroupY});
    d.y = GroupGenerator(c.dependence, c.n2).generate(c.m, gy);
    for (Eigen::Index i = 0; i < d.y.rows(); ++i) {
      const auto& f = dens[static_cast<std::size_t>(d.y_density[static_cast<std::size_t>(i)] - 1)];
      for (Eigen::Index j = 0; j < d.y.cols(); ++j) d.y(i, j) = f.transform(d.y(i, j));
    }
  }
  return d;
}

ReplicatePValues replicate_pvalues(const ScenarioConfig& config, std::uint64_t replicate) {
  config.validate();
  const auto tester = make_tester(config);
  const auto data = generate_scenario(config, replicate);
  return ReplicatePValues{row_pvalues(tester, data), tester.support(), data.null_mask};
}

int default_thread_count() {
  if (const char* env = std::getenv("DQ_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

McReport run_monte_carlo(const ScenarioConfig& config, int threads) {
  config.validate();
  const auto tester = make_tester(config);
  // Build the cached spline smoother before any worker needs it.
  if (std::find(config.methods.begin(), config.methods.end(), Pi0Method::st) != config.methods.end()) {
    (void)st_lambda_grid();
  }

  const auto n_rep = static_cast<std::size_t>(config.replicates);
  std::vector<std::vector<MethodRecord>> records(n_rep);
  const int workers = std::clamp(threads > 0 ? threads : default_thread_count(), 1,
                                 static_cast<int>(n_rep));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    while (true) {
      const std::size_t r = next.fetch_add(1);
      if (r >= n_rep) return;
      try {
        records[r] = run_replicate(config, tester, r);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_rep);
        return;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  // Reduce in replicate order so sums do not depend on scheduling.
  McReport report;
  report.config = config;
  for (std::size_t k = 0; k < config.methods.size(); ++k) {
    double fdr = 0.0;
    double power = 0.0;
    std::size_t power_n = 0;
    double pi0_sum = 0.0;
    double rej = 0.0;
    for (const auto& rec : records) {
      fdr += rec[k].fdr;
      pi0_sum += rec[k].pi0;
      rej += static_cast<double>(rec[k].rejections);
      if (rec[k].has_power) {
        power += rec[k].power;
        ++power_n;
      }
    }
    const double n = static_cast<double>(n_rep);
    const double pi0_mean = pi0_sum / n;
    MethodSummary s;
    s.method = config.methods[k];
    s.fdr = fdr / n;
    if (power_n > 0) s.power = power / static_cast<double>(power_n);
    s.pi0_bias = pi0_mean - config.pi0();
    if (n_rep > 1) {
      double ss = 0.0;
      for (const auto& rec : records) ss += (rec[k].pi0 - pi0_mean) * (rec[k].pi0 - pi0_mean);
      s.pi0_sd = std::sqrt(ss / (n - 1.0));
    }
    s.mean_rejections = rej / n;
    report.methods.push_back(s);
  }
  return report;
}

}  // namespace dq
