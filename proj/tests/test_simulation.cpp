#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "dq/error.hpp"
#include "dq/qvalue.hpp"
#include "dq/simulation.hpp"

using dq::DependenceSpec;

TEST_CASE("Lyapunov fixed point") {
  CHECK(dq::solve_lyapunov(Eigen::MatrixXd::Zero(3, 3)).isApprox(Eigen::MatrixXd::Identity(3, 3)));
  const Eigen::MatrixXd d = 0.5 * Eigen::MatrixXd::Identity(2, 2);
  CHECK(dq::solve_lyapunov(d).isApprox(4.0 / 3 * Eigen::MatrixXd::Identity(2, 2), 1e-14));
  for (int eta = 1; eta <= 16; ++eta) {
    const Eigen::MatrixXd a = DependenceSpec::dependent().matrix(eta);
    const Eigen::MatrixXd s = dq::solve_lyapunov(a);
    CHECK((a.transpose() * s * a + Eigen::MatrixXd::Identity(eta, eta) - s).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_THROWS_AS(dq::solve_lyapunov(1.1 * Eigen::MatrixXd::Identity(2, 2)), dq::ConvergenceError);
  CHECK_THROWS_AS(dq::solve_lyapunov(Eigen::MatrixXd::Zero(2, 3)), dq::DomainError);
}

TEST_CASE("inverse square root") {
  CHECK(dq::sym_inv_sqrt(Eigen::MatrixXd::Identity(3, 3)).isApprox(Eigen::MatrixXd::Identity(3, 3)));
  CHECK(dq::sym_inv_sqrt(4 * Eigen::MatrixXd::Identity(2, 2)).isApprox(0.5 * Eigen::MatrixXd::Identity(2, 2)));
  std::mt19937_64 gen(4);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::MatrixXd b(8, 8);
    for (int i = 0; i < 64; ++i) b.data()[i] = z(gen);
    const Eigen::MatrixXd s = b * b.transpose() + 0.1 * Eigen::MatrixXd::Identity(8, 8);
    const Eigen::MatrixXd m = dq::sym_inv_sqrt(s);
    CHECK((m * s * m - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((m - m.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
  bad(1, 1) = -1;
  CHECK_THROWS_AS(dq::sym_inv_sqrt(bad), dq::DomainError);
}

TEST_CASE("generated groups are standardized") {
  for (auto spec : {DependenceSpec::independent(), DependenceSpec::dependent()}) {
    const int eta = 4;
    const dq::GroupGenerator g(spec, eta);
    // The generator's covariance is the stationary law of W_t = A W_{t-1} + e.
    const Eigen::MatrixXd a = spec.matrix(eta);
    const Eigen::MatrixXd s = g.stationary_covariance();
    CHECK((a * s * a.transpose() + Eigen::MatrixXd::Identity(eta, eta) - s).cwiseAbs().maxCoeff() < 1e-12);

    dq::Rng rng(99);
    const Eigen::MatrixXd x = g.generate(100000, rng);
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mean;
    const Eigen::MatrixXd cov = centered.transpose() * centered / (x.rows() - 1.0);
    CHECK(mean.cwiseAbs().maxCoeff() < 0.02);
    CHECK((cov - Eigen::MatrixXd::Identity(eta, eta)).cwiseAbs().maxCoeff() < 0.02);

    // Lag-1 cross covariance of whitened rows: M A S M with M = S^{-1/2}.
    const Eigen::MatrixXd m = dq::sym_inv_sqrt(s);
    const Eigen::MatrixXd want = m * a * s * m;
    const Eigen::MatrixXd lag = centered.bottomRows(x.rows() - 1).transpose() * centered.topRows(x.rows() - 1) /
                                (x.rows() - 2.0);
    CHECK((lag - want).cwiseAbs().maxCoeff() < 0.02);
  }
}

TEST_CASE("scenario truth and densities") {
  dq::ScenarioConfig c;
  c.m = 4000;
  c.delta = 0.5;
  c.replicates = 1;
  const auto d = dq::generate_scenario(c, 0);
  const auto nulls = std::count(d.null_mask.begin(), d.null_mask.end(), true);
  CHECK(std::abs(nulls - 2000) < 4 * std::sqrt(1000.0));
  for (std::size_t i = 0; i < d.null_mask.size(); ++i) {
    const int k = d.x_density[i], l = d.y_density[i];
    CHECK(((k == l) == d.null_mask[i]));
    CHECK((k == l || l == (k <= 2 ? k + 2 : k - 2)));
  }
  // Rows with (I, L) = (1, 3): X ~ N(0, 1), Y ~ N(2, 1).
  double sx = 0, sy = 0;
  int n = 0;
  for (std::size_t i = 0; i < d.null_mask.size(); ++i) {
    if (d.x_density[i] == 1 && d.y_density[i] == 3) {
      sx += d.x.row(static_cast<Eigen::Index>(i)).mean();
      sy += d.y.row(static_cast<Eigen::Index>(i)).mean();
      ++n;
    }
  }
  REQUIRE(n > 100);
  CHECK(std::abs(sx / n) < 0.15);
  CHECK(std::abs(sy / n - 2.0) < 0.15);

  c.delta = 0.0;
  const auto g = dq::generate_scenario(c, 1);
  CHECK(std::all_of(g.null_mask.begin(), g.null_mask.end(), [](bool b) { return b; }));

  c.family = dq::Family::shape;
  c.n1 = c.n2 = 8;
  c.delta = 0.5;
  const auto s = dq::generate_scenario(c, 2);
  for (std::size_t i = 0; i < s.null_mask.size(); ++i) {
    if (s.x_density[i] >= 3) CHECK(s.x.row(static_cast<Eigen::Index>(i)).minCoeff() > 0.0);
  }
}

TEST_CASE("scenario generation is reproducible per replicate") {
  dq::ScenarioConfig c;
  c.m = 50;
  const auto a = dq::generate_scenario(c, 3);
  const auto b = dq::generate_scenario(c, 3);
  const auto other = dq::generate_scenario(c, 4);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.x != other.x);
}

TEST_CASE("config validation") {
  dq::ScenarioConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.delta = 1.0;
  CHECK_THROWS_AS(bad.validate(), dq::DomainError);
  bad = c;
  bad.test = dq::TestKind::t_pooled;
  CHECK_THROWS_AS(bad.validate(), dq::DomainError);  // Liang etc. need a discrete test
  bad.methods = {dq::Pi0Method::ss, dq::Pi0Method::st, dq::Pi0Method::real};
  CHECK_NOTHROW(bad.validate());
  bad = c;
  bad.test = dq::TestKind::t_one_sample;
  CHECK_THROWS_AS(bad.validate(), dq::DomainError);
  bad = c;
  bad.n1 = bad.n2 = 20;
  CHECK_THROWS_AS(bad.validate(), dq::DomainError);  // enumeration cap
  bad = c;
  bad.replicates = 0;
  CHECK_THROWS_AS(bad.validate(), dq::DomainError);
}

TEST_CASE("Monte Carlo report") {
  dq::ScenarioConfig c;
  c.m = 60;
  c.replicates = 12;
  c.seed = 5;
  const auto r1 = dq::run_monte_carlo(c, 1);
  const auto r3 = dq::run_monte_carlo(c, 3);
  CHECK(r1 == r3);
  REQUIRE(r1.methods.size() == 6);
  for (const auto& s : r1.methods) {
    CHECK(s.fdr >= 0.0);
    CHECK(s.fdr <= 1.0);
    REQUIRE(s.power.has_value());
    CHECK(*s.power <= 1.0);
    CHECK(s.pi0_sd.has_value());
  }
  const auto* real = r1.find(dq::Pi0Method::real);
  REQUIRE(real != nullptr);
  CHECK(real->pi0_bias == 0.0);

  // Real equals adaptive BH at alpha / (1 - delta) on every replicate.
  double fdr = 0;
  for (int rep = 0; rep < c.replicates; ++rep) {
    const auto pv = dq::replicate_pvalues(c, static_cast<std::uint64_t>(rep));
    const auto rej = dq::adaptive_bh_reject(pv.pvalues, 0.5, c.alpha).rejected;
    std::size_t v = 0;
    for (auto i : rej) v += pv.null_mask[i];
    fdr += static_cast<double>(v) / static_cast<double>(std::max<std::size_t>(rej.size(), 1));
  }
  CHECK(real->fdr == doctest::Approx(fdr / c.replicates).epsilon(1e-12));

  c.replicates = 1;
  c.delta = 0.0;
  const auto single = dq::run_monte_carlo(c, 2);
  for (const auto& s : single.methods) {
    CHECK_FALSE(s.pi0_sd.has_value());
    CHECK_FALSE(s.power.has_value());
  }
}

TEST_CASE("one-sample and parametric designs run") {
  dq::ScenarioConfig c;
  c.family = dq::Family::one_sample;
  c.test = dq::TestKind::signed_rank;
  c.n1 = 6;
  c.m = 40;
  c.replicates = 3;
  const auto r = dq::run_monte_carlo(c, 1);
  CHECK(r.methods.size() == 6);
  c.test = dq::TestKind::t_one_sample;
  c.methods = {dq::Pi0Method::ss, dq::Pi0Method::st, dq::Pi0Method::real};
  CHECK_NOTHROW(dq::run_monte_carlo(c, 1));

  dq::ScenarioConfig s;
  s.family = dq::Family::scale;
  s.test = dq::TestKind::ansari_bradley;
  s.n1 = s.n2 = 8;
  s.m = 30;
  s.replicates = 2;
  s.dependence = DependenceSpec::dependent();
  CHECK_NOTHROW(dq::run_monte_carlo(s, 2));
  s.test = dq::TestKind::levene;
  s.methods = {dq::Pi0Method::ss};
  CHECK_NOTHROW(dq::run_monte_carlo(s, 1));
}
