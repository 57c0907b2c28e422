#include "dq/pi0.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <string>

#include "dq/error.hpp"
#include "dq/spline.hpp"

namespace dq {

namespace {

constexpr int kGridSize = 96;

const std::array<double, kGridSize>& grid() {
  static const auto g = [] {
    std::array<double, kGridSize> a{};
    for (int k = 0; k < kGridSize; ++k) a[static_cast<std::size_t>(k)] = k / 100.0;
    return a;
  }();
  return g;
}

const SplineSmoother& st_smoother() {
  static const SplineSmoother smoother(std::vector<double>(grid().begin(), grid().end()), 3.0);
  return smoother;
}

Pi0Estimate make_estimate(double raw, Pi0Method method, std::optional<double> lambda) {
  Pi0Estimate e;
  e.raw = raw;
  e.value = std::min(raw, 1.0);
  e.method = method;
  e.lambda = lambda;
  return e;
}

double storey_from_counts(std::int64_t above, std::int64_t m, double lambda) {
  return static_cast<double>(above + 1) / (static_cast<double>(m) * (1.0 - lambda));
}

void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw DomainError("lambda must lie in [0, 1)");
}

}  // namespace

std::string_view to_string(Pi0Method method) noexcept {
  switch (method) {
    case Pi0Method::ss: return "SS";
    case Pi0Method::st: return "ST";
    case Pi0Method::liang: return "Liang";
    case Pi0Method::chen: return "Chen";
    case Pi0Method::rand: return "Rand";
    case Pi0Method::real: return "Real";
  }
  return "unknown";
}

std::optional<Pi0Method> parse_pi0_method(std::string_view name) noexcept {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (auto m : {Pi0Method::ss, Pi0Method::st, Pi0Method::liang, Pi0Method::chen, Pi0Method::rand,
                 Pi0Method::real}) {
    std::string candidate(to_string(m));
    std::transform(candidate.begin(), candidate.end(), candidate.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (candidate == lower) return m;
  }
  return std::nullopt;
}

bool needs_support(Pi0Method method) noexcept {
  return method == Pi0Method::liang || method == Pi0Method::chen || method == Pi0Method::rand;
}

double storey_raw(std::span<const double> pvalues, double lambda) {
  check_lambda(lambda);
  if (pvalues.empty()) throw DomainError("empty P-value sample");
  const auto above = std::count_if(pvalues.begin(), pvalues.end(), [lambda](double p) { return p > lambda; });
  return storey_from_counts(above, static_cast<std::int64_t>(pvalues.size()), lambda);
}

Pi0Estimate storey_pi0(std::span<const double> pvalues, double lambda) {
  return make_estimate(storey_raw(pvalues, lambda), Pi0Method::ss,
                       lambda);
}

Pi0Estimate storey_pi0(const PValueSample& sample, double lambda) {
  return storey_pi0(sample.values(), lambda);
}

std::span<const double> st_lambda_grid() { return grid(); }

Pi0Estimate st_pi0(std::span<const double> pvalues) {
  if (pvalues.size() < 10) throw DomainError("ST estimator needs at least 10 P-values");
  std::vector<double> sorted(pvalues.begin(), pvalues.end());
  std::sort(sorted.begin(), sorted.end());
  const auto m = static_cast<std::int64_t>(sorted.size());
  std::array<double, kGridSize> pi0{};
  for (std::size_t k = 0; k < grid().size(); ++k) {
    const double lambda = grid()[k];
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), lambda);
    pi0[k] = storey_from_counts(above, m, lambda);
  }
  const auto spline = st_smoother().fit(pi0);
  double raw = spline(1.0);
  auto e = make_estimate(raw, Pi0Method::st, std::nullopt);
  if (!(raw > 0.0)) {
    // Extrapolation can undershoot on pathological inputs; keep the
    // estimate a valid proportion.
    e.value = 1.0 / static_cast<double>(m);
    e.fallback = true;
  }
  return e;
}

Pi0Estimate st_pi0(const PValueSample& sample) { return st_pi0(sample.values()); }

Pi0Estimate liang_pi0(const SupportFrequencies& freqs) {
  const auto& support = freqs.support;
  const auto m = freqs.m();
  if (m <= 0) throw DomainError("Liang estimator needs a nonempty sample");
  // Candidates: support points <= 1/2 (never the final point 1).
  std::vector<std::ptrdiff_t> candidates;
  for (std::size_t k = 0; k + 1 < support.size(); ++k) {
    if (support[k] <= Rational(1, 2)) candidates.push_back(static_cast<std::ptrdiff_t>(k));
  }
  auto at = [&](std::ptrdiff_t k) {
    const double lambda = k < 0 ? 0.0 : support.value(static_cast<std::size_t>(k));
    return storey_from_counts(freqs.count_above(k), m, lambda);
  };
  if (candidates.empty()) {
    auto e = make_estimate(at(-1), Pi0Method::liang, 0.0);
    e.fallback = true;
    return e;
  }
  // Index -1 stands for the baseline lambda_0 = 0.
  std::ptrdiff_t chosen = candidates.back();
  double previous = at(-1);
  for (std::size_t i = 0; i + 1 < candidates.size(); ++i) {
    const double current = at(candidates[i]);
    if (current >= previous) {
      chosen = candidates[i];
      break;
    }
    previous = current;
  }
  return make_estimate(at(chosen), Pi0Method::liang, support.value(static_cast<std::size_t>(chosen)));
}

Pi0Estimate chen_pi0(const SupportFrequencies& freqs, const ChenParams& params) {
  if (params.guiding_count < 1) throw DomainError("Chen estimator needs at least one guiding value");
  const auto& support = freqs.support;
  const auto m = freqs.m();
  if (m <= 0) throw DomainError("Chen estimator needs a nonempty sample");
  const double q = support.value(0);
  std::vector<double> tau;
  if (q < 0.5) {
    const double first = q + 0.5 * (0.5 - q);
    const int b = params.guiding_count;
    if (b == 1) {
      tau.push_back(first);
    } else {
      for (int j = 0; j < b; ++j) tau.push_back(first + (0.5 - first) * j / (b - 1));
    }
  } else {
    tau.push_back(0.5);
  }
  double sum = 0.0;
  for (double t : tau) {
    const auto k = support.floor_index(t);
    // Without a support point below tau the largest candidate is t_0 = 0.
    const std::ptrdiff_t idx = k ? static_cast<std::ptrdiff_t>(*k) : -1;
    const double lambda = k ? support.value(*k) : 0.0;
    const double beta = 1.0 / ((1.0 - t) * static_cast<double>(m)) +
                        static_cast<double>(freqs.count_above(idx)) /
                            (static_cast<double>(m) * (1.0 - lambda));
    sum += std::min(beta, 1.0);
  }
  return make_estimate(sum / static_cast<double>(tau.size()), Pi0Method::chen, std::nullopt);
}

std::vector<double> randomize_pvalues(const PValueSample& sample, Rng& rng) {
  if (!sample.support()) throw DomainError("randomized P-values need an attached support");
  const auto& support = *sample.support();
  const auto index = sample.support_index();
  std::vector<double> out(sample.m());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t k = index[i];
    const double jump = support.value(k) - support.previous_value(k);
    out[i] = support.value(k) - rng.uniform() * jump;
  }
  return out;
}

Pi0Estimate randomized_pi0(const PValueSample& sample, const RandParams& params) {
  if (params.replications < 1) throw DomainError("Rand estimator needs at least one replication");
  check_lambda(params.lambda);
  double sum = 0.0;
  for (int j = 0; j < params.replications; ++j) {
    Rng rng(params.seed, {static_cast<std::uint64_t>(j)});
    sum += storey_raw(randomize_pvalues(sample, rng), params.lambda);
  }
  return make_estimate(sum / params.replications, Pi0Method::rand, params.lambda);
}

Pi0Estimate estimate_pi0(Pi0Method method, const PValueSample& sample, const ChenParams& chen,
                         const RandParams& rand) {
  if (needs_support(method) && !sample.support()) {
    throw DomainError(std::string(to_string(method)) + " estimator needs the P-value support");
  }
  switch (method) {
    case Pi0Method::ss: return storey_pi0(sample, 0.5);
    case Pi0Method::st: return st_pi0(sample);
    case Pi0Method::liang: return liang_pi0(sample.frequencies());
    case Pi0Method::chen: return chen_pi0(sample.frequencies(), chen);
    case Pi0Method::rand: return randomized_pi0(sample, rand);
    case Pi0Method::real: break;
  }
  throw DomainError("the Real method needs the true proportion");
}

}  // namespace dq
