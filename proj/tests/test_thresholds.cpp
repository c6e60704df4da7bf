#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "hdbool/thresholds.hpp"
#include "random_rates.hpp"

using namespace hdbool;
using Catch::Matchers::WithinAbs;

namespace {

// Reference values for sigma = 1 computed independently at 50 digits.
constexpr double kC = 1.246979603717467;
constexpr double kTauV = -1.6120857137646180;
constexpr double kTauD = -2.2202833759268646;
constexpr double kTauP = -2.1717706934887328;

const double kHalfLog = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);

/// Independent dense-grid evaluation of inf_{R >= R*} (a I(R) - log(b R + c)).
/// Log-spaced grid; on an unbounded domain the range grows until the argmin is interior.
double grid_tau(const RateFunction& rate, double a, double b, double c) {
  const double rs = rate.rstar();
  const bool bounded = std::isfinite(rate.domain().hi);
  double top = bounded ? rate.domain().hi : 40.0 * rs;
  const int steps = 400000;
  for (;;) {
    double best = kInf;
    int arg = 0;
    const double span = std::log(top / rs);
    for (int i = 0; i <= steps; ++i) {
      const double r = i == steps ? top : rs * std::exp(span * i / steps);
      const double v = a * rate(r) - std::log(b * r + c);
      if (v < best) best = v, arg = i;
    }
    if (!bounded && arg == steps) {
      top *= 10.0;
      continue;
    }
    for (double k : rate.breakpoints())
      if (k >= rs && k <= top) best = std::min(best, a * rate(k) - std::log(b * k + c));
    return -kHalfLog + best;
  }
}

}  // namespace

TEST_CASE("gaussian cubic root", "[thresholds]") {
  const double c = solve_gaussian_cubic();
  CHECK(c > 1.2469796);
  CHECK(c < 1.2469797);
  CHECK_THAT(c * c * c + c * c - 2 * c - 1, WithinAbs(0.0, 1e-14));
  CHECK_THAT(c, WithinAbs(kC, 1e-15));
}

TEST_CASE("gaussian grain thresholds and optimal radii", "[thresholds]") {
  const auto rate = build_rate(law::GaussianGrain{1.0});
  CHECK_THAT(tau_volume(rate), WithinAbs(kTauV, 1e-12));
  CHECK_THAT(tau_degree(rate), WithinAbs(kTauD, 1e-12));
  CHECK_THAT(tau_percolation(rate), WithinAbs(kTauP, 1e-12));

  // closed forms in terms of c
  CHECK_THAT(kTauV, WithinAbs(-kHalfLog - 0.5 * (std::log(4.0) - 1.0), 1e-15));
  CHECK_THAT(kTauD, WithinAbs(-kHalfLog - 0.5 * (std::log(13.5) - 1.0), 1e-15));
  CHECK_THAT(kTauP, WithinAbs(-kHalfLog - 0.5 * (std::log(kC * kC * (1 + kC) * (1 + kC)) -
                                                 kC * kC + 1.0),
                              1e-15));

  CHECK_THAT(solve_optimal_radius(rate, Target::VolumeFraction).radius,
             WithinAbs(std::numbers::sqrt2, 1e-10));
  CHECK_THAT(solve_optimal_radius(rate, Target::Degree).radius,
             WithinAbs(std::sqrt(1.5), 1e-10));
  CHECK_THAT(solve_optimal_radius(rate, Target::Percolation).radius,
             WithinAbs(kC, 1e-10));
}

TEST_CASE("thresholds scale with sigma", "[thresholds]") {
  for (double sigma : {0.3, 2.0, 7.5}) {
    const auto r = report(law::GaussianGrain{sigma}, 0.0);
    CHECK_THAT(r.tau_v, WithinAbs(kTauV - std::log(sigma), 1e-11));
    CHECK_THAT(r.tau_d, WithinAbs(kTauD - std::log(sigma), 1e-11));
    CHECK_THAT(r.tau_p, WithinAbs(kTauP - std::log(sigma), 1e-11));
    CHECK_THAT(r.r_p / sigma, WithinAbs(kC, 1e-9));
  }
}

TEST_CASE("deterministic radii degenerate", "[thresholds]") {
  for (double rs : {0.5, 1.0, 3.0}) {
    const auto r = report(law::Deterministic{rs}, 0.0);
    CHECK(r.tau_p == r.tau_d);
    CHECK_THAT(r.tau_v - r.tau_p, WithinAbs(std::numbers::ln2, 1e-12));
    CHECK_THAT(r.tau_v, WithinAbs(-kHalfLog - std::log(rs), 1e-14));
    CHECK(r.r_d == rs);
    CHECK(r.r_p == rs);
    CHECK(r.r_v == rs);
    CHECK(r.cert_v.holds());
  }
}

TEST_CASE("normal log-mgf thresholds match quadratic optimality", "[thresholds]") {
  const double v = 0.25;
  const auto rate = build_rate(law::FromLogMgf{
      [v](double t) { return t + 0.5 * v * t * t; }});
  // I(R) = (R - 1)^2 / (2v); (R - 1)/v = 1/R  ->  R^2 - R - v = 0
  const double rv = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * v));
  CHECK_THAT(solve_optimal_radius(rate, Target::VolumeFraction).radius,
             WithinAbs(rv, 1e-8));
  const double expected = -kHalfLog + (rv - 1) * (rv - 1) / (2 * v) - std::log(rv);
  CHECK_THAT(tau_volume(rate), WithinAbs(expected, 1e-10));
  const auto r = report(rate, 0.0);
  CHECK(r.cert_v.holds());
  CHECK(r.cert_d.holds());
  CHECK(r.cert_p.holds());
}

TEST_CASE("randomized convex rate functions obey the orderings", "[thresholds][property]") {
  std::mt19937_64 rng(20240611);
  int checked = 0;
  for (int trial = 0; trial < 250; ++trial) {
    const RateFunction rate(testing::random_rate(rng));
    const auto r = report(rate, 0.0);
    const double tol = 1e-10;
    CHECK(r.tau_d <= r.tau_p + tol);
    CHECK(r.tau_p <= r.tau_v + tol);
    CHECK(r.rstar <= r.r_d + tol);
    CHECK(r.r_d <= r.r_p + tol);
    CHECK(r.r_p <= r.r_v + tol);
    CHECK(r.r_v <= r.r_p + r.rstar + tol);
    CHECK(r.r_p + r.rstar <= 2.0 * r.r_d + tol);
    CHECK(r.cert_d.holds());
    CHECK(r.cert_p.holds());
    CHECK(r.cert_v.holds());
    if (trial % 10 == 0) {
      // brute-force infimum oracle
      CHECK_THAT(r.tau_v, WithinAbs(grid_tau(rate, 1.0, 1.0, 0.0), 1e-6));
      CHECK_THAT(r.tau_d, WithinAbs(grid_tau(rate, 2.0, 2.0, 0.0), 1e-6));
      CHECK_THAT(r.tau_p, WithinAbs(grid_tau(rate, 1.0, 1.0, r.rstar), 1e-6));
    }
    ++checked;
  }
  CHECK(checked == 250);
}

TEST_CASE("certificates reject wrong radii", "[thresholds]") {
  const auto rate = build_rate(law::GaussianGrain{1.0});
  const auto ok = certify(rate, Target::VolumeFraction, std::numbers::sqrt2);
  CHECK(ok.holds());
  const auto bad = certify(rate, Target::VolumeFraction, 1.3);
  CHECK_FALSE(bad.holds());
}

TEST_CASE("regime classification", "[thresholds]") {
  const double d = -3.0, p = -2.0, v = -1.0;
  CHECK(classify(-4.0, d, p, v) == Regime::Isolated);
  CHECK(classify(-2.5, d, p, v) == Regime::NonPercolatingDense);
  CHECK(classify(-1.5, d, p, v) == Regime::PercolatingZeroVolume);
  CHECK(classify(0.0, d, p, v) == Regime::Covered);
  CHECK(classify(-2.0, d, p, v) == Regime::Critical);
  CHECK(to_string(Regime::Critical) == "critical (undetermined)");
  // deterministic: tau_d = tau_p, no non-percolating dense regime
  const auto r = report(law::Deterministic{1.0}, -2.0);
  CHECK(r.regime == Regime::PercolatingZeroVolume);
}

TEST_CASE("ordering check throws on inconsistent reports", "[thresholds][errors]") {
  auto r = report(law::GaussianGrain{1.0}, 0.0);
  r.tau_p = r.tau_v + 1.0;
  CHECK_THROWS_AS(check_orderings(r), ConsistencyError);
}
