#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "hdbool/percolation.hpp"

using namespace hdbool;
using Catch::Matchers::WithinAbs;

namespace {

ModelSpec deterministic(double rho) {
  ModelSpec m;
  m.rho = rho;
  m.radius_law = law::Deterministic{1.0};
  return m;
}

ModelSpec gaussian(double rho) {
  ModelSpec m;
  m.rho = rho;
  m.radius_law = law::GaussianGrain{1.0};
  return m;
}

double tau_d_det() { return tau_degree(build_rate(law::Deterministic{1.0})); }
double tau_p_gauss() { return tau_percolation(build_rate(law::GaussianGrain{1.0})); }

}  // namespace

TEST_CASE("Poisson Galton-Watson survival", "[percolation]") {
  CHECK(poisson_gw_survival(0.0) == 0.0);
  CHECK(poisson_gw_survival(0.5) == 0.0);
  CHECK(poisson_gw_survival(1.0) == 0.0);
  const double s = poisson_gw_survival(2.0);
  CHECK_THAT(s, WithinAbs(0.79681213002002005, 1e-12));
  CHECK(std::abs(s - (1.0 - std::exp(-2.0 * s))) <= 1e-12);
  CHECK(poisson_gw_survival(kInf) == 1.0);
  CHECK_THROWS_AS(poisson_gw_survival(-1.0), ValidationError);

  double prev = 0.0;
  for (double y = 1.0; y < 40.0; y *= 1.07) {
    const double v = poisson_gw_survival(y);
    CHECK(v >= prev);
    CHECK(std::abs(v - (1.0 - std::exp(-y * v))) <= 1e-12);
    prev = v;
  }
  // slightly supercritical: s ~ 2 (y - 1)
  CHECK_THAT(poisson_gw_survival(1.001), WithinAbs(0.002, 1e-5));
}

TEST_CASE("Penrose mean offspring", "[percolation]") {
  CHECK_THAT(penrose_log_y(deterministic(0.0), 2),
             WithinAbs(std::log(8 * std::numbers::pi), 1e-14));
  for (int n : {2, 7, 30}) {
    CHECK(penrose_log_y(deterministic(-1.3), n) ==
          log_mean_palm_degree(deterministic(-1.3), n));
  }
  CHECK_THROWS_AS(penrose_log_y(gaussian(0.0), 5), ValidationError);
}

TEST_CASE("Penrose exponent tends to rho - tau_d", "[percolation]") {
  const double td = tau_d_det();
  for (double delta : {0.1, -0.1}) {
    const auto spec = deterministic(td + delta);
    double prev_err = kInf;
    for (int n : {10, 20, 40, 200}) {
      const double err = std::abs(penrose_log_y(spec, n) / n - delta);
      CHECK(err < prev_err);
      prev_err = err;
    }
    CHECK(prev_err < 0.02);
  }
  const auto [s, clamped] = survival_from_log_y(penrose_log_y(deterministic(td - 0.1), 200));
  CHECK(s == 0.0);
  CHECK_FALSE(clamped);
}

TEST_CASE("thinning that keeps every ball is the Penrose sequence", "[percolation]") {
  for (int n : {3, 25}) {
    CHECK_THAT(thinned_log_y(deterministic(-1.0), n, 1.0, 1.0),
               WithinAbs(penrose_log_y(deterministic(-1.0), n), 1e-12));
  }
}

TEST_CASE("gaussian thinned offspring follows the drift sign", "[percolation]") {
  const auto rate = build_rate(law::GaussianGrain{1.0});
  const double rp = solve_optimal_radius(rate, Target::Percolation).radius;
  const double thin = rp - 0.05;
  const double ball = 1.0 - 0.05;
  const auto above = gaussian(tau_p_gauss() + 0.1);
  const double y100 = thinned_log_y(above, 100, thin, ball);
  const double y200 = thinned_log_y(above, 200, thin, ball);
  CHECK(y100 > 0.0);
  CHECK(y200 > y100);

  const auto below = gaussian(tau_p_gauss() - 0.1);
  CHECK(thinned_log_y(below, 400, thin, ball) < 0.0);
  CHECK(thinned_log_y(below, 400, thin, ball) < thinned_log_y(below, 100, thin, ball));
}

TEST_CASE("probe scan above and below the threshold", "[percolation]") {
  const double td = tau_d_det();
  const auto up = percolation_probe_scan(deterministic(td + 0.2), {5, 10, 20, 40, 80});
  double prev = 0.0;
  for (const auto& p : up) {
    CHECK(p.survival >= prev);
    CHECK(p.thin_radius.has_value());
    prev = p.survival;
  }
  CHECK(up.back().survival > 0.999);
  CHECK(up.back().survival > up.front().survival);

  const auto down = percolation_probe_scan(deterministic(td - 0.2), {5, 10, 20, 40});
  for (const auto& p : down) CHECK(p.survival == 0.0);

  const auto gdown = percolation_probe_scan(gaussian(tau_p_gauss() - 0.2), {20, 50, 100});
  for (const auto& p : gdown) CHECK(p.survival == 0.0);
}

TEST_CASE("gaussian probe stays away from zero just above tau_p", "[percolation]") {
  const auto rows = percolation_probe_scan(gaussian(tau_p_gauss() + 0.05), {400, 800, 1600},
                                           0.02);
  for (const auto& p : rows) CHECK(p.survival > 0.5);
}

TEST_CASE("probe overflow is clamped", "[percolation]") {
  const auto rows = percolation_probe_scan(deterministic(5.0), {2000});
  CHECK(rows[0].survival == 1.0);
  CHECK(rows[0].clamped);
}

TEST_CASE("probe parameters", "[percolation][errors]") {
  const auto rate = build_rate(law::GaussianGrain{1.0});
  const double rp = solve_optimal_radius(rate, Target::Percolation).radius;
  CHECK_THAT(default_probe_gamma(rate), WithinAbs(0.05, 1e-15));
  CHECK(default_probe_gamma(build_rate(law::Deterministic{2.0})) == 0.1);
  const auto rows = percolation_probe_scan(gaussian(-2.0), {10}, 0.02);
  CHECK_THAT(*rows[0].thin_radius, WithinAbs(rp - 0.02, 1e-12));
  CHECK_THROWS_AS(percolation_probe_scan(gaussian(-2.0), {10}, 1.5), ValidationError);
  CHECK_THROWS_AS(percolation_probe_scan(gaussian(-2.0), {10}, -0.1), ValidationError);
}
