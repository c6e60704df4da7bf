#pragma once

// Branching-process probe of percolation. Above tau_p the cluster of the
// origin dominates a Poisson Galton-Watson tree whose mean offspring y_n is
// the intensity of suitably thinned balls times the volume they can reach;
// the probe reports y_n and the survival probability of Poisson(y_n). It is
// a limit/bound for the percolation probability, not its finite-n value.

#include <cmath>
#include <optional>
#include <vector>

#include "hdbool/errors.hpp"
#include "hdbool/finite_n.hpp"
#include "hdbool/numeric.hpp"
#include "hdbool/parallel.hpp"
#include "hdbool/rate_function.hpp"
#include "hdbool/thresholds.hpp"

namespace hdbool {

/// Largest s in [0, 1] with s = 1 - exp(-y s).
inline double poisson_gw_survival(double y) {
  if (std::isnan(y) || y < 0.0)
    throw ValidationError("mean offspring must be nonnegative");
  if (y <= 1.0) return 0.0;
  if (!std::isfinite(y)) return 1.0;
  // (1 - e^{-ys})/s - 1 is decreasing on (0, 1], tends to y - 1 > 0 at 0+
  // and equals -e^{-y} at 1.
  auto positive = [y](double s) { return -std::expm1(-y * s) / s - 1.0 > 0.0; };
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (positive(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct BranchingProbe {
  int n;
  double log_y_n;
  double survival;
  std::optional<double> thin_radius;
  bool clamped = false;  // y_n overflowed; survival is the 1 - e^{-y} bound

  double normalized_exponent() const { return log_y_n / n; }
};

/// Survival of Poisson(exp(log_y)), reported as 1 - e^{-y} = 1 when y
/// overflows a double.
inline std::pair<double, bool> survival_from_log_y(double log_y) {
  const double y = std::exp(log_y);
  if (!std::isfinite(y)) return {1.0, true};
  return {poisson_gw_survival(y), false};
}

/// log of e^{n rho_n} V_n(2 R* sqrt n): mean number of balls of radius
/// R* sqrt n meeting a fixed ball of the same radius.
inline double penrose_log_y(const ModelSpec& spec, int n) {
  spec.validate();
  const auto* det = std::get_if<law::Deterministic>(&spec.radius_law);
  if (!det)
    throw ValidationError(
        "penrose_log_y needs deterministic radii; use thinned_log_y for random "
        "radii");
  if (n < 1) throw ValidationError("dimension must be >= 1");
  return n * spec.rho_at(n) + log_ball_volume(n, 2.0 * det->rstar * std::sqrt(n));
}

/// log of the mean number of reduced-process balls with normalized radius at
/// least thin_radius whose centres lie within (thin_radius + ball_radius)
/// sqrt(n) of the origin.
inline double thinned_log_y(const ModelSpec& spec, int n, double thin_radius,
                            double ball_radius, const QuadratureConfig& q = {}) {
  spec.validate();
  if (!(thin_radius > 0.0) || !(ball_radius > 0.0))
    throw ValidationError("thin and ball radii must be positive");
  const FiniteRadiusLaw radius(spec.radius_law, n, q);
  const double log_tail = radius.log_tail(thin_radius);
  return n * spec.rho_at(n) +
         log_ball_volume(n, (thin_radius + ball_radius) * std::sqrt(n)) + log_tail;
}

/// Slack used when none is given: min(0.05 R*, (R_p - R*)/2 when positive).
inline double default_probe_gamma(const RateFunction& rate) {
  const double rs = rate.rstar();
  const double rp = solve_optimal_radius(rate, Target::Percolation).radius;
  double g = 0.05 * rs;
  if (rp > rs) g = std::min(g, 0.5 * (rp - rs));
  return g;
}

/// Thins at R_p - gamma (R* - gamma when R_p = R*) and uses balls of radius
/// R* - gamma around the origin, as in the supercritical half of the
/// percolation threshold argument.
inline std::vector<BranchingProbe> percolation_probe_scan(
    const ModelSpec& spec, const std::vector<int>& n_list,
    std::optional<double> gamma = std::nullopt, const QuadratureConfig& q = {},
    unsigned jobs = 1) {
  spec.validate();
  validate_n_list(n_list);
  const auto rate = build_rate(spec.radius_law);
  const double rs = rate.rstar();
  const double rp = solve_optimal_radius(rate, Target::Percolation).radius;
  const double g = gamma.value_or(default_probe_gamma(rate));
  if (!(g > 0.0) || !(g < rs))
    throw ValidationError("probe slack gamma must lie in (0, R*)");
  const double thin = (rp > rs ? rp : rs) - g;
  const double ball = rs - g;
  std::vector<BranchingProbe> out(n_list.size());
  parallel_for(n_list.size(), jobs, [&](std::size_t i) {
    const int n = n_list[i];
    const double log_y = thinned_log_y(spec, n, thin, ball, q);
    const auto [s, clamped] = survival_from_log_y(log_y);
    out[i] = {n, log_y, s, thin, clamped};
  });
  return out;
}

}  // namespace hdbool
