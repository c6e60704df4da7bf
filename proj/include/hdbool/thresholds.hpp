#pragma once

// Degree, percolation and volume-fraction thresholds of the high-dimensional
// Poisson Boolean model, with their optimizing radii.
//
//   tau_v = -1/2 log(2 pi e) + inf_{R >= R*} ( I(R) - log R )
//   tau_d = -1/2 log(2 pi e) + inf_{R >= R*} ( 2 I(R) - log 2R )
//   tau_p = -1/2 log(2 pi e) + inf_{R >= R*} ( I(R) - log(R + R*) )
//
// Each infimum is attained at the unique R >= R* with g(R) in
// [I'_-(R), I'_+(R)], where g is 1/R, 1/(2R) and 1/(R + R*) respectively.

#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hdbool/errors.hpp"
#include "hdbool/numeric.hpp"
#include "hdbool/rate_function.hpp"

namespace hdbool {

enum class Target { VolumeFraction, Degree, Percolation };

inline std::string_view to_string(Target t) {
  switch (t) {
    case Target::VolumeFraction: return "volume-fraction";
    case Target::Degree: return "degree";
    case Target::Percolation: return "percolation";
  }
  return "?";
}

/// Right-hand side g(R) of the first-order condition g(R) in dI(R).
inline double target_slope(Target t, double r, double rstar) {
  switch (t) {
    case Target::VolumeFraction: return 1.0 / r;
    case Target::Degree: return 1.0 / (2.0 * r);
    case Target::Percolation: return 1.0 / (r + rstar);
  }
  return 0.0;
}

struct OptimalityCertificate {
  Target target;
  double radius;
  double g_value;
  double subgrad_lo;
  double subgrad_hi;

  bool holds(double tol = 1e-10) const {
    return Subgradient{subgrad_lo, subgrad_hi}.contains(g_value, tol);
  }
};

struct OptimalRadius {
  double radius;
  OptimalityCertificate certificate;
};

/// Optimality condition g(R) in [I'_-(R), I'_+(R)] evaluated at r.
inline OptimalityCertificate certify(const RateFunction& rate, Target t,
                                     double r) {
  const auto sg = rate.subdifferential(r);
  return {t, r, target_slope(t, r, rate.rstar()), sg.lo, sg.hi};
}

/// Monotone bisection on the sign of I'_-(R) - g(R), which is strictly
/// increasing on [R*, inf).
inline OptimalRadius solve_optimal_radius(const RateFunction& rate, Target t) {
  constexpr double kTol = 1e-12;
  constexpr int kMaxIter = 200;
  const double rs = rate.rstar();
  const auto at_rstar = rate.subdifferential(rs);
  if (!(at_rstar.lo <= 0.0 && 0.0 <= at_rstar.hi) || !(rate(rs) == 0.0)) {
    std::ostringstream os;
    os << "inconsistent rate function: I(R*) = " << rate(rs)
       << ", subdifferential at R* = [" << at_rstar.lo << ", " << at_rstar.hi
       << "]";
    throw ConsistencyError(os.str());
  }
  auto g = [&](double r) { return target_slope(t, r, rs); };
  if (at_rstar.hi >= g(rs)) return {rs, certify(rate, t, rs)};

  // Grow the right end by doubling the distance from R*.
  double step = rs;
  double hi = rs + step;
  int grow = 0;
  while (rate.left_derivative(hi) <= g(hi)) {
    if (++grow > kMaxIter) {
      std::ostringstream os;
      os << "optimal " << to_string(t)
         << " radius not bracketed; I'_- stays below g up to R = " << hi;
      throw NumericalError(os.str());
    }
    step *= 2.0;
    hi = rs + step;
  }

  const auto br = bisect_predicate(
      [&](double r) { return rate.left_derivative(r) <= g(r); }, rs, hi, kTol,
      kMaxIter);

  // A kink or the domain end inside the final bracket is the exact answer.
  const double slack = 4.0 * kTol * std::max(1.0, br.hi);
  for (double k : rate.breakpoints()) {
    if (k < rs || k < br.lo - slack || k > br.hi + slack) continue;
    const auto cert = certify(rate, t, k);
    if (Subgradient{cert.subgrad_lo, cert.subgrad_hi}.contains(cert.g_value))
      return {k, cert};
  }
  const double r = 0.5 * (br.lo + br.hi);
  return {r, certify(rate, t, r)};
}

namespace detail {

/// inf over a 10^4-point log-spaced grid of [R*, upper], plus breakpoints.
template <class Objective>
double grid_infimum(const RateFunction& rate, Objective&& obj, double upper) {
  constexpr int kPoints = 10000;
  const double rs = rate.rstar();
  const double dom_hi = rate.domain().hi;
  upper = std::min(std::max(upper, 2.0 * rs), dom_hi);
  double best = obj(rs);
  if (upper > rs) {
    const double ratio = std::log(upper / rs);
    for (int i = 1; i < kPoints; ++i) {
      const double r = rs * std::exp(ratio * i / (kPoints - 1));
      best = std::min(best, obj(std::min(r, upper)));
    }
  }
  for (double k : rate.breakpoints())
    if (k >= rs && k <= upper) best = std::min(best, obj(k));
  return best;
}

struct ThresholdTerm {
  double tau;
  OptimalRadius optimum;
};

template <class Objective>
ThresholdTerm solve_and_check(const RateFunction& rate, Target t,
                              Objective&& obj) {
  const auto opt = solve_optimal_radius(rate, t);
  const double value = obj(opt.radius);
  const double grid = grid_infimum(rate, obj, 4.0 * opt.radius);
  // The solver value must be an infimum over the grid, and the grid must
  // come close to it.
  if (value > grid + 1e-9 || grid - value > 1e-6) {
    std::ostringstream os;
    os.precision(17);
    os << to_string(t) << " infimum: solver gives " << value << " at R = "
       << opt.radius << " but grid minimum is " << grid;
    throw ConsistencyError(os.str());
  }
  return {-kHalfLog2PiE + value, opt};
}

inline ThresholdTerm volume_term(const RateFunction& rate) {
  return solve_and_check(rate, Target::VolumeFraction,
                         [&](double r) { return rate(r) - std::log(r); });
}

inline ThresholdTerm degree_term(const RateFunction& rate) {
  return solve_and_check(rate, Target::Degree, [&](double r) {
    return 2.0 * rate(r) - std::log(2.0 * r);
  });
}

inline ThresholdTerm percolation_term(const RateFunction& rate) {
  const double rs = rate.rstar();
  return solve_and_check(rate, Target::Percolation,
                         [&](double r) { return rate(r) - std::log(r + rs); });
}

}  // namespace detail

inline double tau_volume(const RateFunction& rate) {
  return detail::volume_term(rate).tau;
}

/// Computes the threshold both as inf_{R >= 2R*} (2 I(R/2) - log R), i.e. the
/// volume-fraction threshold of the sum rate function, and as
/// inf_{R >= R*} (2 I(R) - log 2R); the two must agree to 1e-10.
inline double tau_degree(const RateFunction& rate) {
  const double via_sum = tau_volume(RateFunction(SumRate(rate)));
  const double direct = detail::degree_term(rate).tau;
  if (!(std::abs(via_sum - direct) <= 1e-10)) {
    std::ostringstream os;
    os.precision(17);
    os << "degree threshold forms disagree: " << via_sum << " vs " << direct;
    throw ConsistencyError(os.str());
  }
  return direct;
}

inline double tau_percolation(const RateFunction& rate) {
  const double tau = detail::percolation_term(rate).tau;
  if (rate.model_if<IndicatorRate>()) {
    const double td = detail::degree_term(rate).tau;
    if (tau != td)
      throw ConsistencyError("deterministic radii: percolation and degree "
                             "thresholds must coincide");
  }
  return tau;
}

/// Unique root in (1, 2) of c^3 + c^2 - 2c - 1 = 0; R_p = sigma c for
/// Gaussian grains.
inline double solve_gaussian_cubic() {
  auto p = [](double c) { return ((c + 1.0) * c - 2.0) * c - 1.0; };
  double lo = 1.0;  // p(1) = -1
  double hi = 2.0;  // p(2) = 7
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (p(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

enum class Regime {
  Isolated,               // rho < tau_d
  NonPercolatingDense,    // tau_d < rho < tau_p
  PercolatingZeroVolume,  // tau_p < rho < tau_v
  Covered,                // rho > tau_v
  Critical,               // rho equals one of the thresholds
};

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Isolated: return "isolated";
    case Regime::NonPercolatingDense: return "non-percolating-dense";
    case Regime::PercolatingZeroVolume: return "percolating-zero-volume";
    case Regime::Covered: return "covered";
    case Regime::Critical: return "critical (undetermined)";
  }
  return "?";
}

inline Regime classify(double rho, double tau_d, double tau_p, double tau_v) {
  for (double t : {tau_d, tau_p, tau_v})
    if (std::abs(rho - t) <= 1e-12 * std::max(1.0, std::abs(t)))
      return Regime::Critical;
  if (rho < tau_d) return Regime::Isolated;
  if (rho < tau_p) return Regime::NonPercolatingDense;
  if (rho < tau_v) return Regime::PercolatingZeroVolume;
  return Regime::Covered;
}

struct ThresholdReport {
  std::string law;
  double rho;
  double rstar;
  double tau_d;
  double tau_p;
  double tau_v;
  double r_d;
  double r_p;
  double r_v;
  OptimalityCertificate cert_d;
  OptimalityCertificate cert_p;
  OptimalityCertificate cert_v;
  Regime regime;
};

/// Throws ConsistencyError if the orderings tau_d <= tau_p <= tau_v and
/// R* <= R_d <= R_p <= R_v <= R_p + R* <= 2 R_d fail beyond tol.
inline void check_orderings(const ThresholdReport& r, double tol = 1e-10) {
  auto le = [tol](double a, double b) {
    return a <= b + tol * std::max(1.0, std::abs(b));
  };
  std::ostringstream os;
  os.precision(17);
  if (!le(r.tau_d, r.tau_p) || !le(r.tau_p, r.tau_v)) {
    os << "threshold ordering violated: tau_d = " << r.tau_d
       << ", tau_p = " << r.tau_p << ", tau_v = " << r.tau_v;
    throw ConsistencyError(os.str());
  }
  const std::array<double, 6> chain{r.rstar, r.r_d, r.r_p, r.r_v,
                                    r.r_p + r.rstar, 2.0 * r.r_d};
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    if (!le(chain[i], chain[i + 1])) {
      os << "radius chain violated at position " << i << ": R* = " << r.rstar
         << ", R_d = " << r.r_d << ", R_p = " << r.r_p << ", R_v = " << r.r_v;
      throw ConsistencyError(os.str());
    }
  }
  for (const auto* c : {&r.cert_d, &r.cert_p, &r.cert_v}) {
    if (!c->holds()) {
      os << to_string(c->target) << " certificate fails: g = " << c->g_value
         << " not in [" << c->subgrad_lo << ", " << c->subgrad_hi << "]";
      throw ConsistencyError(os.str());
    }
  }
}

inline ThresholdReport report(const RateFunction& rate, double rho,
                              std::string law = {}) {
  const auto v = detail::volume_term(rate);
  const auto d = detail::degree_term(rate);
  const auto p = detail::percolation_term(rate);
  // Run the cross-checks of the standalone entry points as well.
  const double td = tau_degree(rate);
  const double tp = tau_percolation(rate);
  ThresholdReport r{
      law.empty() ? std::string(rate.kind()) : std::move(law),
      rho,
      rate.rstar(),
      td,
      tp,
      v.tau,
      d.optimum.radius,
      p.optimum.radius,
      v.optimum.radius,
      d.optimum.certificate,
      p.optimum.certificate,
      v.optimum.certificate,
      Regime::Critical,
  };
  check_orderings(r);
  r.regime = classify(rho, r.tau_d, r.tau_p, r.tau_v);
  return r;
}

inline ThresholdReport report(const RadiusLawSpec& spec, double rho) {
  return report(build_rate(spec), rho, std::string(law_name(spec)));
}

}  // namespace hdbool
