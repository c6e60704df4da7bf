#pragma once

// Log-domain integration of exp(phi) for concave phi whose values span
// thousands of nats. The integrand is shifted by its maximum, truncated where
// phi falls `truncation_nats` below the maximum, and integrated by adaptive
// Gauss-Kronrod on the pieces between breakpoints.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hdbool/errors.hpp"
#include "hdbool/numeric.hpp"

namespace hdbool {

struct QuadratureConfig {
  double rel_tol = 1e-10;
  double truncation_nats = 60.0;
  unsigned max_depth = 20;

  void validate() const {
    if (!(rel_tol > 0.0)) throw ValidationError("quadrature tolerance must be > 0");
    if (!(truncation_nats > 0.0))
      throw ValidationError("quadrature truncation must be > 0 nats");
  }
};

struct LogIntegral {
  double log_value;  // log of the integral (-inf if exactly zero)
  double rel_error;  // estimated relative error of the integral
  double support_lo;  // truncated integration range
  double support_hi;
  double argmax;
};

/// log int_lo^hi exp(phi(x)) dx. `hint` must be a point of [lo, hi] where phi
/// is finite; it seeds the search for the right end when hi is infinite.
template <class Phi>
LogIntegral log_integrate(Phi&& phi, double lo, double hi, double hint,
                          const QuadratureConfig& cfg,
                          const std::vector<double>& breakpoints = {}) {
  const double t_nats = cfg.truncation_nats;
  hint = std::clamp(hint, lo, hi);
  const double f_hint = phi(hint);
  if (!std::isfinite(f_hint)) {
    std::ostringstream os;
    os << "log_integrate: integrand is not finite at the seed point " << hint;
    throw NumericalError(os.str());
  }

  double upper = hi;
  if (!std::isfinite(upper)) {
    double step = std::max(std::abs(hint), 1.0);
    upper = hint + step;
    for (int k = 0;; ++k) {
      const double f = phi(upper);
      if (!(f >= f_hint - t_nats - 10.0)) break;
      if (k > 200) throw NumericalError("log_integrate: integrand does not decay");
      step *= 2.0;
      upper = hint + step;
    }
  }

  auto span_tol = [](double a, double b) {
    return 1e-12 * std::max({std::abs(a), std::abs(b), 1e-300});
  };
  auto best = golden_section_max(phi, lo, upper, span_tol(lo, upper));
  for (double x : {lo, upper, hint}) {
    const double f = phi(x);
    if (f > best.fx) best = {x, f};
  }
  for (double k : breakpoints) {
    if (k < lo || k > upper) continue;
    const double f = phi(k);
    if (f > best.fx) best = {k, f};
  }
  const double fmax = best.fx;
  const double cut = fmax - t_nats;

  double a = lo;
  if (!(phi(lo) >= cut)) {
    a = bisect_predicate([&](double x) { return !(phi(x) >= cut); }, lo, best.x,
                         1e-10, 200)
            .lo;
  }
  double b = upper;
  if (!(phi(upper) >= cut)) {
    b = bisect_predicate([&](double x) { return phi(x) >= cut; }, best.x, upper,
                         1e-10, 200)
            .hi;
  }

  std::vector<double> nodes{a, b};
  if (best.x > a && best.x < b) nodes.push_back(best.x);
  for (double k : breakpoints)
    if (k > a && k < b) nodes.push_back(k);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  auto integrand = [&](double x) {
    const double f = phi(x);
    return std::isfinite(f) ? std::exp(f - fmax) : 0.0;
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  double total = 0.0;
  double err_total = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    double err = 0.0;
    total += GK::integrate(integrand, nodes[i], nodes[i + 1], cfg.max_depth,
                           cfg.rel_tol, &err);
    // Boost reports the error of the rule mapped to [-1, 1]; scaling by the
    // half-width bounds the absolute error.
    err_total += err * 0.5 * (nodes[i + 1] - nodes[i]);
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    if (a == b) return {-kInf, 0.0, a, b, best.x};
    std::ostringstream os;
    os << "log_integrate: integral of exp(phi - max) is " << total
       << " on [" << a << ", " << b << "]";
    throw NumericalError(os.str());
  }
  const double rel = err_total / total;
  if (rel > std::max(cfg.rel_tol, 1e-15) * 10.0) {
    std::ostringstream os;
    os << "quadrature did not converge: achieved relative error " << rel
       << " > tolerance " << cfg.rel_tol;
    throw NumericalError(os.str(), rel);
  }
  return {fmax + std::log(total), rel, a, b, best.x};
}

}  // namespace hdbool
