#pragma once

// Small scalar toolbox shared by the rate-function, threshold and finite-n
// code: extended reals, log-domain helpers and 1-D bracketing solvers.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>

#include <boost/math/special_functions/gamma.hpp>

namespace hdbool {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_pos_inf(double x) noexcept { return x == kInf; }
inline bool is_neg_inf(double x) noexcept { return x == -kInf; }

/// Half of log(2 pi e): the per-dimension exponent of the volume of a ball
/// of radius sqrt(n).
inline constexpr double kHalfLog2PiE =
    0.5 * (std::numbers::ln2 + 1.0) + 0.5 * 1.1447298858494002;  // log(pi)

/// log Gamma(x) for x > 0. Re-entrant, unlike ::lgamma which writes signgam.
inline double log_gamma(double x) { return boost::math::lgamma(x); }

/// log(exp(a) + exp(b)) without overflow.
inline double log_add_exp(double a, double b) noexcept {
  if (is_neg_inf(a)) return b;
  if (is_neg_inf(b)) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

inline double log_sum_exp(std::span<const double> xs) noexcept {
  double m = -kInf;
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

/// log(1 - exp(-x)) for x >= 0, i.e. log of 1 - e^{-x}.
inline double log1mexp(double x) noexcept {
  if (x <= 0.0) return -kInf;
  return x < std::numbers::ln2 ? std::log(-std::expm1(-x))
                               : std::log1p(-std::exp(-x));
}

struct GoldenResult {
  double x;
  double fx;
};

/// Maximize a unimodal f on [a, b] by golden-section search. Values of -inf
/// are allowed away from the maximum.
template <class F>
GoldenResult golden_section_max(F&& f, double a, double b, double tol,
                                int max_iter = 400) {
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? GoldenResult{c, fc} : GoldenResult{d, fd};
}

struct Bracket {
  double lo;
  double hi;
};

/// Shrinks [lo, hi] around the switch point of a monotone predicate with
/// pred(lo) == true and pred(hi) == false.
template <class Pred>
Bracket bisect_predicate(Pred&& pred, double lo, double hi, double rel_tol,
                         int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    if (hi - lo <= rel_tol * std::max(1.0, std::abs(hi))) break;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (pred(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {lo, hi};
}

}  // namespace hdbool
