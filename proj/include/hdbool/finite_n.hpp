#pragma once

// Exact dimension-n quantities of the Poisson Boolean model with intensity
// e^{n rho_n} and radii X_n sqrt(n), all carried as logarithms:
//
//   lambda_n      = E0[d_n^-] = e^{n rho_n} V_n(sqrt n) E[X_n^n]
//   P(0 in C_n)   = 1 - exp(-lambda_n)
//   E0[D_n]       = e^{n rho_n} V_n(sqrt n) E[(X_n + X_n')^n]

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "hdbool/errors.hpp"
#include "hdbool/numeric.hpp"
#include "hdbool/parallel.hpp"
#include "hdbool/quadrature.hpp"
#include "hdbool/rate_function.hpp"
#include "hdbool/thresholds.hpp"

namespace hdbool {

/// log of the volume of an n-ball of radius r.
inline double log_ball_volume(int n, double r) {
  if (n < 1) throw ValidationError("dimension must be >= 1");
  if (!(r > 0.0)) return -kInf;
  const double half_n = 0.5 * n;
  return half_n * std::log(std::numbers::pi) - log_gamma(half_n + 1.0) +
         n * std::log(r);
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

/// rho_n as a function of n; all built-in rules converge to rho.
struct RhoSchedule {
  enum class Kind { Constant, InverseN, LogNOverN, Custom };

  Kind kind = Kind::Constant;
  double coef = 0.0;                    // rho + coef/n or rho + coef log(n)/n
  std::function<double(int)> custom{};  // returns rho_n directly

  static RhoSchedule constant() { return {}; }
  static RhoSchedule inverse_n(double c) { return {Kind::InverseN, c, {}}; }
  static RhoSchedule log_n_over_n(double c) { return {Kind::LogNOverN, c, {}}; }

  double at(double rho, int n) const {
    switch (kind) {
      case Kind::Constant: return rho;
      case Kind::InverseN: return rho + coef / n;
      case Kind::LogNOverN: return rho + coef * std::log(static_cast<double>(n)) / n;
      case Kind::Custom: return custom(n);
    }
    return rho;
  }
};

struct ModelSpec {
  double rho = 0.0;
  RhoSchedule rho_n{};
  RadiusLawSpec radius_law = law::Deterministic{1.0};
  bool empty = false;  // intensity 0: the rho -> -inf limit

  double rho_at(int n) const { return empty ? -kInf : rho_n.at(rho, n); }

  void validate() const {
    if (!std::isfinite(rho)) throw ValidationError("rho must be finite");
    hdbool::validate(radius_law);
    if (rho_n.kind == RhoSchedule::Kind::Custom) {
      if (!rho_n.custom) throw ValidationError("custom rho_n rule has no function");
      double prev = kInf;
      for (int n : {10000, 100000, 1000000}) {
        const double gap = std::abs(rho_n.custom(n) - rho);
        if (!(gap <= prev) || !std::isfinite(gap))
          throw ValidationError("rho_n rule does not approach rho on its tail");
        prev = gap;
      }
      if (prev > 1e-3)
        throw ValidationError("rho_n rule is not within 1e-3 of rho at n = 1e6");
    }
    if (!std::isfinite(rho_n.coef))
      throw ValidationError("rho_n coefficient must be finite");
  }
};

// ---------------------------------------------------------------------------
// Finite-n radius laws
// ---------------------------------------------------------------------------

/// Law of the normalized radius X_n in dimension n. Laws given only through a
/// rate function use the density proportional to exp(-n I(x)), which obeys
/// the same large deviations principle.
class FiniteRadiusLaw {
 public:
  FiniteRadiusLaw(const RadiusLawSpec& spec, int n,
                  const QuadratureConfig& q = {})
      : n_(n), q_(q) {
    if (n < 1) throw ValidationError("dimension must be >= 1");
    validate(spec);
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, law::Deterministic>) {
            atom_ = s.rstar;
            typical_ = s.rstar;
            support_ = {s.rstar, s.rstar};
          } else if constexpr (std::is_same_v<T, law::GaussianGrain>) {
            sigma_ = s.sigma;
            typical_ = s.sigma;
            support_ = {0.0, kInf};
            // X = sigma chi_n / sqrt(n); chi_n density
            // t^{n-1} e^{-t^2/2} / (2^{n/2-1} Gamma(n/2)).
            const double dn = n;
            log_norm_ = std::log(std::sqrt(dn) / sigma_) -
                        (0.5 * dn - 1.0) * std::numbers::ln2 -
                        log_gamma(0.5 * dn);
          } else {
            rate_ = build_rate(s);
            typical_ = rate_->rstar();
            support_ = rate_->domain();
            breakpoints_ = rate_->breakpoints();
            const auto z = log_integrate(
                [&](double x) { return -n_ * (*rate_)(x); }, support_.lo,
                support_.hi, typical_, q_, breakpoints_);
            log_norm_ = -z.log_value;
          }
        },
        spec);
  }

  int dimension() const { return n_; }
  bool atomic() const { return atom_.has_value(); }
  double atom() const { return *atom_; }
  bool is_gaussian() const { return sigma_ > 0.0; }
  double sigma() const { return sigma_; }
  double typical() const { return typical_; }
  Interval support() const { return support_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const QuadratureConfig& quadrature() const { return q_; }

  /// Log density of X_n at x (continuous laws only).
  double log_density(double x) const {
    if (x < support_.lo || x > support_.hi) return -kInf;
    if (is_gaussian()) {
      if (!(x > 0.0)) return -kInf;
      const double dn = n_;
      const double t = std::sqrt(dn) * x / sigma_;
      return log_norm_ + (dn - 1.0) * std::log(t) - 0.5 * t * t;
    }
    return log_norm_ - n_ * (*rate_)(x);
  }

  /// log E[(X + shift)^n] and the truncated support of its integrand.
  LogIntegral log_shifted_moment(double shift) const {
    if (atomic()) {
      const double v = n_ * std::log(*atom_ + shift);
      return {v, 0.0, *atom_, *atom_, *atom_};
    }
    return log_integrate(
        [&](double x) {
          return x + shift > 0.0 ? n_ * std::log(x + shift) + log_density(x)
                                 : -kInf;
        },
        support_.lo, support_.hi, typical_, q_, breakpoints_);
  }

  /// log E[(X + X')^n] for independent copies, by iterated quadrature.
  LogIntegral log_sum_moment() const {
    if (atomic()) return log_shifted_moment(*atom_);
    return log_integrate(
        [&](double s) {
          const double ld = log_density(s);
          if (!std::isfinite(ld)) return -kInf;
          return ld + log_shifted_moment(s).log_value;
        },
        support_.lo, support_.hi, typical_, q_, breakpoints_);
  }

  /// log P(X >= t).
  double log_tail(double t) const {
    if (atomic()) return *atom_ >= t ? 0.0 : -kInf;
    if (t <= support_.lo) return 0.0;
    if (t > support_.hi) return -kInf;
    const double f = log_density(t);
    if (!std::isfinite(f)) {
      std::ostringstream os;
      os << "tail probability P(X >= " << t
         << ") underflows: log density is " << f << " at the threshold";
      throw NumericalError(os.str());
    }
    std::vector<double> bps;
    for (double k : breakpoints_)
      if (k > t) bps.push_back(k);
    const auto r = log_integrate([&](double x) { return log_density(x); }, t,
                                 support_.hi, std::max(t, typical_), q_, bps);
    return std::min(r.log_value, 0.0);
  }

 private:
  int n_;
  QuadratureConfig q_;
  std::optional<double> atom_;
  double sigma_ = 0.0;
  std::optional<RateFunction> rate_;
  double log_norm_ = 0.0;
  double typical_ = 1.0;
  Interval support_{0.0, kInf};
  std::vector<double> breakpoints_;
};

/// Chi-moment closed form log E[X_n^n] for Gaussian grains.
inline double gaussian_log_moment(double sigma, int n) {
  const double dn = n;
  return dn * std::log(sigma / std::sqrt(dn)) + 0.5 * dn * std::numbers::ln2 +
         log_gamma(dn) - log_gamma(0.5 * dn);
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// log lambda_n, lambda_n = E0[d_n^-] = E0[d_n^+].
inline double log_mean_indegree(const ModelSpec& spec, int n,
                                const QuadratureConfig& q = {}) {
  spec.validate();
  q.validate();
  if (spec.empty) return -kInf;
  const FiniteRadiusLaw radius(spec.radius_law, n, q);
  const double log_moment = radius.log_shifted_moment(0.0).log_value;
  if (radius.is_gaussian()) {
    const double closed = gaussian_log_moment(radius.sigma(), n);
    if (!(std::abs(log_moment - closed) <= 1e-10 * std::max(1.0, std::abs(closed)))) {
      std::ostringstream os;
      os.precision(17);
      os << "chi moment quadrature " << log_moment
         << " disagrees with closed form " << closed << " at n = " << n;
      throw ConsistencyError(os.str());
    }
  }
  return n * spec.rho_at(n) + log_ball_volume(n, std::sqrt(n)) + log_moment;
}

/// log E0[D_n].
inline double log_mean_palm_degree(const ModelSpec& spec, int n,
                                   const QuadratureConfig& q = {}) {
  spec.validate();
  q.validate();
  if (spec.empty) return -kInf;
  const FiniteRadiusLaw radius(spec.radius_law, n, q);
  // Fixed radii: intensity times the volume of the 2 R* sqrt(n) ball.
  if (radius.atomic())
    return n * spec.rho_at(n) + log_ball_volume(n, 2.0 * radius.atom() * std::sqrt(n));
  return n * spec.rho_at(n) + log_ball_volume(n, std::sqrt(n)) +
         radius.log_sum_moment().log_value;
}

/// Constant rho giving E0[d_n^-] = mean in dimension n.
inline double rho_for_mean_indegree(const RadiusLawSpec& law, int n, double mean,
                                    const QuadratureConfig& q = {}) {
  const FiniteRadiusLaw radius(law, n, q);
  return (std::log(mean) - log_ball_volume(n, std::sqrt(n)) -
          radius.log_shifted_moment(0.0).log_value) /
         n;
}

/// Constant rho giving E0[D_n] = mean in dimension n.
inline double rho_for_mean_palm_degree(const RadiusLawSpec& law, int n,
                                       double mean,
                                       const QuadratureConfig& q = {}) {
  const FiniteRadiusLaw radius(law, n, q);
  return (std::log(mean) - log_ball_volume(n, std::sqrt(n)) -
          radius.log_sum_moment().log_value) /
         n;
}

struct Coverage {
  double probability;      // P(0 in C_n) = 1 - exp(-lambda_n)
  double log_probability;  // log P(0 in C_n)
  double log_lambda_n;
  bool supercritical;      // rho > tau_v
  double exponent_vf;      // (1/n) log P, or (1/n) log(-log P(0 not in C_n))
};

/// Coverage from a known log lambda_n.
inline Coverage coverage_from_log_lambda(double log_lambda, int n,
                                         bool supercritical) {
  const double lambda = std::exp(log_lambda);
  double p;
  double log_p;
  if (is_neg_inf(log_lambda)) {
    p = 0.0;
    log_p = -kInf;
  } else if (lambda < 1e-300) {
    p = lambda;
    log_p = log_lambda;  // log(1 - e^{-x}) = log x - x/2 + ...
  } else {
    p = -std::expm1(-lambda);
    log_p = log1mexp(lambda);
  }
  const double exponent = supercritical ? log_lambda / n : log_p / n;
  return {p, log_p, log_lambda, supercritical, exponent};
}

inline Coverage coverage_probability(const ModelSpec& spec, int n,
                                     const QuadratureConfig& q, double tau_v) {
  const double log_lambda = log_mean_indegree(spec, n, q);
  return coverage_from_log_lambda(log_lambda, n, !spec.empty && spec.rho > tau_v);
}

inline Coverage coverage_probability(const ModelSpec& spec, int n,
                                     const QuadratureConfig& q = {}) {
  spec.validate();
  return coverage_probability(spec, n, q,
                              tau_volume(build_rate(spec.radius_law)));
}

struct FiniteNPoint {
  int n;
  double log_lambda_n;
  double coverage;
  double log_coverage;
  bool supercritical;
  double exponent_vf;
  double log_mean_degree;
  double exponent_deg;
};

struct ExponentScan {
  std::vector<FiniteNPoint> points;
  double target_vf;   // rho - tau_v
  double target_deg;  // rho - tau_d
};

inline FiniteNPoint finite_n_point(const ModelSpec& spec, int n,
                                   const QuadratureConfig& q, double tau_v) {
  const auto cov = coverage_probability(spec, n, q, tau_v);
  const double log_deg = log_mean_palm_degree(spec, n, q);
  return {n,
          cov.log_lambda_n,
          cov.probability,
          cov.log_probability,
          cov.supercritical,
          cov.exponent_vf,
          log_deg,
          log_deg / n};
}

inline void validate_n_list(const std::vector<int>& n_list) {
  if (n_list.empty()) throw ValidationError("n list must not be empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1) throw ValidationError("dimensions must be >= 1");
    if (i > 0 && n_list[i] <= n_list[i - 1])
      throw ValidationError("n list must be strictly ascending");
  }
}

/// One point per n, computed in parallel; order follows n_list. `on_point`
/// (optional) sees points in order as soon as each prefix is complete.
inline ExponentScan exponent_scan(
    const ModelSpec& spec, const std::vector<int>& n_list,
    const QuadratureConfig& q = {}, unsigned jobs = 1,
    const std::function<void(const FiniteNPoint&)>& on_point = {}) {
  spec.validate();
  q.validate();
  validate_n_list(n_list);
  const auto rate = build_rate(spec.radius_law);
  const double tau_v = tau_volume(rate);
  const double tau_d = tau_degree(rate);
  ExponentScan scan{{}, spec.rho - tau_v, spec.rho - tau_d};
  scan.points.resize(n_list.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n_list.size(); ++i) {
      scan.points[i] = finite_n_point(spec, n_list[i], q, tau_v);
      if (on_point) on_point(scan.points[i]);
    }
    return scan;
  }
  parallel_for(n_list.size(), jobs, [&](std::size_t i) {
    scan.points[i] = finite_n_point(spec, n_list[i], q, tau_v);
  });
  if (on_point)
    for (const auto& p : scan.points) on_point(p);
  return scan;
}

}  // namespace hdbool
