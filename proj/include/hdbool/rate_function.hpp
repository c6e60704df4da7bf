#pragma once

// Large-deviations rate functions of the normalized radius X_n = radius/sqrt(n).
//
// A RateFunction is a closed proper convex I : [0, inf) -> [0, inf] with a
// unique zero R*. Besides values it exposes the one-sided derivatives I'_-
// and I'_+, extended to -inf left of the domain and +inf right of it, which
// is all the threshold solvers need.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "hdbool/errors.hpp"
#include "hdbool/numeric.hpp"

namespace hdbool {

struct Interval {
  double lo;
  double hi;

  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

/// [I'_-(R), I'_+(R)] with extended-real endpoints.
struct Subgradient {
  double lo;
  double hi;

  bool contains(double g, double tol = 0.0) const noexcept {
    const double slack = tol * std::max(1.0, std::abs(g));
    return lo <= g + slack && g - slack <= hi;
  }
};

template <class M>
concept RateModel = requires(const M& m, double r) {
  { m.value(r) } -> std::convertible_to<double>;
  { m.left_derivative(r) } -> std::convertible_to<double>;
  { m.right_derivative(r) } -> std::convertible_to<double>;
  { m.rstar() } -> std::convertible_to<double>;
  { m.domain() } -> std::convertible_to<Interval>;
  { m.kind() } -> std::convertible_to<std::string_view>;
};

/// Type-erased, immutable, cheap to copy.
class RateFunction {
 public:
  template <RateModel M>
  explicit RateFunction(M model)
      : impl_(std::make_shared<const Model<M>>(std::move(model))) {}

  double operator()(double r) const { return impl_->value(r); }
  double value(double r) const { return impl_->value(r); }
  double left_derivative(double r) const { return impl_->left(r); }
  double right_derivative(double r) const { return impl_->right(r); }
  Subgradient subdifferential(double r) const {
    return {impl_->left(r), impl_->right(r)};
  }
  double rstar() const { return impl_->rstar(); }
  Interval domain() const { return impl_->domain(); }
  /// Points where I may fail to be differentiable (knots, domain ends).
  std::vector<double> breakpoints() const { return impl_->breakpoints(); }
  std::string_view kind() const { return impl_->kind(); }

  template <class M>
  const M* model_if() const {
    auto* p = dynamic_cast<const Model<M>*>(impl_.get());
    return p ? &p->m : nullptr;
  }

 private:
  struct Concept {
    virtual ~Concept() = default;
    virtual double value(double) const = 0;
    virtual double left(double) const = 0;
    virtual double right(double) const = 0;
    virtual double rstar() const = 0;
    virtual Interval domain() const = 0;
    virtual std::vector<double> breakpoints() const = 0;
    virtual std::string_view kind() const = 0;
  };

  template <class M>
  struct Model final : Concept {
    explicit Model(M model) : m(std::move(model)) {}
    double value(double r) const override { return m.value(r); }
    double left(double r) const override { return m.left_derivative(r); }
    double right(double r) const override { return m.right_derivative(r); }
    double rstar() const override { return m.rstar(); }
    Interval domain() const override { return m.domain(); }
    std::vector<double> breakpoints() const override {
      if constexpr (requires { m.breakpoints(); }) {
        return m.breakpoints();
      } else {
        return {};
      }
    }
    std::string_view kind() const override { return m.kind(); }
    M m;
  };

  std::shared_ptr<const Concept> impl_;
};

// ---------------------------------------------------------------------------
// Concrete rate functions
// ---------------------------------------------------------------------------

/// Deterministic radii: I = 0 at R*, +inf elsewhere. The subdifferential at
/// R* is the whole line, so every optimal-radius problem is solved by R*.
class IndicatorRate {
 public:
  explicit IndicatorRate(double rstar) : rstar_(rstar) {
    if (!(rstar > 0.0) || !std::isfinite(rstar))
      throw ValidationError("deterministic radius must be positive and finite");
  }

  double value(double r) const { return r == rstar_ ? 0.0 : kInf; }
  double left_derivative(double r) const { return r <= rstar_ ? -kInf : kInf; }
  double right_derivative(double r) const { return r < rstar_ ? -kInf : kInf; }
  double rstar() const { return rstar_; }
  Interval domain() const { return {rstar_, rstar_}; }
  std::vector<double> breakpoints() const { return {rstar_}; }
  std::string_view kind() const { return "deterministic"; }

 private:
  double rstar_;
};

/// Norm of an n-vector of N(0, sigma^2) coordinates, divided by sqrt(n).
/// I(R) = R^2/(2 sigma^2) - 1/2 - (1/2) log(R^2/sigma^2) on R > 0.
class GaussianGrainRate {
 public:
  explicit GaussianGrainRate(double sigma) : sigma_(sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      throw ValidationError("gaussian grain sigma must be positive and finite");
  }

  double value(double r) const {
    if (!(r > 0.0)) return kInf;
    const double z = r / sigma_;
    return 0.5 * z * z - 0.5 - std::log(z);
  }
  double left_derivative(double r) const {
    return r > 0.0 ? r / (sigma_ * sigma_) - 1.0 / r : -kInf;
  }
  double right_derivative(double r) const { return left_derivative(r); }
  double rstar() const { return sigma_; }
  Interval domain() const { return {0.0, kInf}; }
  std::string_view kind() const { return "gaussian"; }
  double sigma() const { return sigma_; }

 private:
  double sigma_;
};

/// Piecewise-linear interpolation of convex knots (R_i, I_i); +inf outside
/// [R_0, R_last]. One-sided derivatives are the adjacent knot slopes.
class TabulatedRate {
 public:
  struct Knot {
    double r;
    double value;
  };

  explicit TabulatedRate(std::vector<Knot> knots) : knots_(std::move(knots)) {
    validate();
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
      slopes_.push_back((knots_[i + 1].value - knots_[i].value) /
                        (knots_[i + 1].r - knots_[i].r));
    }
  }

  double value(double r) const {
    if (r < knots_.front().r || r > knots_.back().r) return kInf;
    const std::size_t i = segment_of(r);
    if (r == knots_[i].r) return knots_[i].value;
    return knots_[i].value + slopes_[i] * (r - knots_[i].r);
  }

  double left_derivative(double r) const {
    if (r <= knots_.front().r) return -kInf;
    if (r > knots_.back().r) return kInf;
    // Segment whose right end is >= r.
    auto it = std::lower_bound(knots_.begin(), knots_.end(), r,
                               [](const Knot& k, double x) { return k.r < x; });
    return slopes_[static_cast<std::size_t>(it - knots_.begin()) - 1];
  }

  double right_derivative(double r) const {
    if (r < knots_.front().r) return -kInf;
    if (r >= knots_.back().r) return kInf;
    return slopes_[segment_of(r)];
  }

  double rstar() const { return rstar_; }
  Interval domain() const { return {knots_.front().r, knots_.back().r}; }
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    out.reserve(knots_.size());
    for (const auto& k : knots_) out.push_back(k.r);
    return out;
  }
  std::string_view kind() const { return "tabulated"; }
  const std::vector<Knot>& knots() const { return knots_; }

 private:
  // Index i with knots_[i].r <= r < knots_[i+1].r (clamped to the last
  // segment at the right end).
  std::size_t segment_of(double r) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), r,
                               [](double x, const Knot& k) { return x < k.r; });
    std::size_t i = static_cast<std::size_t>(it - knots_.begin());
    i = i == 0 ? 0 : i - 1;
    return std::min(i, slopes_.size() - 1);
  }

  void validate() {
    if (knots_.size() < 2)
      throw ValidationError("tabulated rate function needs at least 2 knots");
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      const auto& k = knots_[i];
      if (!std::isfinite(k.r) || !std::isfinite(k.value) || k.r < 0.0 ||
          k.value < 0.0) {
        std::ostringstream os;
        os << "tabulated knot " << i << " (" << k.r << ", " << k.value
           << ") must be finite with R >= 0 and I >= 0";
        throw ValidationError(os.str());
      }
      if (i > 0 && !(k.r > knots_[i - 1].r))
        throw ValidationError("tabulated knot radii must be strictly increasing");
    }
    for (std::size_t i = 1; i + 1 < knots_.size(); ++i) {
      const auto& a = knots_[i - 1];
      const auto& b = knots_[i];
      const auto& c = knots_[i + 1];
      const double s0 = (b.value - a.value) / (b.r - a.r);
      const double s1 = (c.value - b.value) / (c.r - b.r);
      if (s0 > s1 + 1e-12 * (1.0 + std::abs(s0) + std::abs(s1))) {
        std::ostringstream os;
        os.precision(17);
        os << "tabulated rate function is not convex at knots (" << a.r << ", "
           << a.value << "), (" << b.r << ", " << b.value << "), (" << c.r
           << ", " << c.value << ")";
        throw ValidationError(os.str());
      }
    }
    int zeros = 0;
    for (const auto& k : knots_) {
      if (k.value == 0.0) {
        ++zeros;
        rstar_ = k.r;
      }
    }
    if (zeros != 1)
      throw ValidationError(
          "tabulated rate function must attain its minimum value 0 at exactly "
          "one knot");
    if (!(rstar_ > 0.0))
      throw ValidationError("tabulated rate function must vanish at some R* > 0");
  }

  std::vector<Knot> knots_;
  std::vector<double> slopes_;
  double rstar_ = 0.0;
};

/// Convex rate function whose derivative is piecewise linear and
/// nondecreasing, with upward jumps allowed at piece boundaries. Used to
/// generate rich families of test cases (kinks, flat-free minima, bounded
/// domains) with exact derivatives.
class PiecewiseQuadraticRate {
 public:
  /// On [start, next start): I'(R) = slope + curvature * (R - start).
  struct Piece {
    double start;
    double slope;
    double curvature;
  };

  PiecewiseQuadraticRate(double rstar, std::vector<Piece> pieces,
                         double domain_hi)
      : rstar_(rstar), pieces_(std::move(pieces)), hi_(domain_hi) {
    validate();
    // Value at each piece start, integrating I' from R*.
    const std::size_t k = piece_of(rstar_);
    starts_.assign(pieces_.size(), 0.0);
    starts_[k] = -integral(k, pieces_[k].start, rstar_);
    for (std::size_t j = k + 1; j < pieces_.size(); ++j)
      starts_[j] = starts_[j - 1] + integral(j - 1, pieces_[j - 1].start,
                                             pieces_[j].start);
    for (std::size_t j = k; j-- > 0;)
      starts_[j] = starts_[j + 1] - integral(j, pieces_[j].start,
                                             pieces_[j + 1].start);
  }

  double value(double r) const {
    if (r < pieces_.front().start || r > hi_) return kInf;
    if (r == rstar_) return 0.0;
    const std::size_t j = piece_of(r);
    return std::max(0.0, starts_[j] + integral(j, pieces_[j].start, r));
  }

  double left_derivative(double r) const {
    if (r <= pieces_.front().start) return -kInf;
    if (r > hi_) return kInf;
    auto it = std::lower_bound(pieces_.begin(), pieces_.end(), r,
                               [](const Piece& p, double x) { return p.start < x; });
    const std::size_t j = static_cast<std::size_t>(it - pieces_.begin()) - 1;
    return derivative_in(j, r);
  }

  double right_derivative(double r) const {
    if (r < pieces_.front().start) return -kInf;
    if (r >= hi_) return kInf;
    const std::size_t j = piece_of(r);
    return derivative_in(j, r);
  }

  double rstar() const { return rstar_; }
  Interval domain() const { return {pieces_.front().start, hi_}; }
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (const auto& p : pieces_) out.push_back(p.start);
    if (std::isfinite(hi_)) out.push_back(hi_);
    return out;
  }
  std::string_view kind() const { return "piecewise-quadratic"; }

 private:
  double derivative_in(std::size_t j, double r) const {
    return pieces_[j].slope + pieces_[j].curvature * (r - pieces_[j].start);
  }
  double integral(std::size_t j, double a, double b) const {
    const auto& p = pieces_[j];
    const double da = a - p.start;
    const double db = b - p.start;
    return p.slope * (db - da) + 0.5 * p.curvature * (db * db - da * da);
  }
  std::size_t piece_of(double r) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), r,
                               [](double x, const Piece& p) { return x < p.start; });
    const std::size_t i = static_cast<std::size_t>(it - pieces_.begin());
    return i == 0 ? 0 : i - 1;
  }

  void validate() const {
    if (pieces_.empty()) throw ValidationError("piecewise rate needs a piece");
    if (pieces_.front().start < 0.0)
      throw ValidationError("piecewise rate domain must lie in [0, inf)");
    for (std::size_t j = 0; j < pieces_.size(); ++j) {
      if (!(pieces_[j].curvature >= 0.0))
        throw ValidationError("piecewise rate curvature must be >= 0");
      if (j > 0) {
        if (!(pieces_[j].start > pieces_[j - 1].start))
          throw ValidationError("piece starts must increase");
        const double end_slope =
            derivative_in(j - 1, pieces_[j].start);
        if (end_slope > pieces_[j].slope)
          throw ValidationError("piecewise rate derivative must be nondecreasing");
      }
    }
    if (!(hi_ > pieces_.back().start))
      throw ValidationError("piecewise rate domain end must follow last piece");
    if (!(rstar_ > 0.0) || rstar_ < pieces_.front().start || rstar_ > hi_)
      throw ValidationError("piecewise rate R* must lie in its domain");
    const double lo = left_derivative(rstar_);
    const double hi = right_derivative(rstar_);
    if (!(lo <= 0.0 && hi >= 0.0))
      throw ValidationError("piecewise rate must attain its minimum at R*");
    // I must not stay at 0 on either side of R*.
    const std::size_t k = piece_of(rstar_);
    const bool left_ok = rstar_ == pieces_.front().start || lo < 0.0 ||
                         (rstar_ > pieces_[k].start ? pieces_[k].curvature
                                                    : pieces_[k - 1].curvature) > 0.0;
    const bool right_ok = rstar_ == hi_ || hi > 0.0 || pieces_[k].curvature > 0.0;
    if (!left_ok || !right_ok)
      throw ValidationError("piecewise rate must have a unique zero at R*");
  }

  double rstar_;
  std::vector<Piece> pieces_;
  double hi_;
  std::vector<double> starts_;
};

// ---------------------------------------------------------------------------
// Legendre transforms of scaled cumulant generating functions
// ---------------------------------------------------------------------------

using LogMgf = std::function<double(double)>;

/// Limiting scaled log-MGF Lambda(theta) = lim (1/n) log E exp(n theta X_n)
/// of the Gaussian-grain normalized radius.
inline double gaussian_log_mgf(double sigma, double theta) {
  const double a = theta * sigma;
  const double root = std::sqrt(a * a + 4.0);
  // (a + root)/2 written without cancellation for a << 0.
  const double u = a >= 0.0 ? 0.5 * (a + root) : 2.0 / (root - a);
  return 0.5 * a * u + std::log(u);
}

struct LegendreResult {
  double value;      // sup_theta (theta R - Lambda(theta)), possibly +inf
  double theta;      // maximizer; equals I'(R) where I is differentiable
  bool bracketed;    // false when the sup was not attained
  std::string diagnostic;
};

/// sup_theta (theta R - Lambda(theta)) over a bracket grown by doubling in
/// both directions; the maximizer is located by bisection on the slope sign.
template <class Lambda>
LegendreResult legendre_transform(Lambda&& lambda, double r,
                                  double theta_tol = 1e-12) {
  auto f = [&](double t) {
    const double l = lambda(t);
    return std::isfinite(l) ? t * r - l : -kInf;
  };
  const double f0 = f(0.0);
  double a = -1.0;
  double c = 1.0;
  for (const double dir : {1.0, -1.0}) {
    double b = dir;
    double fb = f(b);
    if (!(fb > f0)) continue;
    double prev = 0.0;
    double next = 2.0 * dir;
    int doublings = 0;
    while (f(next) >= fb) {
      if (++doublings > 64) {
        std::ostringstream os;
        os << "theta R - Lambda(theta) still increasing at theta = " << next
           << " for R = " << r;
        return {kInf, next, false, os.str()};
      }
      prev = b;
      b = next;
      fb = f(b);
      next *= 2.0;
    }
    a = std::min(prev, next);
    c = std::max(prev, next);
    break;
  }
  // Concave f: bisect on the sign of a central-difference slope, which is
  // monotone in theta for convex Lambda and so free of argmax jitter.
  const double h = 1e-5 * std::max({1.0, std::abs(a), std::abs(c)});
  auto rising = [&](double t) {
    const double up = lambda(t + h);
    const double down = lambda(t - h);
    if (!std::isfinite(up)) return false;
    if (!std::isfinite(down)) return true;
    return r > (up - down) / (2.0 * h);
  };
  double lo = a;
  double hi = c;
  for (int it = 0; it < 200 && hi - lo > theta_tol * std::max(1.0, std::abs(lo));
       ++it) {
    const double mid = 0.5 * (lo + hi);
    (rising(mid) ? lo : hi) = mid;
  }
  double theta = 0.5 * (lo + hi);
  double value = f(theta);
  if (!(value >= f0)) {
    value = f0;
    theta = 0.0;
  }
  return {value, theta, true, {}};
}

/// I = Lambda^* restricted to R >= 0. The maximizing theta is the derivative.
class LegendreRate {
 public:
  LegendreRate(LogMgf lambda, double theta_lo, double theta_hi)
      : lambda_(std::move(lambda)), theta_lo_(theta_lo), theta_hi_(theta_hi) {
    const double h = 1e-5;
    if (theta_lo_ < -2.0 * h) {
      rstar_ = (lambda_(h) - lambda_(-h)) / (2.0 * h);
    } else {
      rstar_ = (-3.0 * lambda_(0.0) + 4.0 * lambda_(h) - lambda_(2.0 * h)) /
               (2.0 * h);
    }
    if (!(rstar_ > 0.0) || !std::isfinite(rstar_))
      throw ValidationError("log-MGF must have Lambda'(0) > 0 (positive mean radius)");
  }

  double value(double r) const { return transform(r).value; }
  double left_derivative(double r) const { return derivative(r); }
  double right_derivative(double r) const { return derivative(r); }
  double rstar() const { return rstar_; }
  Interval domain() const { return {0.0, kInf}; }
  std::string_view kind() const { return "log-mgf"; }

  LegendreResult transform(double r) const {
    if (r < 0.0) return {kInf, -kInf, true, "negative radius"};
    return legendre_transform(
        [this](double t) {
          return (t < theta_lo_ || t > theta_hi_) ? kInf : lambda_(t);
        },
        r);
  }

 private:
  double derivative(double r) const {
    if (r < 0.0) return -kInf;
    const auto res = transform(r);
    return res.bracketed ? res.theta : kInf;
  }

  LogMgf lambda_;
  double theta_lo_;
  double theta_hi_;
  double rstar_ = 0.0;
};

/// Rate function 2 I(u/2) of X + X' for independent copies X, X'.
class SumRate {
 public:
  explicit SumRate(RateFunction base) : base_(std::move(base)) {}

  double value(double u) const { return 2.0 * base_(0.5 * u); }
  double left_derivative(double u) const { return base_.left_derivative(0.5 * u); }
  double right_derivative(double u) const { return base_.right_derivative(0.5 * u); }
  double rstar() const { return 2.0 * base_.rstar(); }
  Interval domain() const {
    const auto d = base_.domain();
    return {2.0 * d.lo, 2.0 * d.hi};
  }
  std::vector<double> breakpoints() const {
    auto b = base_.breakpoints();
    for (double& x : b) x *= 2.0;
    return b;
  }
  std::string_view kind() const { return "sum"; }

 private:
  RateFunction base_;
};

// ---------------------------------------------------------------------------
// Radius-law specifications
// ---------------------------------------------------------------------------

namespace law {

struct Deterministic {
  double rstar;
};

struct GaussianGrain {
  double sigma;
};

struct FromLogMgf {
  LogMgf lambda;
  double theta_lo = -kInf;
  double theta_hi = kInf;
  std::string label = "custom";
};

struct TabulatedConvex {
  std::vector<TabulatedRate::Knot> knots;
};

}  // namespace law

using RadiusLawSpec = std::variant<law::Deterministic, law::GaussianGrain,
                                   law::FromLogMgf, law::TabulatedConvex>;

inline std::string_view law_name(const RadiusLawSpec& spec) {
  static constexpr std::string_view kNames[] = {"deterministic", "gaussian",
                                                "log-mgf", "tabulated"};
  return kNames[spec.index()];
}

inline void validate(const law::FromLogMgf& s) {
  if (!s.lambda) throw ValidationError("log-MGF law has no function");
  if (!(s.theta_hi > 0.0) || s.theta_lo > 0.0)
    throw ValidationError("log-MGF must be finite on a right neighbourhood of 0");
  const double l0 = s.lambda(0.0);
  if (!(std::abs(l0) <= 1e-12))
    throw ValidationError("log-MGF must satisfy Lambda(0) = 0");
  const double eps = std::min(1e-3, 0.5 * s.theta_hi);
  if (!std::isfinite(s.lambda(eps)) || !std::isfinite(s.lambda(0.5 * eps)))
    throw ValidationError("log-MGF is not finite near 0+");
  // Midpoint convexity on a few sampled triples.
  const double lo = std::max(s.theta_lo, -1.0);
  const double hi = std::min(s.theta_hi, 1.0);
  for (int i = 0; i + 2 <= 16; ++i) {
    const double t0 = lo + (hi - lo) * i / 16.0;
    const double t2 = lo + (hi - lo) * (i + 2) / 16.0;
    const double t1 = 0.5 * (t0 + t2);
    const double l0v = s.lambda(t0), l1v = s.lambda(t1), l2v = s.lambda(t2);
    if (std::isfinite(l0v) && std::isfinite(l2v) &&
        l1v > 0.5 * (l0v + l2v) + 1e-12 * (1.0 + std::abs(l1v)))
      throw ValidationError("log-MGF is not convex");
  }
}

inline void validate(const RadiusLawSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, law::Deterministic>) {
          if (!(s.rstar > 0.0) || !std::isfinite(s.rstar))
            throw ValidationError("deterministic rstar must be positive");
        } else if constexpr (std::is_same_v<T, law::GaussianGrain>) {
          if (!(s.sigma > 0.0) || !std::isfinite(s.sigma))
            throw ValidationError("gaussian sigma must be positive");
        } else if constexpr (std::is_same_v<T, law::FromLogMgf>) {
          validate(s);
        } else {
          TabulatedRate check(s.knots);
          (void)check;
        }
      },
      spec);
}

inline RateFunction build_rate(const RadiusLawSpec& spec) {
  validate(spec);
  return std::visit(
      [](const auto& s) -> RateFunction {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, law::Deterministic>) {
          return RateFunction(IndicatorRate(s.rstar));
        } else if constexpr (std::is_same_v<T, law::GaussianGrain>) {
          return RateFunction(GaussianGrainRate(s.sigma));
        } else if constexpr (std::is_same_v<T, law::FromLogMgf>) {
          return RateFunction(LegendreRate(s.lambda, s.theta_lo, s.theta_hi));
        } else {
          return RateFunction(TabulatedRate(s.knots));
        }
      },
      spec);
}

inline Subgradient subdifferential(const RateFunction& rate, double r) {
  return rate.subdifferential(r);
}

// ---------------------------------------------------------------------------
// Moment condition  limsup_n E[X_n^{gamma n}]^{1/n} < inf  for some gamma > 1
// ---------------------------------------------------------------------------

struct MomentConditionReport {
  double gamma;
  bool satisfied;
  std::string evidence;
};

inline MomentConditionReport check_moment_condition(const RadiusLawSpec& spec) {
  validate(spec);
  constexpr double kGamma = 2.0;
  return std::visit(
      [&](const auto& s) -> MomentConditionReport {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, law::Deterministic>) {
          return {kGamma, true, "radii are bounded (deterministic)"};
        } else if constexpr (std::is_same_v<T, law::GaussianGrain>) {
          return {kGamma, true,
                  "Lambda(theta) is finite for every real theta, so I grows "
                  "linearly and dominates gamma log R"};
        } else if constexpr (std::is_same_v<T, law::TabulatedConvex>) {
          return {kGamma, true, "bounded support: I = +inf beyond the last knot"};
        } else {
          // By Varadhan, the limsup is exp(sup_R (gamma log R - I(R))); it is
          // finite iff gamma log R - I(R) turns down on a geometric grid.
          const LegendreRate rate(s.lambda, s.theta_lo, s.theta_hi);
          double best = -kInf;
          double best_r = 0.0;
          double last = -kInf;
          double r = rate.rstar();
          for (int k = 0; k <= 80; ++k, r *= 1.5) {
            const double i = rate.value(r);
            last = std::isfinite(i) ? kGamma * std::log(r) - i : -kInf;
            if (last > best) {
              best = last;
              best_r = r;
            }
          }
          const bool ok = std::isfinite(best) && last < best - 1.0;
          std::ostringstream os;
          os << "sup of " << kGamma << " log R - I(R) on a geometric grid is "
             << best << " at R = " << best_r
             << (ok ? "; tail decreases" : "; tail does not decrease");
          return {kGamma, ok, os.str()};
        }
      },
      spec);
}

}  // namespace hdbool
