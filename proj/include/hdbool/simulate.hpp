#pragma once

// Seeded Monte Carlo of the Boolean model in moderate dimension, used to
// validate the exact finite-n quantities.
//
// Every sample i draws from its own generator seeded by (seed, i), so the
// estimate is bit-identical for any number of worker threads.
//
// The spatial estimators simulate the Poisson germs in a ball of normalized
// radius r_max split into shells of equal log-volume ratio. Within a shell only
// germs whose radius can reach the origin (or the origin's grain) are
// generated, by thinning on the radius mark; this is exact in distribution
// and keeps the work per sample proportional to the number of shells.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>

#include <boost/math/special_functions/gamma.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "hdbool/errors.hpp"
#include "hdbool/finite_n.hpp"
#include "hdbool/parallel.hpp"

namespace hdbool {

inline constexpr const char* kGeneratorName =
    "mt19937_64, per-sample seed_seq(seed, sample index)";

struct McConfig {
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
  double truncation_multiplier = 1.0;
  double max_expected_points = 1e6;
  // Spatial cutoff is where the radius integrand falls this many nats below
  // its peak.
  double truncation_nats = 60.0;
  unsigned jobs = 1;

  void validate() const {
    if (samples < 1) throw ValidationError("mc samples must be >= 1");
    if (!(truncation_multiplier >= 1.0))
      throw ValidationError(
          "truncation multiplier below 1 would cut into the integrand support");
    if (!(max_expected_points > 0.0))
      throw ValidationError("max expected points must be positive");
    if (!(truncation_nats > 0.0))
      throw ValidationError("truncation nats must be positive");
  }
};

struct McEstimate {
  double mean;
  double std_error;
  std::uint64_t samples;
  std::uint64_t seed;
  std::string generator = kGeneratorName;
  std::optional<double> exact_reference;
};

/// Generator for sample `index` of a run seeded with `seed`.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

/// Uniform point in the closed ball B(0, radius) of R^n.
template <class Rng>
std::vector<double> sample_point_in_ball(int n, double radius, Rng& rng) {
  if (n < 1 || !(radius > 0.0))
    throw ValidationError("sample_point_in_ball needs n >= 1 and radius > 0");
  std::normal_distribution<double> normal;
  std::vector<double> p(static_cast<std::size_t>(n));
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& x : p) {
      x = normal(rng);
      norm2 += x * x;
    }
  } while (norm2 == 0.0);
  std::uniform_real_distribution<double> unif;
  const double scale =
      radius * std::pow(unif(rng), 1.0 / n) / std::sqrt(norm2);
  for (double& x : p) x *= scale;
  return p;
}

/// Norm of a uniform point in B(0, radius): radius U^{1/n}.
template <class Rng>
double sample_norm_in_ball(int n, double radius, Rng& rng) {
  std::uniform_real_distribution<double> unif;
  return radius * std::pow(unif(rng), 1.0 / n);
}

namespace detail {

/// Radius marks X_n: tail probabilities and draws conditioned on X_n >= x.
class RadiusSampler {
 public:
  explicit RadiusSampler(const FiniteRadiusLaw& law) : law_(law) {
    if (!law.atomic() && !law.is_gaussian())
      throw ValidationError(
          "Monte Carlo supports deterministic and gaussian radius laws only");
  }

  template <class Rng>
  double operator()(Rng& rng) const {
    if (law_.atomic()) return law_.atom();
    // chi^2_n = 2 Gamma(n/2, 1)
    std::gamma_distribution<double> gamma(shape(), 1.0);
    return from_gamma(gamma(rng));
  }

  /// P(X >= x).
  double tail(double x) const {
    if (x <= 0.0) return 1.0;
    if (law_.atomic()) return law_.atom() >= x ? 1.0 : 0.0;
    return boost::math::gamma_q(shape(), to_gamma(x));
  }

  /// Draw from the law of X given X >= x; `tail_x` is tail(x) > 0.
  template <class Rng>
  double at_least(double x, double tail_x, Rng& rng) const {
    if (law_.atomic() || x <= 0.0) return (*this)(rng);
    // inverse upper incomplete gamma at V tail(x), V uniform on (0, 1]
    std::uniform_real_distribution<double> unif;
    const double v = 1.0 - unif(rng);
    const double g = boost::math::gamma_q_inv(shape(), v * tail_x);
    return std::max(x, from_gamma(g));
  }

 private:
  double shape() const { return 0.5 * law_.dimension(); }
  double to_gamma(double x) const {
    const double t = x / law_.sigma();
    return 0.5 * law_.dimension() * t * t;
  }
  double from_gamma(double g) const {
    return law_.sigma() * std::sqrt(2.0 * g / law_.dimension());
  }

  const FiniteRadiusLaw& law_;
};

/// Shell edges 1 = e_0 > e_1 > ... > e_K > 0 in u = (|t| / reach)^n, halving
/// until a shell holds at most one germ on average; the last shell is [0, e_K].
inline std::vector<double> shell_edges(double expected_points) {
  std::vector<double> edges{1.0};
  double e = 1.0;
  while (expected_points * e > 1.0 && edges.size() < 1100) {
    e *= 0.5;
    edges.push_back(e);
  }
  edges.push_back(0.0);
  return edges;
}

struct Accumulated {
  double mean;
  double std_error;
};

/// Welford mean in index order; the mean of identical values is exact.
inline Accumulated accumulate(const std::vector<double>& values) {
  double mean = 0.0;
  double m2 = 0.0;
  std::uint64_t k = 0;
  for (double v : values) {
    ++k;
    const double d = v - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (v - mean);
  }
  const double var = k > 1 ? m2 / static_cast<double>(k - 1) : 0.0;
  return {mean, std::sqrt(std::max(var, 0.0) / static_cast<double>(k))};
}

template <class PerSample>
std::vector<double> run_samples(const McConfig& cfg, PerSample&& per_sample) {
  std::vector<double> values(cfg.samples);
  constexpr std::size_t kChunk = 1024;
  const std::size_t chunks = (values.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, cfg.jobs, [&](std::size_t c) {
    const std::size_t end = std::min(values.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      auto rng = substream(cfg.seed, i);
      values[i] = per_sample(rng);
    }
  });
  return values;
}

/// Normalized spatial cutoff r_max: upper end of the support of the
/// integrand x^n p(x), times the multiplier. It also bounds the support of
/// (x + s)^n p(x) for every s >= 0.
inline double spatial_cutoff(const ModelSpec& spec, int n, const McConfig& cfg) {
  QuadratureConfig q;
  q.truncation_nats = cfg.truncation_nats;
  const FiniteRadiusLaw law(spec.radius_law, n, q);
  return law.log_shifted_moment(0.0).support_hi * cfg.truncation_multiplier;
}

inline void check_cap(double expected, const McConfig& cfg, const char* what) {
  if (!(expected <= cfg.max_expected_points)) {
    std::ostringstream os;
    os << what << ": expected " << expected
       << " generated germs per sample exceeds the cap " << cfg.max_expected_points
       << "; use a smaller n or rho";
    throw ValidationError(os.str());
  }
}

/// Germs of a Poisson process with `expected` points uniform in the ball of
/// normalized radius `reach`, thinned shell by shell to those with radius at
/// least need(u_lo) where u_lo is the inner edge of the shell. Calls
/// visit(u, x) for each candidate (u = (|t| / reach)^n, x its radius) and
/// stops early when visit returns true.
template <class Rng, class Need, class Visit>
void for_each_candidate(double expected, const std::vector<double>& edges,
                        const RadiusSampler& radius, Need&& need, Visit&& visit,
                        Rng& rng) {
  std::uniform_real_distribution<double> unif;
  // inner shells first: they are the likeliest to produce a hit
  for (std::size_t k = edges.size() - 1; k > 0; --k) {
    const double lo = edges[k];
    const double hi = edges[k - 1];
    const double x_lo = need(lo);
    const double p = radius.tail(x_lo);
    const double mean = expected * (hi - lo) * p;
    if (!(mean > 0.0)) continue;
    std::poisson_distribution<std::uint64_t> count(mean);
    const std::uint64_t m = count(rng);
    for (std::uint64_t j = 0; j < m; ++j) {
      const double u = lo + (hi - lo) * unif(rng);
      const double x = radius.at_least(x_lo, p, rng);
      if (visit(u, x)) return;
    }
  }
}

/// Expected number of generated candidates, for the cap.
template <class Need>
double expected_candidates(double expected, const std::vector<double>& edges,
                           const RadiusSampler& radius, Need&& need) {
  double total = 0.0;
  for (std::size_t k = edges.size() - 1; k > 0; --k)
    total += expected * (edges[k - 1] - edges[k]) * radius.tail(need(edges[k]));
  return total;
}

}  // namespace detail

/// Fraction of samples in which some ball covers the origin.
inline McEstimate mc_coverage(const ModelSpec& spec, int n, const McConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (n < 1) throw ValidationError("dimension must be >= 1");
  if (spec.empty) return {0.0, 0.0, cfg.samples, cfg.seed, kGeneratorName, 0.0};
  const FiniteRadiusLaw law(spec.radius_law, n);
  const detail::RadiusSampler radius(law);
  const double r_max = detail::spatial_cutoff(spec, n, cfg);
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double expected =
      std::exp(n * spec.rho_at(n) + log_ball_volume(n, r_max * sqrt_n));
  const auto edges = detail::shell_edges(expected);
  // a germ at u covers the origin iff its radius is at least r_max u^{1/n}
  auto need = [&](double u) { return r_max * std::pow(u, 1.0 / n); };
  detail::check_cap(detail::expected_candidates(expected, edges, radius, need), cfg,
                    "mc_coverage");

  const auto values = detail::run_samples(cfg, [&](std::mt19937_64& rng) {
    bool covered = false;
    detail::for_each_candidate(
        expected, edges, radius, need,
        [&](double u, double x) { return covered = x >= need(u); }, rng);
    return covered ? 1.0 : 0.0;
  });
  const auto acc = detail::accumulate(values);
  const double ref =
      coverage_from_log_lambda(log_mean_indegree(spec, n), n, false).probability;
  return {acc.mean, acc.std_error, cfg.samples, cfg.seed, kGeneratorName, ref};
}

/// Palm mean degree by spatial simulation of the reduced process around a
/// ball of random radius S sqrt(n) at the origin.
inline McEstimate mc_palm_degree(const ModelSpec& spec, int n, const McConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (n < 1) throw ValidationError("dimension must be >= 1");
  if (spec.empty) return {0.0, 0.0, cfg.samples, cfg.seed, kGeneratorName, 0.0};
  const FiniteRadiusLaw law(spec.radius_law, n);
  const detail::RadiusSampler radius(law);
  const double r_max = detail::spatial_cutoff(spec, n, cfg);
  const double log_unit = n * spec.rho_at(n) + log_ball_volume(n, std::sqrt(n));
  {
    // cap at a typical origin radius
    const double s = law.typical();
    const double reach = s + r_max;
    const double expected = std::exp(log_unit + n * std::log(reach));
    auto need = [&](double u) { return reach * std::pow(u, 1.0 / n) - s; };
    detail::check_cap(
        detail::expected_candidates(expected, detail::shell_edges(expected), radius,
                                    need),
        cfg, "mc_palm_degree");
  }

  const auto values = detail::run_samples(cfg, [&](std::mt19937_64& rng) {
    const double s = radius(rng);
    const double reach = s + r_max;
    const double expected = std::exp(log_unit + n * std::log(reach));
    const auto edges = detail::shell_edges(expected);
    // the germ at u meets the origin's grain iff x >= reach u^{1/n} - s
    auto need = [&](double u) { return reach * std::pow(u, 1.0 / n) - s; };
    std::uint64_t hits = 0;
    detail::for_each_candidate(
        expected, edges, radius, need,
        [&](double u, double x) {
          if (x >= need(u)) ++hits;
          return false;
        },
        rng);
    return static_cast<double>(hits);
  });
  const auto acc = detail::accumulate(values);
  const double ref = std::exp(log_mean_palm_degree(spec, n));
  return {acc.mean, acc.std_error, cfg.samples, cfg.seed, kGeneratorName, ref};
}

/// Mixed-Poisson estimator: draw only S and average the exact conditional
/// mean e^{n rho_n} E_X[V_n((X + S) sqrt n)].
inline McEstimate mc_conditional_poisson_degree(const ModelSpec& spec, int n,
                                                const McConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (n < 1) throw ValidationError("dimension must be >= 1");
  if (spec.empty) return {0.0, 0.0, cfg.samples, cfg.seed, kGeneratorName, 0.0};
  const FiniteRadiusLaw law(spec.radius_law, n);
  const detail::RadiusSampler radius(law);
  const double rho_n = spec.rho_at(n);

  const auto values = detail::run_samples(cfg, [&](std::mt19937_64& rng) {
    const double s = radius(rng);
    if (law.atomic())
      return std::exp(n * rho_n + log_ball_volume(n, (law.atom() + s) * std::sqrt(n)));
    return std::exp(n * rho_n + log_ball_volume(n, std::sqrt(n)) +
                    law.log_shifted_moment(s).log_value);
  });
  const auto acc = detail::accumulate(values);
  const double ref = std::exp(log_mean_palm_degree(spec, n));
  return {acc.mean, acc.std_error, cfg.samples, cfg.seed, kGeneratorName, ref};
}

}  // namespace hdbool
