#pragma once

// Config parsing (JSON documents, two-column CSV rate tables) and the CSV /
// JSON emitters used by the command-line tool. All logarithms are natural;
// numbers are written locale-independently with 17 significant digits.

#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hdbool/errors.hpp"
#include "hdbool/finite_n.hpp"
#include "hdbool/percolation.hpp"
#include "hdbool/rate_function.hpp"
#include "hdbool/simulate.hpp"
#include "hdbool/thresholds.hpp"

namespace hdbool::io {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Number formatting
// ---------------------------------------------------------------------------

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (is_pos_inf(x)) return "inf";
  if (is_neg_inf(x)) return "-inf";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                                 std::chars_format::general, 17);
  return std::string(buf.data(), end);
}

/// Finite values as JSON numbers, infinities as the strings "inf" / "-inf".
inline json extended(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

inline double parse_extended(const json& j, std::string_view what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ValidationError(std::string(what) + " must be a number");
}

// ---------------------------------------------------------------------------
// Reading
// ---------------------------------------------------------------------------

namespace detail {

inline const json& require(const json& obj, const char* key,
                           std::string_view where) {
  if (!obj.is_object() || !obj.contains(key))
    throw ValidationError(std::string(where) + ": missing field '" + key + "'");
  return obj.at(key);
}

inline double number(const json& obj, const char* key, std::string_view where) {
  const auto& v = require(obj, key, where);
  if (!v.is_number())
    throw ValidationError(std::string(where) + "." + key + " must be a number");
  return v.get<double>();
}

inline double number_or(const json& obj, const char* key, double fallback,
                        std::string_view where) {
  return obj.contains(key) ? number(obj, key, where) : fallback;
}

inline void only_keys(const json& obj, std::initializer_list<std::string_view> keys,
                      std::string_view where) {
  if (!obj.is_object())
    throw ValidationError(std::string(where) + " must be an object");
  for (const auto& [k, _] : obj.items()) {
    bool known = false;
    for (auto key : keys) known = known || key == k;
    if (!known)
      throw ValidationError(std::string(where) + ": unknown field '" + k + "'");
  }
}

}  // namespace detail

/// Two-column CSV (R, I). Blank lines, '#' comments and a non-numeric header
/// line are skipped.
inline std::vector<TabulatedRate::Knot> parse_rate_table(std::istream& in) {
  std::vector<TabulatedRate::Knot> knots;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ValidationError("rate table line " + std::to_string(line_no) +
                            ": expected two comma-separated columns");
    auto parse = [&](std::string_view s, double& out) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
      return ec == std::errc() && p == s.data() + s.size();
    };
    TabulatedRate::Knot k{};
    const std::string_view sv(line);
    const bool ok_r = parse(sv.substr(0, comma), k.r);
    const bool ok_i = parse(sv.substr(comma + 1), k.value);
    if (!ok_r || !ok_i) {
      if (knots.empty()) continue;  // header
      throw ValidationError("rate table line " + std::to_string(line_no) +
                            ": not two numbers");
    }
    knots.push_back(k);
  }
  return knots;
}

inline std::vector<TabulatedRate::Knot> read_rate_table(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open rate table " + path.string());
  return parse_rate_table(in);
}

/// Parses {"type": "deterministic" | "gaussian" | "tabulated" | "log_mgf", ...}.
/// Relative CSV paths resolve against base_dir.
inline RadiusLawSpec parse_radius_law(const json& j,
                                      const std::filesystem::path& base_dir = {}) {
  constexpr std::string_view where = "model.radius_law";
  const auto& type_j = detail::require(j, "type", where);
  if (!type_j.is_string()) throw ValidationError("radius_law.type must be a string");
  const auto type = type_j.get<std::string>();
  RadiusLawSpec spec;
  if (type == "deterministic") {
    detail::only_keys(j, {"type", "rstar"}, where);
    spec = law::Deterministic{detail::number(j, "rstar", where)};
  } else if (type == "gaussian") {
    detail::only_keys(j, {"type", "sigma"}, where);
    spec = law::GaussianGrain{detail::number(j, "sigma", where)};
  } else if (type == "tabulated") {
    detail::only_keys(j, {"type", "knots", "csv"}, where);
    law::TabulatedConvex tab;
    if (j.contains("csv")) {
      if (!j.at("csv").is_string()) throw ValidationError("radius_law.csv must be a path");
      std::filesystem::path p = j.at("csv").get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      tab.knots = read_rate_table(p);
    } else {
      const auto& knots = detail::require(j, "knots", where);
      if (!knots.is_array()) throw ValidationError("radius_law.knots must be an array");
      for (const auto& k : knots) {
        if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number())
          throw ValidationError("radius_law.knots entries must be [R, I] pairs");
        tab.knots.push_back({k[0].get<double>(), k[1].get<double>()});
      }
    }
    spec = std::move(tab);
  } else if (type == "log_mgf") {
    const auto& fam_j = detail::require(j, "family", where);
    if (!fam_j.is_string()) throw ValidationError("radius_law.family must be a string");
    const auto family = fam_j.get<std::string>();
    if (family == "gaussian_grain") {
      detail::only_keys(j, {"type", "family", "sigma"}, where);
      const double sigma = detail::number(j, "sigma", where);
      spec = law::FromLogMgf{
          [sigma](double t) { return gaussian_log_mgf(sigma, t); }, -kInf, kInf,
          "gaussian_grain"};
    } else if (family == "normal") {
      // Lambda(theta) = mean theta + variance theta^2 / 2
      detail::only_keys(j, {"type", "family", "mean", "variance"}, where);
      const double mean = detail::number(j, "mean", where);
      const double var = detail::number(j, "variance", where);
      if (!(var > 0.0)) throw ValidationError("normal log-MGF variance must be > 0");
      spec = law::FromLogMgf{
          [mean, var](double t) { return mean * t + 0.5 * var * t * t; }, -kInf,
          kInf, "normal"};
    } else {
      throw ValidationError("unknown log_mgf family '" + family + "'");
    }
  } else {
    throw ValidationError("unknown radius_law.type '" + type + "'");
  }
  validate(spec);
  return spec;
}

inline ModelSpec parse_model(const json& j, const std::filesystem::path& base_dir = {}) {
  constexpr std::string_view where = "model";
  detail::only_keys(j, {"rho", "rho_n", "radius_law", "empty"}, where);
  ModelSpec m;
  m.rho = detail::number(j, "rho", where);
  m.radius_law = parse_radius_law(detail::require(j, "radius_law", where), base_dir);
  if (j.contains("empty")) {
    if (!j.at("empty").is_boolean()) throw ValidationError("model.empty must be a boolean");
    m.empty = j.at("empty").get<bool>();
  }
  if (j.contains("rho_n")) {
    const auto& r = j.at("rho_n");
    detail::only_keys(r, {"rule", "coef"}, "model.rho_n");
    const auto& rule_j = detail::require(r, "rule", "model.rho_n");
    if (!rule_j.is_string()) throw ValidationError("model.rho_n.rule must be a string");
    const auto rule = rule_j.get<std::string>();
    const double coef = detail::number_or(r, "coef", 0.0, "model.rho_n");
    if (rule == "constant") {
      m.rho_n = RhoSchedule::constant();
    } else if (rule == "inverse_n") {
      m.rho_n = RhoSchedule::inverse_n(coef);
    } else if (rule == "log_n_over_n") {
      m.rho_n = RhoSchedule::log_n_over_n(coef);
    } else {
      throw ValidationError("unknown rho_n rule '" + rule + "'");
    }
  }
  m.validate();
  return m;
}

inline QuadratureConfig parse_quadrature(const json& j) {
  detail::only_keys(j, {"rel_tol", "truncation_nats", "max_depth"}, "quadrature");
  QuadratureConfig q;
  q.rel_tol = detail::number_or(j, "rel_tol", q.rel_tol, "quadrature");
  q.truncation_nats =
      detail::number_or(j, "truncation_nats", q.truncation_nats, "quadrature");
  const double depth = detail::number_or(j, "max_depth", q.max_depth, "quadrature");
  if (!(depth >= 1.0 && depth <= 60.0))
    throw ValidationError("quadrature.max_depth must be in [1, 60]");
  q.max_depth = static_cast<unsigned>(depth);
  q.validate();
  return q;
}

inline std::vector<int> parse_n_list(const json& j, std::string_view where) {
  if (!j.is_array()) throw ValidationError(std::string(where) + " must be an array");
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer())
      throw ValidationError(std::string(where) + " entries must be integers");
    out.push_back(v.get<int>());
  }
  validate_n_list(out);
  return out;
}

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

inline constexpr std::string_view kUnitsLine = "# units: nats (natural logarithms)";

inline json to_json(const OptimalityCertificate& c) {
  return {{"target", to_string(c.target)},
          {"radius", c.radius},
          {"g_value", c.g_value},
          {"subgrad_lo", extended(c.subgrad_lo)},
          {"subgrad_hi", extended(c.subgrad_hi)},
          {"holds", c.holds()}};
}

inline json to_json(const ThresholdReport& r) {
  return {{"units", "nats"},
          {"law", r.law},
          {"rho", r.rho},
          {"rstar", r.rstar},
          {"tau_d", r.tau_d},
          {"tau_p", r.tau_p},
          {"tau_v", r.tau_v},
          {"r_d", r.r_d},
          {"r_p", r.r_p},
          {"r_v", r.r_v},
          {"tau_v_minus_tau_p", r.tau_v - r.tau_p},
          {"tau_p_minus_tau_d", r.tau_p - r.tau_d},
          {"regime", to_string(r.regime)},
          {"certificates",
           {{"degree", to_json(r.cert_d)},
            {"percolation", to_json(r.cert_p)},
            {"volume_fraction", to_json(r.cert_v)}}}};
}

inline std::string csv_header_thresholds() {
  return "law,rho,rstar,tau_d,tau_p,tau_v,r_d,r_p,r_v,tau_v_minus_tau_p,regime,"
         "cert_d_g,cert_d_lo,cert_d_hi,cert_p_g,cert_p_lo,cert_p_hi,"
         "cert_v_g,cert_v_lo,cert_v_hi";
}

inline std::string csv_row(const ThresholdReport& r) {
  std::ostringstream os;
  os << r.law;
  for (double x : {r.rho, r.rstar, r.tau_d, r.tau_p, r.tau_v, r.r_d, r.r_p, r.r_v,
                   r.tau_v - r.tau_p})
    os << ',' << format_double(x);
  os << ',' << to_string(r.regime);
  for (const auto* c : {&r.cert_d, &r.cert_p, &r.cert_v})
    os << ',' << format_double(c->g_value) << ',' << format_double(c->subgrad_lo)
       << ',' << format_double(c->subgrad_hi);
  return os.str();
}

inline std::string csv_header_scan() {
  return "n,log_lambda_n,coverage,exponent_vf,target_vf,log_mean_degree,"
         "exponent_deg,target_deg";
}

inline std::string csv_row(const FiniteNPoint& p, double target_vf,
                           double target_deg) {
  std::ostringstream os;
  os << p.n;
  for (double x : {p.log_lambda_n, p.coverage, p.exponent_vf, target_vf,
                   p.log_mean_degree, p.exponent_deg, target_deg})
    os << ',' << format_double(x);
  return os.str();
}

inline json to_json(const FiniteNPoint& p) {
  return {{"n", p.n},
          {"log_lambda_n", extended(p.log_lambda_n)},
          {"coverage", p.coverage},
          {"log_coverage", extended(p.log_coverage)},
          {"supercritical", p.supercritical},
          {"exponent_vf", extended(p.exponent_vf)},
          {"log_mean_degree", extended(p.log_mean_degree)},
          {"exponent_deg", extended(p.exponent_deg)}};
}

inline json to_json(const ExponentScan& s) {
  json pts = json::array();
  for (const auto& p : s.points) pts.push_back(to_json(p));
  return {{"units", "nats"},
          {"target_vf", s.target_vf},
          {"target_deg", s.target_deg},
          {"points", pts}};
}

inline std::string csv_header_branching() {
  return "n,log_y_n,y_n_normalized_exponent,survival,thin_radius";
}

inline std::string csv_row(const BranchingProbe& b) {
  std::ostringstream os;
  os << b.n << ',' << format_double(b.log_y_n) << ','
     << format_double(b.normalized_exponent()) << ',' << format_double(b.survival)
     << ',' << (b.thin_radius ? format_double(*b.thin_radius) : std::string());
  return os.str();
}

inline json to_json(const BranchingProbe& b) {
  json j = {{"kind", "probe"},
            {"n", b.n},
            {"log_y_n", extended(b.log_y_n)},
            {"y_n_normalized_exponent", extended(b.normalized_exponent())},
            {"survival", b.survival},
            {"survival_clamped", b.clamped}};
  j["thin_radius"] = b.thin_radius ? json(*b.thin_radius) : json(nullptr);
  return j;
}

inline std::string csv_header_mc() {
  return "quantity,n,mean,stderr,samples,seed,generator,exact_reference";
}

inline std::string csv_row(std::string_view quantity, int n, const McEstimate& e) {
  std::ostringstream os;
  os << quantity << ',' << n << ',' << format_double(e.mean) << ','
     << format_double(e.std_error) << ',' << e.samples << ',' << e.seed << ",\""
     << e.generator << "\","
     << (e.exact_reference ? format_double(*e.exact_reference) : std::string());
  return os.str();
}

inline json to_json(std::string_view quantity, int n, const McEstimate& e) {
  json j = {{"quantity", quantity}, {"n", n},
            {"mean", e.mean},       {"stderr", e.std_error},
            {"samples", e.samples}, {"seed", e.seed},
            {"generator", e.generator}};
  j["exact_reference"] = e.exact_reference ? json(*e.exact_reference) : json(nullptr);
  return j;
}

}  // namespace hdbool::io
