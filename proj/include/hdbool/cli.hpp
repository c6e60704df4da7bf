#pragma once

// Command-line front end. Every subcommand reads one JSON document; the
// subcommand picks which command block of it is used.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hdbool/errors.hpp"
#include "hdbool/finite_n.hpp"
#include "hdbool/io.hpp"
#include "hdbool/percolation.hpp"
#include "hdbool/rate_function.hpp"
#include "hdbool/simulate.hpp"
#include "hdbool/thresholds.hpp"

namespace hdbool::cli {

using json = nlohmann::json;

enum ExitCode : int { kOk = 0, kValidation = 2, kConsistency = 3 };

struct Options {
  std::string config;
  std::string out;
  std::string format = "csv";
  std::optional<double> rho;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
};

/// Parsed configuration document.
struct RunConfig {
  json doc;
  std::filesystem::path base_dir;
  QuadratureConfig quadrature;

  const json* block(const char* name) const {
    return doc.contains(name) ? &doc.at(name) : nullptr;
  }

  ModelSpec model(const Options& opt) const {
    const auto* m = block("model");
    if (!m) throw ValidationError("config: missing 'model' block");
    auto spec = io::parse_model(*m, base_dir);
    if (opt.rho) {
      spec.rho = *opt.rho;
      spec.validate();
    }
    return spec;
  }
};

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path);
  RunConfig cfg;
  try {
    cfg.doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("config " + path + ": " + e.what());
  }
  io::detail::only_keys(cfg.doc,
                        {"model", "quadrature", "thresholds", "scan", "mc",
                         "branching", "gaussian_report"},
                        "config");
  cfg.base_dir = std::filesystem::path(path).parent_path();
  if (const auto* q = cfg.block("quadrature")) cfg.quadrature = io::parse_quadrature(*q);
  return cfg;
}

/// Writes a finished document to --out or the given stream.
inline void emit(const Options& opt, std::ostream& out, const std::string& text) {
  if (opt.out.empty()) {
    out << text;
    out.flush();
    return;
  }
  std::ofstream f(opt.out, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + opt.out);
  f << text;
}

inline std::string csv_document(const std::string& header, const std::string& rows) {
  return std::string(io::kUnitsLine) + "\n" + header + "\n" + rows;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

inline std::string cmd_thresholds(const RunConfig& cfg, const Options& opt) {
  if (const auto* t = cfg.block("thresholds")) io::detail::only_keys(*t, {}, "thresholds");
  const auto spec = cfg.model(opt);
  const auto r = report(spec.radius_law, spec.rho);
  if (opt.format == "json") return io::to_json(r).dump(2) + "\n";
  return csv_document(io::csv_header_thresholds(), io::csv_row(r) + "\n");
}

/// Streams rows as they complete; the last line is "# end".
inline void cmd_scan(const RunConfig& cfg, const Options& opt, std::ostream& out) {
  const auto* s = cfg.block("scan");
  if (!s) throw ValidationError("config: missing 'scan' block");
  io::detail::only_keys(*s, {"n_list"}, "scan");
  const auto n_list = io::parse_n_list(io::detail::require(*s, "n_list", "scan"), "scan.n_list");
  const auto spec = cfg.model(opt);
  const auto rate = build_rate(spec.radius_law);
  const double target_vf = spec.rho - tau_volume(rate);
  const double target_deg = spec.rho - tau_degree(rate);

  if (opt.format == "json") {
    const auto scan = exponent_scan(spec, n_list, cfg.quadrature, opt.jobs);
    emit(opt, out, io::to_json(scan).dump(2) + "\n");
    return;
  }
  std::ofstream file;
  std::ostream* sink = &out;
  if (!opt.out.empty()) {
    file.open(opt.out, std::ios::binary);
    if (!file) throw ValidationError("cannot write " + opt.out);
    sink = &file;
  }
  *sink << io::kUnitsLine << '\n' << io::csv_header_scan() << '\n' << std::flush;
  exponent_scan(spec, n_list, cfg.quadrature, opt.jobs, [&](const FiniteNPoint& p) {
    *sink << io::csv_row(p, target_vf, target_deg) << '\n' << std::flush;
  });
  *sink << "# end\n" << std::flush;
}

inline std::string cmd_mc(const RunConfig& cfg, const Options& opt) {
  const auto* m = cfg.block("mc");
  if (!m) throw ValidationError("config: missing 'mc' block");
  io::detail::only_keys(*m,
                        {"n", "quantity", "samples", "seed", "truncation_multiplier",
                         "max_expected_points", "truncation_nats", "lambda_target"},
                        "mc");
  const auto& n_j = io::detail::require(*m, "n", "mc");
  if (!n_j.is_number_integer() || n_j.get<int>() < 1)
    throw ValidationError("mc.n must be an integer >= 1");
  const int n = n_j.get<int>();
  const auto& q_j = io::detail::require(*m, "quantity", "mc");
  const std::string quantity = q_j.is_string() ? q_j.get<std::string>() : "";
  if (quantity != "coverage" && quantity != "palm_degree" &&
      quantity != "conditional_degree")
    throw ValidationError(
        "mc.quantity must be coverage, palm_degree or conditional_degree");

  McConfig mc;
  auto count = [&](const char* key, std::uint64_t fallback) -> std::uint64_t {
    if (!m->contains(key)) return fallback;
    const auto& v = m->at(key);
    if (!v.is_number_unsigned())
      throw ValidationError(std::string("mc.") + key + " must be a nonnegative integer");
    return v.get<std::uint64_t>();
  };
  mc.samples = count("samples", mc.samples);
  mc.seed = opt.seed.value_or(count("seed", mc.seed));
  mc.truncation_multiplier = io::detail::number_or(
      *m, "truncation_multiplier", mc.truncation_multiplier, "mc");
  mc.max_expected_points =
      io::detail::number_or(*m, "max_expected_points", mc.max_expected_points, "mc");
  mc.truncation_nats =
      io::detail::number_or(*m, "truncation_nats", mc.truncation_nats, "mc");
  mc.jobs = opt.jobs;
  mc.validate();

  auto spec = cfg.model(opt);
  if (m->contains("lambda_target")) {
    const double target = io::detail::number(*m, "lambda_target", "mc");
    if (!(target > 0.0)) throw ValidationError("mc.lambda_target must be positive");
    spec.rho = rho_for_mean_indegree(spec.radius_law, n, target, cfg.quadrature);
    spec.rho_n = RhoSchedule::constant();
  }

  McEstimate e;
  if (quantity == "coverage") {
    e = mc_coverage(spec, n, mc);
  } else if (quantity == "palm_degree") {
    e = mc_palm_degree(spec, n, mc);
  } else {
    e = mc_conditional_poisson_degree(spec, n, mc);
  }
  if (opt.format == "json") {
    auto j = io::to_json(quantity, n, e);
    j["units"] = "nats";
    j["rho"] = spec.rho;
    return j.dump(2) + "\n";
  }
  return csv_document(io::csv_header_mc(), io::csv_row(quantity, n, e) + "\n");
}

inline std::string cmd_branching(const RunConfig& cfg, const Options& opt) {
  const auto* b = cfg.block("branching");
  if (!b) throw ValidationError("config: missing 'branching' block");
  io::detail::only_keys(*b, {"n_list", "gamma"}, "branching");
  const auto n_list =
      io::parse_n_list(io::detail::require(*b, "n_list", "branching"), "branching.n_list");
  std::optional<double> gamma;
  if (b->contains("gamma")) gamma = io::detail::number(*b, "gamma", "branching");
  const auto spec = cfg.model(opt);
  const auto rows = percolation_probe_scan(spec, n_list, gamma, cfg.quadrature, opt.jobs);
  if (opt.format == "json") {
    json arr = json::array();
    for (const auto& r : rows) arr.push_back(io::to_json(r));
    return json{{"units", "nats"}, {"kind", "probe"}, {"rows", arr}}.dump(2) + "\n";
  }
  std::string body;
  for (const auto& r : rows) body += io::csv_row(r) + "\n";
  return std::string(io::kUnitsLine) +
         "\n# probe: Poisson branching survival, a limit for the percolation "
         "probability rather than its finite-n value\n" +
         io::csv_header_branching() + "\n" + body;
}

struct GaussianReportLine {
  std::string quantity;
  double computed;
  std::optional<double> closed_form;
};

/// Closed-form Gaussian-grain constants next to the values computed by the
/// generic solvers.
inline std::vector<GaussianReportLine> gaussian_report_lines(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw ValidationError("gaussian_report.sigma must be positive");
  const auto rate = build_rate(law::GaussianGrain{sigma});
  const auto legendre = build_rate(law::FromLogMgf{
      [sigma](double t) { return gaussian_log_mgf(sigma, t); }, -kInf, kInf,
      "gaussian_grain"});
  const auto rep = report(rate, 0.0, "gaussian");
  const double c = solve_gaussian_cubic();
  const double ls = std::log(sigma);
  const double base = -kHalfLog2PiE - ls;
  const double tau_v = base - 0.5 * (std::log(4.0) - 1.0);
  const double tau_d = base - 0.5 * (std::log(27.0 / 2.0) - 1.0);
  const double tau_p = base - 0.5 * (std::log(c * c * (1 + c) * (1 + c)) - c * c + 1.0);
  const double r_v = sigma * std::numbers::sqrt2;
  auto closed_i = [sigma](double r) {
    const double x = r / sigma;
    return 0.5 * x * x - 0.5 - std::log(x);
  };
  const double u = (sigma + std::sqrt(sigma * sigma + 4.0)) / 2.0;
  const double lambda1 = 0.5 * sigma * u + std::log(u);
  const double poltyrev = -kHalfLog2PiE - ls;

  std::vector<GaussianReportLine> lines{
      {"sigma", sigma, std::nullopt},
      {"c", c, std::nullopt},
      {"I(R_v)", rate(r_v), closed_i(r_v)},
      {"I(R_v) via Legendre transform", legendre(r_v), closed_i(r_v)},
      {"Lambda(1)", gaussian_log_mgf(sigma, 1.0), lambda1},
      {"R_v", rep.r_v, r_v},
      {"R_d", rep.r_d, sigma * std::sqrt(1.5)},
      {"R_p", rep.r_p, sigma * c},
      {"tau_v", rep.tau_v, tau_v},
      {"tau_d", rep.tau_d, tau_d},
      {"tau_p", rep.tau_p, tau_p},
      {"tau_v truncated (Poltyrev)", poltyrev, std::nullopt},
      {"tau_v - tau_v truncated", rep.tau_v - poltyrev, -0.5 * (std::log(4.0) - 1.0)},
  };
  // 1 < sqrt(3/2) < c < sqrt 2 < 1 + c < sqrt 6, scaled by sigma
  const std::array<double, 6> chain{sigma, rep.r_d, rep.r_p, rep.r_v,
                                    rep.r_p + sigma, 2.0 * rep.r_d};
  bool chain_ok = true;
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) chain_ok = chain_ok && chain[i] < chain[i + 1];
  const bool taus_ok = rep.tau_d < rep.tau_p && rep.tau_p < rep.tau_v;
  const bool below = rep.tau_v < poltyrev;
  lines.push_back({"radius chain strict", chain_ok ? 1.0 : 0.0, 1.0});
  lines.push_back({"tau_d < tau_p < tau_v", taus_ok ? 1.0 : 0.0, 1.0});
  lines.push_back({"tau_v < tau_v truncated", below ? 1.0 : 0.0, 1.0});
  if (!chain_ok || !taus_ok || !below)
    throw ConsistencyError("gaussian report orderings failed");
  return lines;
}

inline std::string render_gaussian_report(double sigma, const std::string& format) {
  const auto lines = gaussian_report_lines(sigma);
  if (format == "json") {
    json arr = json::array();
    for (const auto& l : lines) {
      json j = {{"quantity", l.quantity}, {"computed", l.computed}};
      j["closed_form"] = l.closed_form ? json(*l.closed_form) : json(nullptr);
      j["abs_diff"] = l.closed_form ? json(std::abs(l.computed - *l.closed_form))
                                    : json(nullptr);
      arr.push_back(j);
    }
    return json{{"units", "nats"}, {"sigma", sigma}, {"lines", arr}}.dump(2) + "\n";
  }
  std::string body;
  for (const auto& l : lines) {
    body += "\"" + l.quantity + "\"," + io::format_double(l.computed) + ",";
    if (l.closed_form)
      body += io::format_double(*l.closed_form) + "," +
              io::format_double(std::abs(l.computed - *l.closed_form));
    else
      body += ",";
    body += "\n";
  }
  return csv_document("quantity,computed,closed_form,abs_diff", body);
}

inline std::string cmd_gaussian_report(const RunConfig& cfg, const Options& opt) {
  double sigma = 1.0;
  if (const auto* g = cfg.block("gaussian_report")) {
    io::detail::only_keys(*g, {"sigma"}, "gaussian_report");
    sigma = io::detail::number_or(*g, "sigma", sigma, "gaussian_report");
  }
  return render_gaussian_report(sigma, opt.format);
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"High-dimensional Boolean model thresholds and finite-n tables"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool with_seed) {
    sub->add_option("--config", opt.config, "JSON config file")->required();
    sub->add_option("--out", opt.out, "output file (default stdout)");
    sub->add_option("--format", opt.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--jobs", opt.jobs, "worker threads")->check(CLI::Range(1u, 1024u));
    sub->add_option("--rho", opt.rho, "override model.rho");
    if (with_seed) sub->add_option("--seed", opt.seed, "override mc.seed");
  };
  auto* thresholds = app.add_subcommand("thresholds", "tau_d, tau_p, tau_v and optimal radii");
  auto* scan = app.add_subcommand("scan", "finite-n exponents over a list of dimensions");
  auto* mc = app.add_subcommand("mc", "Monte Carlo estimate with exact reference");
  auto* branching = app.add_subcommand("branching", "branching-process percolation probe");
  auto* gaussian = app.add_subcommand("gaussian-report", "Gaussian-grain constants");
  for (auto* s : {thresholds, scan, branching}) add_common(s, false);
  add_common(mc, true);
  add_common(gaussian, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    const auto cfg = load_config(opt.config);
    if (*thresholds) {
      emit(opt, out, cmd_thresholds(cfg, opt));
    } else if (*scan) {
      cmd_scan(cfg, opt, out);
    } else if (*mc) {
      emit(opt, out, cmd_mc(cfg, opt));
    } else if (*branching) {
      emit(opt, out, cmd_branching(cfg, opt));
    } else if (*gaussian) {
      emit(opt, out, cmd_gaussian_report(cfg, opt));
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const ConsistencyError& e) {
    err << "internal consistency failure: " << e.what() << '\n';
    return kConsistency;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kConsistency;
  }
  return kOk;
}

}  // namespace hdbool::cli
