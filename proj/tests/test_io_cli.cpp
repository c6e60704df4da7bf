#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "hdbool/cli.hpp"
#include "hdbool/io.hpp"

using namespace hdbool;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "hdbool");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path write_temp(const std::string& name, const std::string& text) {
  const auto dir = fs::temp_directory_path() / "hdbool_tests";
  fs::create_directories(dir);
  const auto p = dir / name;
  std::ofstream(p) << text;
  return p;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  return out;
}

const std::string kConfigs = HDBOOL_CONFIG_DIR;

}  // namespace

TEST_CASE("number formatting round-trips", "[io]") {
  for (double x : {0.1, -2.2202833759268646, 1e-300, 6.02214076e23, 1.0 / 3.0}) {
    CHECK(std::stod(io::format_double(x)) == x);
  }
  CHECK(io::format_double(kInf) == "inf");
  CHECK(io::format_double(-kInf) == "-inf");
  CHECK(io::parse_extended(io::extended(-kInf), "x") == -kInf);
  CHECK(io::parse_extended(io::extended(2.5), "x") == 2.5);
}

TEST_CASE("rate table reader", "[io]") {
  std::istringstream in("# comment\nR,I\n0.5, 1.0\n1.0,0\r\n\n2.0,1.5\n");
  const auto knots = io::parse_rate_table(in);
  REQUIRE(knots.size() == 3);
  CHECK(knots[1].r == 1.0);
  CHECK(knots[2].value == 1.5);
  std::istringstream bad("0.5,1\n1.0,zero\n");
  CHECK_THROWS_AS(io::parse_rate_table(bad), ValidationError);
}

TEST_CASE("model parsing", "[io]") {
  const auto m = io::parse_model(nlohmann::json::parse(R"({
    "rho": -1.5, "rho_n": {"rule": "inverse_n", "coef": 2},
    "radius_law": {"type": "tabulated", "knots": [[0.5, 1], [1, 0], [2, 1]]}})"));
  CHECK(m.rho == -1.5);
  CHECK(m.rho_at(4) == -1.0);
  CHECK(std::holds_alternative<law::TabulatedConvex>(m.radius_law));

  const auto lm = io::parse_model(nlohmann::json::parse(
      R"({"rho": 0, "radius_law": {"type": "log_mgf", "family": "normal", "mean": 2, "variance": 0.5}})"));
  CHECK_THAT(build_rate(lm.radius_law).rstar(), WithinAbs(2.0, 1e-9));

  CHECK_THROWS_AS(io::parse_model(nlohmann::json::parse(
                      R"({"rho": 0, "radius_law": {"type": "gaussian", "sigma": 1, "extra": 1}})")),
                  ValidationError);
  CHECK_THROWS_AS(io::parse_model(nlohmann::json::parse(
                      R"({"rho": 0, "radius_law": {"type": "weibull"}})")),
                  ValidationError);
  CHECK_THROWS_AS(io::parse_model(nlohmann::json::parse(
                      R"({"rho": "a", "radius_law": {"type": "gaussian", "sigma": 1}})")),
                  ValidationError);
  CHECK_THROWS_WITH(io::parse_model(nlohmann::json::parse(
                        R"({"rho": 0, "radius_law": {"type": "tabulated", "knots": [[0.5, 1], [1, 0], [1.5, 0.9], [2, 1]]}})")),
                    ContainsSubstring("not convex"));
}

TEST_CASE("thresholds command", "[cli]") {
  const auto g = run({"thresholds", "--config", kConfigs + "/gaussian.json"});
  REQUIRE(g.code == 0);
  const auto gl = lines(g.out);
  REQUIRE(gl.size() == 3);
  CHECK(gl[0].starts_with("# units: nats"));
  const auto header = split(gl[1]);
  const auto row = split(gl[2]);
  REQUIRE(header.size() == row.size());
  CHECK(header[5] == "tau_v");
  CHECK_THAT(std::stod(row[5]), WithinAbs(-1.6120857137646180, 1e-12));
  CHECK(row[10] == "percolating-zero-volume");

  const auto d = run({"thresholds", "--config", kConfigs + "/deterministic.json", "--format",
                      "json"});
  REQUIRE(d.code == 0);
  const auto j = nlohmann::json::parse(d.out);
  CHECK_THAT(j["tau_v_minus_tau_p"].get<double>(), WithinAbs(std::numbers::ln2, 1e-12));
  CHECK(j["units"] == "nats");
  CHECK(j["certificates"]["volume_fraction"]["subgrad_hi"] == "inf");
}

TEST_CASE("gaussian report", "[cli]") {
  const auto r = run({"gaussian-report", "--config", kConfigs + "/gaussian.json", "--format",
                      "json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  std::map<std::string, nlohmann::json> by_name;
  for (const auto& l : j["lines"]) by_name[l["quantity"]] = l;
  const double c = by_name["c"]["computed"];
  CHECK(c > 1.2469796);
  CHECK(c < 1.2469797);
  for (const char* q : {"R_v", "R_d", "R_p"})
    CHECK(by_name[q]["abs_diff"].get<double>() < 1e-8);
  for (const char* q : {"tau_v", "tau_d", "tau_p", "I(R_v)", "Lambda(1)"})
    CHECK(by_name[q]["abs_diff"].get<double>() < 1e-9);
  CHECK_THAT(by_name["tau_v - tau_v truncated"]["computed"].get<double>(),
             WithinAbs(-0.5 * (std::log(4.0) - 1.0), 1e-12));
}

TEST_CASE("scan command streams rows", "[cli]") {
  const auto g = run({"scan", "--config", kConfigs + "/gaussian.json", "--jobs", "2"});
  REQUIRE(g.code == 0);
  const auto gl = lines(g.out);
  REQUIRE(gl.size() == 7);
  CHECK(gl.back() == "# end");
  double prev = kInf;
  for (int i = 2; i < 6; ++i) {
    const auto f = split(gl[i]);
    const double err = std::abs(std::stod(f[3]) - std::stod(f[4]));
    CHECK(err < prev);
    prev = err;
  }

  const auto d = run({"scan", "--config", kConfigs + "/deterministic.json"});
  REQUIRE(d.code == 0);
  const auto row = split(lines(d.out)[2]);
  CHECK(row[0] == "2");
  CHECK_THAT(std::exp(std::stod(row[1])), WithinAbs(2 * std::numbers::pi, 1e-13));
  CHECK_THAT(std::stod(row[2]), WithinAbs(1.0 - std::exp(-2 * std::numbers::pi), 1e-15));
  CHECK_THAT(std::exp(std::stod(row[5])), WithinAbs(8 * std::numbers::pi, 1e-12));

  const auto empty = write_temp(
      "empty_scan.json",
      R"({"model": {"rho": -2, "radius_law": {"type": "gaussian", "sigma": 1}}, "scan": {"n_list": []}})");
  const auto e = run({"scan", "--config", empty.string()});
  CHECK(e.code == 2);
  CHECK(e.out.empty());
}

TEST_CASE("scan of a tabulated law from CSV", "[cli]") {
  const auto t = run({"scan", "--config", kConfigs + "/tabulated.json"});
  REQUIRE(t.code == 0);
  CHECK(lines(t.out).back() == "# end");
}

TEST_CASE("malformed configs exit 2 with no output", "[cli][errors]") {
  const auto missing_law = write_temp("missing_law.json", R"({"model": {"rho": 0}})");
  const auto a = run({"thresholds", "--config", missing_law.string()});
  CHECK(a.code == 2);
  CHECK(a.out.empty());
  CHECK_THAT(a.err, ContainsSubstring("radius_law"));

  const auto broken = write_temp("broken.json", "{ not json");
  CHECK(run({"thresholds", "--config", broken.string()}).code == 2);
  CHECK(run({"thresholds", "--config", "/nonexistent/config.json"}).code == 2);
  CHECK(run({"thresholds"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"thresholds", "--config", kConfigs + "/gaussian.json", "--format", "xml"}).code ==
        2);

  const auto unknown = write_temp(
      "unknown.json",
      R"({"model": {"rho": 0, "radius_law": {"type": "gaussian", "sigma": 1}}, "plot": {}})");
  CHECK(run({"thresholds", "--config", unknown.string()}).code == 2);
}

TEST_CASE("mc command is reproducible", "[cli][mc]") {
  const auto cfg = write_temp(
      "mc.json",
      R"({"model": {"rho": 0, "radius_law": {"type": "gaussian", "sigma": 1}},
          "mc": {"n": 5, "quantity": "coverage", "samples": 20000, "seed": 3, "lambda_target": 1.0}})");
  const auto out1 = (fs::temp_directory_path() / "hdbool_tests" / "mc1.csv").string();
  const auto out2 = (fs::temp_directory_path() / "hdbool_tests" / "mc2.csv").string();
  REQUIRE(run({"mc", "--config", cfg.string(), "--out", out1}).code == 0);
  REQUIRE(run({"mc", "--config", cfg.string(), "--out", out2, "--jobs", "3"}).code == 0);
  std::ifstream f1(out1), f2(out2);
  const std::string s1((std::istreambuf_iterator<char>(f1)), {});
  const std::string s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(!s1.empty());
  CHECK(s1 == s2);

  const auto other = run({"mc", "--config", cfg.string(), "--seed", "4"});
  REQUIRE(other.code == 0);
  CHECK(other.out != s1);
  const auto row = split(lines(other.out)[2]);
  CHECK(row[0] == "coverage");
  CHECK(row[5] == "4");
}

TEST_CASE("branching command", "[cli]") {
  const double td = tau_degree(build_rate(law::Deterministic{1.0}));
  const auto r = run({"branching", "--config", kConfigs + "/deterministic.json", "--rho",
                      io::format_double(td + 0.2)});
  REQUIRE(r.code == 0);
  const auto ls = lines(r.out);
  CHECK(ls[1].starts_with("# probe"));
  CHECK(ls[2] == "n,log_y_n,y_n_normalized_exponent,survival,thin_radius");
  double prev = 0.0;
  for (std::size_t i = 3; i < ls.size(); ++i) {
    const double s = std::stod(split(ls[i])[3]);
    CHECK(s >= prev);
    prev = s;
  }
  CHECK(prev > 0.999);
}

TEST_CASE("consistency failures exit 3", "[cli][errors]") {
  // quadrature tolerance below what double precision can certify
  const auto cfg = write_temp(
      "tight.json",
      R"({"model": {"rho": -2, "radius_law": {"type": "log_mgf", "family": "gaussian_grain", "sigma": 1}},
          "quadrature": {"rel_tol": 1e-30, "max_depth": 3}, "scan": {"n_list": [30]}})");
  const auto r = run({"scan", "--config", cfg.string()});
  CHECK(r.code == 3);
  CHECK(lines(r.out).back() != "# end");
}
