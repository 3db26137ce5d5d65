#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "hadamard/error.hpp"
#include "hadamard/runner.hpp"

using namespace hadamard;
using json = nlohmann::json;

namespace {

std::string config_error_message(const std::string& text) {
  try {
    validate_config(parse_config_text(text));
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Configuration);
    return e.what();
  }
  ADD_FAILURE() << "config accepted: " << text;
  return {};
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

struct Row {
  int level;
  std::string estimator;
  double value;
  double abs_error;
};

std::vector<Row> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string level, name, value, err;
    std::getline(ls, level, ',');
    std::getline(ls, name, ',');
    std::getline(ls, value, ',');
    std::getline(ls, err, ',');
    rows.push_back({std::stoi(level), name, std::stod(value), std::stod(err)});
  }
  return rows;
}

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  const ExperimentConfig d = parse_config_text("{}");
  EXPECT_EQ(d.a, Point(Point::Zero(2)));
  EXPECT_DOUBLE_EQ(d.b(0), 0.5);
  EXPECT_FALSE(d.conformal.has_value());
  const ExperimentConfig c = parse_config_text(R"({
    "domain": "generic", "metric": {"conformal_phi": [[1, 0, 0.2]]},
    "a": [0.1, 0.2], "b": [-0.2, 0.1], "c": [0.0, -0.3],
    "quadrature": {"n_r": 32, "n_theta": 64, "n_patch": 16, "rho": 0.01, "boundary_nodes": 128},
    "fd_dt": 1e-4, "tolerances": {"boundary": 1e-6, "volume": 1e-2, "abs_floor": 1e-9},
    "velocity_extension": "radial_blend", "levels": 3,
    "output": {"report": "r.json", "csv": "c.csv"}})");
  EXPECT_TRUE(c.conformal.has_value());
  EXPECT_EQ(c.quad.n_r, 32);
  EXPECT_EQ(*c.quad.rho, 0.01);
  EXPECT_EQ(c.boundary_nodes, 128u);
  EXPECT_EQ(*c.fd_dt, 1e-4);
  EXPECT_EQ(c.tol.volume, 1e-2);
  EXPECT_EQ(c.extension, VelocityExtension::RadialBlend);
  EXPECT_EQ(c.levels, 3);
  EXPECT_EQ(*c.report_path, "r.json");
  EXPECT_EQ(*c.csv_path, "c.csv");
  EXPECT_NO_THROW(validate_config(c));
}

TEST(Config, CustomFamilyObject) {
  const ExperimentConfig c =
      parse_config_text(R"({"domain": {"base": [[1, 0]], "perturbation": [[0, 0], [0.1, 0]], "t_max": 0.5}})");
  EXPECT_DOUBLE_EQ(c.family.t_max(), 0.5);
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_TRUE(contains(config_error_message(R"({"tolerance": {}})"), "\"tolerance\""));
  EXPECT_TRUE(contains(config_error_message(R"({"quadrature": {"nr": 3}})"), "quadrature.nr"));
  EXPECT_TRUE(contains(config_error_message(R"({"quadrature": {"n_r": -3}})"), "quadrature.n_r"));
  EXPECT_TRUE(contains(config_error_message(R"({"tolerances": {"volume": 0}})"), "tolerances.volume"));
  EXPECT_TRUE(contains(config_error_message(R"({"a": [0.1]})"), "\"a\""));
  EXPECT_TRUE(contains(config_error_message(R"({"domain": "ellipse"})"), "\"domain\""));
  EXPECT_TRUE(contains(config_error_message(R"({"metric": "curved"})"), "\"metric\""));
  EXPECT_TRUE(contains(config_error_message(R"({"velocity_extension": "linear"})"), "velocity_extension"));
  EXPECT_TRUE(contains(config_error_message(R"({"output": {"report": 3}})"), "output.report"));
}

TEST(Config, SyntaxErrorReportsLineAndColumn) {
  const std::string msg = config_error_message("{\n  \"a\": [0.1, 0.2],\n  \"b\": [0.3 0.1]\n}");
  EXPECT_TRUE(contains(msg, "line 3")) << msg;
  EXPECT_TRUE(contains(msg, "column")) << msg;
}

TEST(Config, CoincidentPolesRejected) {
  EXPECT_TRUE(contains(config_error_message(R"({"a": [0.2, 0.1], "b": [0.2, 0.1]})"), "coincident poles"));
  EXPECT_TRUE(contains(config_error_message(R"({"c": [0.5, 0.0]})"), "coincident poles"));
}

TEST(Config, PoleMarginEnforced) {
  EXPECT_TRUE(contains(config_error_message(R"({"b": [0.97, 0.0]})"), "\"b\""));
  EXPECT_TRUE(contains(config_error_message(R"({"a": [1.2, 0.0]})"), "outside"));
  EXPECT_NO_THROW(validate_config(parse_config_text(R"({"b": [0.94, 0.0]})")));
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("/nonexistent/config.json"), Error); }

TEST(Verify, DefaultConfigPasses) {
  const RunOutcome out = run_verify(ExperimentConfig{});
  EXPECT_EQ(out.exit_code, kExitPass) << out.text;
  const json j = json::parse(out.text);
  for (const char* key : {"config_echo", "checks", "estimates", "status"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["status"], "pass");
  EXPECT_NEAR(j["estimates"]["boundary"].get<double>(), 0.159155, 1e-6);
  std::vector<std::string> names;
  for (const auto& c : j["checks"]) names.push_back(c["name"]);
  EXPECT_TRUE(std::is_sorted(names.begin(), names.end()));
  for (const char* name : {"divergence_residual", "estimator_agreement", "green_flux_normalization", "trace_identity"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), name), names.end()) << name;
  }
}

TEST(Verify, MappedConformalConfigPasses) {
  const RunOutcome out = run_verify(parse_config_text(
      R"({"domain": "mapped", "metric": {"conformal_phi": [[1, 0, 0.2]]}, "a": [0.1, -0.2], "b": [-0.3, 0.25]})"));
  EXPECT_EQ(out.exit_code, kExitPass) << out.text;
}

TEST(Vary, RotationEstimatesNearZero) {
  const RunOutcome out = run_vary(parse_config_text(R"({"domain": "rotation", "a": [0.2, 0.1], "b": [-0.4, 0.3]})"));
  EXPECT_EQ(out.exit_code, kExitPass) << out.text;
  const json j = json::parse(out.text);
  for (const auto& [name, value] : j["estimates"].items()) EXPECT_LT(std::abs(value.get<double>()), 1e-8) << name;
}

TEST(Vary, TightToleranceFails) {
  ExperimentConfig c;
  c.tol.boundary = 1e-16;
  c.tol.abs_floor = 1e-30;
  const RunOutcome out = run_vary(c);
  EXPECT_EQ(out.exit_code, kExitFail);
  EXPECT_EQ(json::parse(out.text)["status"], "fail");
}

TEST(Vary, CoincidentPolesRejectedBeforeRunning) {
  ExperimentConfig c;
  c.b = c.a;
  try {
    run_vary(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(contains(e.what(), "coincident poles"));
  }
}

TEST(Converge, HeaderAndDecay) {
  const RunOutcome out = run_convergence(ExperimentConfig{}, 5);
  EXPECT_EQ(out.text.substr(0, out.text.find('\n')), "level,estimator,value,abs_error");
  const std::vector<Row> rows = parse_csv(out.text);
  std::map<std::string, std::vector<double>> err;
  for (const Row& r : rows) {
    err[r.estimator].push_back(r.abs_error);
    EXPECT_EQ(static_cast<std::size_t>(r.level), err[r.estimator].size() - 1);
  }
  ASSERT_EQ(err["boundary"].size(), 5u);
  // M = 8 * 2^level, so level 3 is M = 64
  EXPECT_LT(err["boundary"][3], 1e-10);
  EXPECT_LT(err["flux"][3], 1e-10);
  const auto& vol = err["volume_radial_blend"];
  for (std::size_t l = 1; l < vol.size(); ++l) {
    if (vol[l - 1] > 1e-12) EXPECT_LE(2.0 * vol[l], vol[l - 1]) << l;
  }
}

TEST(Triple, ReportAndMissingPole) {
  const RunOutcome out = run_triple(parse_config_text(R"({"c": [0.0, 0.5]})"));
  EXPECT_EQ(out.exit_code, kExitPass) << out.text;
  const json j = json::parse(out.text);
  EXPECT_EQ(j["permutations"].size(), 6u);
  EXPECT_LT(j["spread"].get<double>(), 1e-12);
  EXPECT_THROW(run_triple(ExperimentConfig{}), Error);
}

TEST(Output, SeventeenDigitsAndDeterminism) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(2.0), "2.0");
  EXPECT_EQ(dump_json(json{{"x", 0.1}, {"n", 3}}, 0), "{\"n\":3,\"x\":0.10000000000000001}\n");
  const ExperimentConfig c = parse_config_text(R"({"domain": "generic", "a": [0.1, -0.2], "b": [-0.3, 0.25]})");
  EXPECT_EQ(run_vary(c).text, run_vary(c).text);
  EXPECT_EQ(run_convergence(c, 3).text, run_convergence(c, 3).text);
}
