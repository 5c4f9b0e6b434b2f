#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "config.hpp"

using namespace vmilan;
using namespace vmilan::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kPresets = fs::path(VMILAN_SOURCE_DIR) / "presets";

ExperimentConfig parse(const std::string& text) { return parse_config(text, "/base"); }

}  // namespace

TEST_CASE("every preset parses") {
  const ExperimentConfig toy = load_config(kPresets / "toy1d.yaml");
  CHECK(toy.problem.kind == ProblemKind::kToy1d);
  CHECK(toy.solver.beta == 0.5);
  CHECK(toy.data.x0 == 0.0);
  CHECK(toy.output.trace->parent_path().filename() == "results");

  const ExperimentConfig cauchy = load_config(kPresets / "cauchy.yaml");
  CHECK(cauchy.problem.kind == ProblemKind::kCauchy);
  CHECK(cauchy.metric == "sg");
  CHECK(cauchy.steplength == "ritz");
  CHECK(cauchy.seed == 7);
  CHECK(cauchy.solver.tau == 999999.0);
  CHECK(cauchy.solver.prox.inner_limit == 5000);

  CHECK(load_config(kPresets / "gaussian_sd.yaml").problem.kind == ProblemKind::kGaussianSd);
  const ExperimentConfig comp = load_config(kPresets / "compression.yaml");
  CHECK(comp.problem.kind == ProblemKind::kCompression);
  CHECK(comp.data.scene == Scene::kSmooth);
}

TEST_CASE("defaults follow the solver defaults") {
  const ExperimentConfig c = parse("problem:\n  kind: cauchy\n");
  CHECK(c.solver.alpha_min == 1e-5);
  CHECK(c.solver.alpha_max == 1e2);
  CHECK(c.solver.mu == 1e10);
  CHECK(c.solver.tau == 1e6 - 1.0);
  CHECK(c.metric == "identity");
  CHECK(c.steplength == "bb");
  CHECK(c.window == 3);
  CHECK_FALSE(c.audit);
  CHECK(parse("problem:\n  kind: compression\n").problem.lambda == 0.01);
}

TEST_CASE("relative paths resolve against the config directory") {
  const ExperimentConfig c = parse(
      "problem:\n  kind: cauchy\ndata:\n  observed: in/g.pgm\noutput:\n  trace: /abs/t.csv\n");
  CHECK(*c.data.observed == fs::path("/base/in/g.pgm"));
  CHECK(*c.output.trace == fs::path("/abs/t.csv"));
}

TEST_CASE("malformed configs are rejected") {
  CHECK_THROWS_AS(parse(""), ConfigError);
  CHECK_THROWS_AS(parse("solver:\n  mu: 2\n"), ConfigError);
  CHECK_THROWS_AS(parse("problem:\n  size: 3\n"), ConfigError);
  CHECK_THROWS_AS(parse("problem:\n  kind: poisson\n"), ConfigError);
  CHECK_THROWS_AS(parse("problem:\n  kind: cauchy\nextra: 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("problem:\n  kind: cauchy\nsolver:\n  mu_max: 2\n"), ConfigError);
  CHECK_THROWS_AS(parse("problem:\n  kind: cauchy\nsolver:\n  mu: lots\n"), ConfigError);
  CHECK_THROWS_AS(parse("problem:\n  kind: cauchy\nsolver:\n  delta: 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse("problem:\n  kind: cauchy\n  kernel_size: 4\n"), ConfigError);
  CHECK_THROWS_AS(parse("problem:\n  kind: cauchy\nstrategy:\n  metric: newton\n"), ConfigError);
  CHECK_THROWS_AS(parse("problem:\n  kind: cauchy\ndata:\n  scene: cat\n"), ConfigError);
  CHECK_THROWS_AS(parse("problem: [1, 2\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.yaml"), ConfigError);
}

TEST_CASE("check command detects an injected gradient bug") {
  std::ostringstream out, err;
  CHECK(cmd_check("gradients", CheckOptions{}, out, err) == kExitOk);
  CHECK(nlohmann::json::parse(out.str())["pass"] == true);
  std::ostringstream out2, err2;
  CheckOptions inject;
  inject.inject_gradient_bug = true;
  CHECK(cmd_check("gradients", inject, out2, err2) == kExitCheckFailed);
  const auto j = nlohmann::json::parse(out2.str());
  CHECK(j["pass"] == false);
  CHECK(j["fault_injected"] == true);
  std::ostringstream out3, err3;
  CHECK(cmd_check("everything", CheckOptions{}, out3, err3) == kExitUsage);
}

TEST_CASE("solve command on the toy problem") {
  std::ostringstream out, err;
  Overrides overrides;
  overrides.audit = true;
  overrides.trace = (fs::temp_directory_path() / "vmilan_unit_toy_trace.csv").string();
  REQUIRE(cmd_solve(kPresets / "toy1d.yaml", overrides, out, err) == kExitOk);
  const auto j = nlohmann::json::parse(out.str());
  CHECK(j["problem"] == "toy1d");
  CHECK(j["y_tilde_first"].get<double>() == doctest::Approx(2.0));
  CHECK(j["x_final"].get<double>() == doctest::Approx(10.0));
  CHECK(j["audit"]["total_violations"] == 0);

  std::ostringstream out2, err2;
  CHECK(cmd_solve("/nonexistent/config.yaml", Overrides{}, out2, err2) == kExitUsage);
}
