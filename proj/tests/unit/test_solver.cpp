#include <doctest.h>

#include <cmath>
#include <vector>

#include "support/instances.hpp"
#include "vmilan/solver.hpp"

using namespace vmilan;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

// Toy iterate with a prescribed gradient, alpha = 1 and D = I.
IterateState toy_state(const Problem& toy, double x, double grad) {
  IterateState s = make_state(toy, scalar(x), 0, 1e10);
  s.grad_f0 = scalar(grad);
  s.alpha = 1.0;
  return s;
}

struct Strategies {
  std::unique_ptr<MetricStrategy> metric;
  std::unique_ptr<SteplengthStrategy> steplength;
};

Strategies strategies(const Problem& p, const std::string& metric, const std::string& step) {
  return {make_metric_strategy(metric, p), make_steplength_strategy(step, 3)};
}

}  // namespace

TEST_CASE("linearized model hand values") {
  const Problem toy = make_toy1d_problem();
  const IterateState s = toy_state(toy, 4.0, 2.0);
  // h(y) = 2 (y - 4) + 1/2 (y - 4)^2
  CHECK(eval_h_gamma(scalar(2.0), s, toy, 1.0) == doctest::Approx(-2.0));
  CHECK(eval_h_gamma(scalar(4.0), s, toy, 1.0) == 0.0);
  CHECK(eval_h_gamma(scalar(2.0), s, toy, 0.0) == doctest::Approx(-4.0));
  CHECK_THROWS_AS(eval_h_gamma(scalar(12.0), s, toy, 1.0), InfeasiblePointError);
}

TEST_CASE("proximal target") {
  const Problem toy = make_toy1d_problem();
  IterateState s = toy_state(toy, 4.0, 2.0);
  CHECK(proximal_target(s)[0] == doctest::Approx(2.0));
  s.metric = DiagonalMetric::from_inverse(scalar(0.5), 1e10);  // D = 2
  CHECK(proximal_target(s)[0] == doctest::Approx(3.0));
  s.alpha = 4.0;
  CHECK(proximal_target(s)[0] == doctest::Approx(0.0));
}

TEST_CASE("Armijo accepts the full step on a descent direction") {
  const Problem toy = make_toy1d_problem();
  const IterateState s = make_state(toy, scalar(0.0), 0, 1e10);
  SolverConfig config;
  const LinesearchResult ls = armijo_backtrack(s, scalar(2.0), -1.0, config, toy);
  CHECK(ls.lambda == 1.0);
  CHECK(ls.backtracks == 0);
  CHECK(ls.f_new == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("Armijo at a stationary point accepts lambda = 1 with no change") {
  const Problem toy = make_toy1d_problem();
  const IterateState s = make_state(toy, scalar(10.0), 0, 1e10);
  const LinesearchResult ls = armijo_backtrack(s, scalar(0.0), 0.0, SolverConfig{}, toy);
  CHECK(ls.lambda == 1.0);
  CHECK(ls.f_new == s.f_value);
}

TEST_CASE("Armijo backtracks on an overshooting quadratic step") {
  // f0 = 1/2 x^2 on [0, 10] via least squares; from x = 1 the step d = -2 lands at -1,
  // outside the box, so lambda = 1/2 reaches the minimizer at 0.
  auto id = std::make_shared<IdentityOperator>(1);
  const Problem p(std::make_shared<LeastSquaresTerm>(id, scalar(0.0)),
                  std::make_shared<BoxIndicator>(1, 0.0, 10.0));
  const IterateState s = make_state(p, scalar(1.0), 0, 1e10);
  const LinesearchResult ls = armijo_backtrack(s, scalar(-2.0), -0.5, SolverConfig{}, p);
  CHECK(ls.lambda == 0.5);
  CHECK(ls.backtracks == 1);
  CHECK(ls.f_new == 0.0);
}

TEST_CASE("Armijo gives up after the backtrack budget") {
  const Problem toy = make_toy1d_problem();
  const IterateState s = make_state(toy, scalar(5.0), 0, 1e10);
  SolverConfig config;
  config.max_backtracks = 3;
  // An ascent direction with a claimed negative model value can never pass.
  CHECK_THROWS_AS(armijo_backtrack(s, scalar(-1.0), -1.0, config, toy), LinesearchFailure);
}

TEST_CASE("first toy step lands on the proximal point") {
  const Problem toy = make_toy1d_problem();
  IterateState s = make_state(toy, scalar(0.0), 0, 1e10);
  auto st = strategies(toy, "identity", "bb");
  auto prox = toy.regularizer().make_prox_solver(ProxOptions{});
  const StepResult step = vmilan_step(s, toy, SolverConfig{}, *st.metric, *st.steplength, *prox);
  CHECK(step.y_tilde[0] == doctest::Approx(2.0));
  CHECK(step.next.x[0] == doctest::Approx(2.0));
  CHECK(step.record.lambda == 1.0);
  CHECK(step.record.invariant_flags == 0u);
  CHECK(step.next.k == 1);
}

TEST_CASE("a step from the constrained minimizer does not move") {
  const Problem toy = make_toy1d_problem();
  IterateState s = make_state(toy, scalar(10.0), 3, 1e10);
  auto st = strategies(toy, "identity", "bb");
  auto prox = toy.regularizer().make_prox_solver(ProxOptions{});
  const StepResult step = vmilan_step(s, toy, SolverConfig{}, *st.metric, *st.steplength, *prox);
  CHECK(step.record.step_norm == 0.0);
  CHECK(step.record.h_gamma == 0.0);
  CHECK(step.next.x[0] == 10.0);
}

TEST_CASE("toy run converges to the upper bound") {
  const Problem toy = make_toy1d_problem();
  auto st = strategies(toy, "identity", "bb");
  SolverConfig config;
  config.max_outer_iters = 50;
  const RunResult r = vmilan_run(toy, config, *st.metric, *st.steplength, scalar(0.0));
  CHECK(r.x[0] == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(r.f_value == doctest::Approx(2.0 / 11.0).epsilon(1e-12));
  CHECK(r.reason == StopReason::kStepTolerance);
  CHECK(r.trace.size() < 50);
}

TEST_CASE("zero outer iterations return the starting point") {
  const Problem toy = make_toy1d_problem();
  auto st = strategies(toy, "identity", "bb");
  SolverConfig config;
  config.max_outer_iters = 0;
  const RunResult r = vmilan_run(toy, config, *st.metric, *st.steplength, scalar(3.0));
  CHECK(r.x[0] == 3.0);
  CHECK(r.f_value == doctest::Approx(0.5));
  CHECK(r.trace.empty());
}

TEST_CASE("cauchy steps decrease the objective strictly") {
  auto inst = testing::make_cauchy_instance(8, 11);
  auto st = strategies(inst.problem, "sg", "ritz");
  SolverConfig config;
  config.max_outer_iters = 20;
  config.stop_tol = 0.0;
  double prev = inst.problem.value(inst.x0);
  std::vector<double> values;
  vmilan_run(inst.problem, config, *st.metric, *st.steplength, inst.x0,
             [&](const IterateRecord& rec, const Vector&, const IterateState& next) {
               CHECK(rec.invariant_flags == 0u);
               CHECK(next.metric.valid());
               values.push_back(rec.f_value);
             });
  REQUIRE(!values.empty());
  CHECK(values.front() < prev);
  for (std::size_t i = 1; i < values.size(); ++i) CHECK(values[i] <= values[i - 1]);
}

TEST_CASE("compression run is monotone and stays in the box") {
  const Problem p = testing::make_compression_instance(32);
  auto st = strategies(p, "identity", "ritz");
  SolverConfig config;
  config.max_outer_iters = 15;
  config.alpha_max = 1e5;
  const RunResult r = vmilan_run(p, config, *st.metric, *st.steplength, Vector::Ones(p.dimension()));
  REQUIRE(!r.trace.empty());
  double prev = p.value(Vector::Ones(p.dimension()));
  for (const IterateRecord& rec : r.trace) {
    CHECK(rec.f_value <= prev);
    CHECK(rec.invariant_flags == 0u);
    prev = rec.f_value;
  }
  CHECK(r.x.minCoeff() >= 0.0);
  CHECK(r.x.maxCoeff() <= 1.5);
}

TEST_CASE("runs are deterministic") {
  auto inst = testing::make_cauchy_instance(12, 4);
  SolverConfig config;
  config.max_outer_iters = 10;
  auto a = strategies(inst.problem, "sg", "ritz");
  auto b = strategies(inst.problem, "sg", "ritz");
  const RunResult r1 = vmilan_run(inst.problem, config, *a.metric, *a.steplength, inst.x0);
  const RunResult r2 = vmilan_run(inst.problem, config, *b.metric, *b.steplength, inst.x0);
  CHECK((r1.x.array() == r2.x.array()).all());
  REQUIRE(r1.trace.size() == r2.trace.size());
  for (std::size_t i = 0; i < r1.trace.size(); ++i) {
    CHECK(r1.trace[i].f_value == r2.trace[i].f_value);
    CHECK(r1.trace[i].inner_iters == r2.trace[i].inner_iters);
  }
}

TEST_CASE("solver configuration is validated") {
  auto bad = [](auto mutate) {
    SolverConfig c;
    mutate(c);
    return c;
  };
  CHECK_NOTHROW(SolverConfig{}.validate());
  CHECK_THROWS_AS(bad([](SolverConfig& c) { c.alpha_min = 0.0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](SolverConfig& c) { c.alpha_min = 1e3; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](SolverConfig& c) { c.mu = 0.5; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](SolverConfig& c) { c.delta = 1.0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](SolverConfig& c) { c.beta = 0.0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](SolverConfig& c) { c.gamma = 1.5; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](SolverConfig& c) { c.tau = 0.0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](SolverConfig& c) { c.max_outer_iters = -1; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](SolverConfig& c) { c.prox.inner_limit = 0; }).validate(), std::invalid_argument);
}

TEST_CASE("run rejects infeasible or mis-sized starting points") {
  const Problem toy = make_toy1d_problem();
  auto st = strategies(toy, "identity", "bb");
  CHECK_THROWS_AS(vmilan_run(toy, SolverConfig{}, *st.metric, *st.steplength, scalar(-0.5)),
                  InfeasiblePointError);
  CHECK_THROWS_AS(vmilan_run(toy, SolverConfig{}, *st.metric, *st.steplength, Vector::Zero(2)),
                  DimensionMismatch);
}
