#include "vmilan/solver.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "vmilan/diagnostics.hpp"

namespace vmilan {

void SolverConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("solver config: ") + what);
  };
  require(alpha_min > 0.0 && alpha_min <= alpha_max, "need 0 < alpha_min <= alpha_max");
  require(mu >= 1.0, "need mu >= 1");
  require(delta > 0.0 && delta < 1.0, "need 0 < delta < 1");
  require(beta > 0.0 && beta < 1.0, "need 0 < beta < 1");
  require(gamma >= 0.0 && gamma <= 1.0, "need 0 <= gamma <= 1");
  require(tau > 0.0, "need tau > 0");
  require(max_outer_iters >= 0, "need max_outer_iters >= 0");
  require(max_backtracks >= 1, "need max_backtracks >= 1");
  require(stop_tol >= 0.0, "need stop_tol >= 0");
  require(prox.inner_limit >= 1, "need inner_limit >= 1");
}

IterateState make_state(const Problem& problem, Vector x, int k, double mu) {
  IterateState state;
  state.f1_value = problem.f1(x);
  if (!std::isfinite(state.f1_value)) {
    throw InfeasiblePointError("iterate lies outside dom(f1)");
  }
  state.f_value = problem.f0(x) + state.f1_value;
  state.grad_f0 = problem.grad_f0(x);
  state.metric = DiagonalMetric::identity(x.size(), mu);
  state.k = k;
  state.x = std::move(x);
  return state;
}

double eval_h_gamma(const Vector& x, const IterateState& state, const Problem& problem, double gamma) {
  const double f1_x = problem.f1(x);
  if (!std::isfinite(f1_x)) throw InfeasiblePointError("h_gamma evaluated outside dom(f1)");
  return linearized_model(x, f1_x, state, gamma);
}

Vector proximal_target(const IterateState& state) {
  return state.x - state.alpha * state.grad_f0.cwiseQuotient(state.metric.diag);
}

LinesearchResult armijo_backtrack(const IterateState& state, const Vector& d, double h_gamma_tilde,
                                  const SolverConfig& config, const Problem& problem) {
  double lambda = 1.0;
  for (int i = 0; i <= config.max_backtracks; ++i) {
    const double f_trial = problem.value(state.x + lambda * d);
    if (f_trial <= state.f_value + config.beta * lambda * h_gamma_tilde) {
      return {lambda, f_trial, i};
    }
    lambda *= config.delta;
  }
  throw LinesearchFailure("Armijo linesearch exceeded " + std::to_string(config.max_backtracks) +
                              " backtracks at iteration " + std::to_string(state.k) +
                              " (h_gamma = " + std::to_string(h_gamma_tilde) + ")",
                          {});
}

StepResult vmilan_step(IterateState& state, const Problem& problem, const SolverConfig& config,
                       MetricStrategy& metric_strategy, SteplengthStrategy& steplength_strategy,
                       ProxSolver& prox_solver) {
  // Step 1
  state.metric = metric_strategy.compute(state.x, config.mu);
  const Vector reduced = problem.reduced_gradient(state.x, state.grad_f0);
  const SteplengthContext ctx{state.k,      state.x,          state.grad_f0, reduced,
                              state.metric, config.alpha_min, config.alpha_max};
  state.alpha = steplength_strategy.next(ctx);

  // Step 2
  ProxCertificate cert = prox_solver.solve(state, config.tau, config.gamma);

  // Steps 3-4
  const Vector d = cert.y_tilde - state.x;
  const LinesearchResult ls = armijo_backtrack(state, d, cert.h_gamma, config, problem);

  // Step 5; a tie keeps the linesearch point.
  StepResult out;
  double f_tilde = ls.f_new;
  bool chose_tilde = false;
  Vector x_next;
  if (ls.lambda == 1.0) {
    x_next = cert.y_tilde;
  } else {
    f_tilde = problem.value(cert.y_tilde);
    if (f_tilde < ls.f_new) {
      chose_tilde = true;
      x_next = cert.y_tilde;
    } else {
      x_next = state.x + ls.lambda * d;
    }
  }
  const double f_next = chose_tilde ? f_tilde : ls.f_new;

  IterateRecord& rec = out.record;
  rec.k = state.k;
  rec.f_value = f_next;
  rec.alpha = state.alpha;
  rec.lambda = ls.lambda;
  rec.backtracks = ls.backtracks;
  rec.step_norm = (x_next - state.x).norm();
  rec.h_gamma = cert.h_gamma;
  rec.epsilon_k = cert.epsilon;
  rec.inner_iters = cert.inner_iters;
  rec.chose_tilde = chose_tilde;
  rec.f_prev = state.f_value;
  rec.f_tilde = f_tilde;
  rec.f_linesearch = ls.f_new;
  rec.tilde_dist = d.norm();
  rec.invariant_flags =
      check_iteration(rec, config, std::numeric_limits<double>::quiet_NaN());

  out.next.f1_value = problem.f1(x_next);
  out.next.f_value = f_next;
  out.next.grad_f0 = problem.grad_f0(x_next);
  out.next.alpha = state.alpha;
  out.next.metric = state.metric;
  out.next.k = state.k + 1;
  out.next.x = std::move(x_next);
  out.y_tilde = std::move(cert.y_tilde);
  return out;
}

RunResult vmilan_run(const Problem& problem, const SolverConfig& config,
                     MetricStrategy& metric_strategy, SteplengthStrategy& steplength_strategy,
                     const Vector& x0, const IterationObserver& observer) {
  config.validate();
  if (x0.size() != problem.dimension()) throw DimensionMismatch("x0 has wrong dimension");
  if (!problem.in_domain(x0)) throw InfeasiblePointError("x0 lies outside dom(f1)");

  RunResult result;
  IterateState state = make_state(problem, x0, 0, config.mu);
  result.x = state.x;
  result.f_value = state.f_value;
  if (config.max_outer_iters == 0) return result;

  auto prox_solver = problem.regularizer().make_prox_solver(config.prox);
  result.trace.reserve(static_cast<std::size_t>(config.max_outer_iters));
  for (int k = 0; k < config.max_outer_iters; ++k) {
    StepResult step;
    try {
      step = vmilan_step(state, problem, config, metric_strategy, steplength_strategy, *prox_solver);
    } catch (const LinesearchFailure& e) {
      throw LinesearchFailure(e.what(), result.trace);
    }
    const double x_norm = state.x.norm();
    result.trace.push_back(step.record);
    if (observer) observer(step.record, step.y_tilde, step.next);
    state = std::move(step.next);
    const double scale = x_norm > 0.0 ? x_norm : 1.0;
    if (step.record.step_norm <= config.stop_tol * scale) {
      result.reason = StopReason::kStepTolerance;
      break;
    }
  }
  result.x = state.x;
  result.f_value = state.f_value;
  return result;
}

}  // namespace vmilan
