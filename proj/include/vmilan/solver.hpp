#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "vmilan/metrics.hpp"
#include "vmilan/problems.hpp"
#include "vmilan/prox.hpp"
#include "vmilan/state.hpp"

namespace vmilan {

struct SolverConfig {
  double alpha_min = 1e-5;
  double alpha_max = 1e2;
  double mu = 1e10;
  double delta = 0.5;
  double beta = 1e-4;
  double gamma = 1.0;
  double tau = 1e6 - 1.0;
  int max_outer_iters = 1000;
  int max_backtracks = 60;
  /// Stop once ||x^{k+1} - x^k|| <= stop_tol * ||x^k||.
  double stop_tol = 1e-8;
  std::uint64_t rng_seed = 0;
  ProxOptions prox;

  /// Throws std::invalid_argument when a parameter is out of range.
  void validate() const;
};

/// Bits of IterateRecord::invariant_flags; a set bit marks a violated check.
enum InvariantBit : std::uint32_t {
  kHGammaNonpositive = 1u << 0,   // (1) h_gamma(y~) <= 0
  kProxDistanceBound = 1u << 1,   // (2) ||y~ - x||^2 <= -4 alpha_max mu (1+tau) h_gamma
  kStep5Choice = 1u << 2,         // (3) f(x+) <= min{f(y~), f(x + lambda d)}
  kStepNotLonger = 1u << 3,       // (4) ||x+ - x|| <= ||y~ - x||
  kMonotone = 1u << 4,            // (5) f(x+) <= f(x)
  kArmijo = 1u << 5,              // (6) sufficient decrease at the accepted lambda
};

/// One row of the iteration trace.
struct IterateRecord {
  static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

  int k = 0;
  double f_value = kUnset;  // f(x^{k+1})
  double alpha = kUnset;
  double lambda = kUnset;
  int backtracks = 0;
  double step_norm = kUnset;  // ||x^{k+1} - x^k||
  double h_gamma = kUnset;
  double epsilon_k = kUnset;
  int inner_iters = 0;
  bool chose_tilde = false;
  std::uint32_t invariant_flags = 0;
  // Retained for the offline audit.
  double f_prev = kUnset;        // f(x^k)
  double f_tilde = kUnset;       // f(y~^k)
  double f_linesearch = kUnset;  // f(x^k + lambda_k d^k)
  double tilde_dist = kUnset;    // ||y~^k - x^k||
};

class LinesearchFailure : public Error {
 public:
  LinesearchFailure(const std::string& what, std::vector<IterateRecord> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<IterateRecord>& trace() const { return trace_; }

 private:
  std::vector<IterateRecord> trace_;
};

/// h^k_gamma(x). Throws InfeasiblePointError when x is outside dom(f1).
double eval_h_gamma(const Vector& x, const IterateState& state, const Problem& problem, double gamma);

/// z^k = x^k - alpha_k D_k^{-1} grad f0(x^k).
Vector proximal_target(const IterateState& state);

struct LinesearchResult {
  double lambda = 1.0;
  double f_new = 0.0;
  int backtracks = 0;
};

/// First lambda in 1, delta, delta^2, ... with
/// f(x + lambda d) <= f(x) + beta lambda h_gamma_tilde. Throws LinesearchFailure
/// after max_backtracks reductions.
LinesearchResult armijo_backtrack(const IterateState& state, const Vector& d, double h_gamma_tilde,
                                  const SolverConfig& config, const Problem& problem);

/// Per-iteration check of the six monitored inequalities; returns InvariantBit flags.
std::uint32_t check_iteration(const IterateRecord& record, const SolverConfig& config,
                              double previous_f_value);

/// Builds the iterate at x: f, f1 and grad f0 are evaluated, alpha/metric are
/// left for Step 1. Throws InfeasiblePointError when x is outside dom(f1).
IterateState make_state(const Problem& problem, Vector x, int k, double mu);

struct StepResult {
  IterateState next;
  IterateRecord record;
  Vector y_tilde;
};

/// One outer iteration (Steps 1-5). `state` carries x^k, f, grad; its alpha and
/// metric are overwritten by the strategies. Throws LinesearchFailure and
/// InexactProxFailure.
StepResult vmilan_step(IterateState& state, const Problem& problem, const SolverConfig& config,
                       MetricStrategy& metric_strategy, SteplengthStrategy& steplength_strategy,
                       ProxSolver& prox_solver);

enum class StopReason { kMaxIterations, kStepTolerance };

struct RunResult {
  Vector x;
  double f_value = 0.0;
  std::vector<IterateRecord> trace;
  StopReason reason = StopReason::kMaxIterations;
};

/// Called after every outer iteration with the record, the accepted proximal
/// point and the new state.
using IterationObserver =
    std::function<void(const IterateRecord&, const Vector& y_tilde, const IterateState& next)>;

/// Runs the outer loop from x0. A fresh proximal solver is created for the run.
/// Throws InfeasiblePointError when x0 is outside dom(f1).
RunResult vmilan_run(const Problem& problem, const SolverConfig& config,
                     MetricStrategy& metric_strategy, SteplengthStrategy& steplength_strategy,
                     const Vector& x0, const IterationObserver& observer = {});

}  // namespace vmilan
