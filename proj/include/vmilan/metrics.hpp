#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vmilan/problems.hpp"
#include "vmilan/state.hpp"

namespace vmilan {

// ---------------------------------------------------------------------------
// Scaling matrices

/// (D)^{-1}_ii = max{min{x_i / (V_i(x) + eps), mu}, 1/mu}, eps = machine epsilon.
DiagonalMetric sg_metric_gaussian(const Vector& x, const GaussianSdTerm& term, double mu);

/// (D)^{-1}_ii = max{min{x_i / V_i(x), mu}, 1/mu}; x_i = 0 maps to 1/mu and
/// a nonpositive V_i with x_i > 0 maps to mu.
DiagonalMetric sg_metric_cauchy(const Vector& x, const CauchyTerm& term, double mu);

/// Lipschitz-type diagonal D^{-1} = c I, c = curvature bound of f0 times the
/// power-iteration estimate of ||H||^2, clamped into [1/mu, mu]. This is a
/// documented stand-in, not a majorize-minimize matrix.
DiagonalMetric majorant_diag_metric(const SmoothTerm& term, double mu);

class MetricStrategy {
 public:
  virtual ~MetricStrategy() = default;
  virtual DiagonalMetric compute(const Vector& x, double mu) = 0;
  virtual std::string name() const = 0;
};

/// Builds "identity" | "sg" | "majorant" for the given problem. Throws
/// std::invalid_argument for unknown names or unsupported combinations.
std::unique_ptr<MetricStrategy> make_metric_strategy(const std::string& name, const Problem& problem);

// ---------------------------------------------------------------------------
// Steplengths

/// BB1 = s^T s / s^T y clamped into [alpha_min, alpha_max]; alpha_max when
/// s^T y <= 0.
double bb_steplength(const Vector& s, const Vector& y, double alpha_min, double alpha_max);

/// Recent (alpha_j, D_j^{1/2} g~_j) pairs plus pending Ritz steplengths.
struct SteplengthMemory {
  int window = 3;
  std::deque<double> alphas;
  std::deque<Vector> scaled_gradients;
  std::deque<double> queue;

  bool full() const { return static_cast<int>(alphas.size()) == window; }
  void push(double alpha, Vector scaled_gradient);
};

/// Ritz steplengths from the m stored pairs and the current scaled reduced
/// gradient D_k^{1/2} g~_k. Returns the reciprocals of the positive eigenvalues
/// of the symmetrized tridiagonal matrix, clamped into [alpha_min, alpha_max]
/// and sorted ascending. Returns nullopt when the Cholesky factorization of
/// G~^T G~ fails or no eigenvalue is positive.
std::optional<std::vector<double>> ritz_steplengths(const SteplengthMemory& memory,
                                                    const Vector& current_scaled_gradient,
                                                    double alpha_min, double alpha_max);

/// Unclamped symmetrized tridiagonal matrix eigenvalues; exposed for tests.
std::optional<std::vector<double>> ritz_values(const SteplengthMemory& memory,
                                               const Vector& current_scaled_gradient);

struct SteplengthContext {
  int k = 0;
  const Vector& x;
  const Vector& grad;
  const Vector& reduced_grad;
  const DiagonalMetric& metric;
  double alpha_min = 1e-5;
  double alpha_max = 1e2;
};

class SteplengthStrategy {
 public:
  virtual ~SteplengthStrategy() = default;
  /// alpha_k in [alpha_min, alpha_max]. Called once per outer iteration.
  virtual double next(const SteplengthContext& ctx) = 0;
  virtual std::string name() const = 0;
  /// Times the strategy fell back (e.g. Cholesky failure in the Ritz sweep).
  int fallback_events() const { return fallback_events_; }

 protected:
  /// BB1 from the previous call's x and gradient, or alpha_max when unavailable.
  double bb_fallback(const SteplengthContext& ctx) const;
  void remember(const SteplengthContext& ctx);

  std::optional<Vector> prev_x_;
  std::optional<Vector> prev_grad_;
  int fallback_events_ = 0;
};

/// alpha_0 = 1 (clamped), then BB1.
class BarzilaiBorweinSteplength final : public SteplengthStrategy {
 public:
  double next(const SteplengthContext& ctx) override;
  std::string name() const override { return "bb"; }
};

/// Ritz-value sweep: one queued steplength per iteration, smallest first;
/// rebuilt from the last `window` pairs when empty. BB1 while the history is
/// shorter than the window.
class RitzSteplength final : public SteplengthStrategy {
 public:
  explicit RitzSteplength(int window = 3) { memory_.window = window; }
  double next(const SteplengthContext& ctx) override;
  std::string name() const override { return "ritz"; }
  const SteplengthMemory& memory() const { return memory_; }

 private:
  SteplengthMemory memory_;
};

std::unique_ptr<SteplengthStrategy> make_steplength_strategy(const std::string& name, int window = 3);

}  // namespace vmilan
