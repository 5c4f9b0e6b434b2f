#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "vmilan/prox.hpp"
#include "vmilan/solver.hpp"

namespace vmilan {

inline constexpr int kAuditChecks = 6;

/// Result of auditing a trace against the six monitored inequalities.
struct AuditReport {
  /// flags[k] holds InvariantBit values for the checks violated at iteration k.
  std::vector<std::uint32_t> flags;
  std::array<int, kAuditChecks> violations{};
  std::vector<double> epsilon;  // epsilon_k per iteration
  /// Monitored, never asserted: min_k lambda_k and the constant
  /// a = beta lambda_min / (4 alpha_max mu (1 + tau)) evaluated with it.
  double empirical_lambda_min = std::numeric_limits<double>::quiet_NaN();
  double empirical_a = std::numeric_limits<double>::quiet_NaN();
  double max_epsilon = 0.0;
  double final_epsilon = 0.0;
  int iterations = 0;

  int total_violations() const;
  bool clean() const { return total_violations() == 0; }
  static std::string check_name(int index);
};

class IncompleteTraceError : public Error {
 public:
  using Error::Error;
};

/// Slack used by every audit comparison: lhs <= rhs + 1e-10 + 1e-12 max(|lhs|, |rhs|).
bool audit_leq(double lhs, double rhs);

/// Audits every row; throws IncompleteTraceError when a required field is unset.
AuditReport audit_trace(const std::vector<IterateRecord>& trace, const SolverConfig& config);

class PsnrUndefined : public Error {
 public:
  using Error::Error;
};

/// (1/n) sum (x_i - ref_i)^2.
double mse(const Vector& x, const Vector& reference);
/// 10 log10( n |max(x) - min(x)|^2 / ||x_true - x||^2 ). Returns +infinity when
/// x == x_true; throws PsnrUndefined for constant x.
double psnr(const Vector& x, const Vector& x_true);

/// Max relative error between grad_eval(x) and fourth-order central
/// differences (offsets +-h, +-2h) on `trials`
/// random coordinates (all coordinates when trials >= n). The relative error
/// is |fd - g_j| / max(|fd|, |g_j|, 1e-8 * ||g||_inf, 1e-300).
double fd_gradient_check(const std::function<double(const Vector&)>& f_eval,
                         const std::function<Vector(const Vector&)>& grad_eval, const Vector& x,
                         double h, int trials, std::uint64_t seed = 7);

/// Exact minimizer of h^k(y) = f1(y) + 1/(2 alpha) ||y - z||_D^2 on small
/// instances, by long iterative runs independent of the dual solver:
/// projected gradient for a box, ADMM on the splitting w = Ay for g(Ay).
struct DenseProxSpec {
  Vector z;
  double alpha = 1.0;
  DiagonalMetric metric;
};
Vector dense_prox_oracle(const DenseProxSpec& spec, const BoxIndicator& box, int iterations = 100000);
Vector dense_prox_oracle(const DenseProxSpec& spec, const CompositeRegularizer& regularizer,
                         int iterations = 100000);

}  // namespace vmilan
