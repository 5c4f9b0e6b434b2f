#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>

#include "vmilan/linear_operator.hpp"
#include "vmilan/state.hpp"

namespace vmilan {

/// Accepted inexact proximal point together with its primal-dual certificate.
///
/// At acceptance psi_dual <= h_primal <= eta * psi_dual <= 0, where
/// eta = 1 / (1 + tau / 2). For exact proximal points psi_dual == h_primal
/// and dual_v is empty.
struct ProxCertificate {
  Vector y_tilde;
  Vector dual_v;
  double h_primal = 0.0;  // h^k(y_tilde), gamma = 1
  double psi_dual = 0.0;  // Psi^k(v)
  double h_gamma = 0.0;   // h^k_gamma(y_tilde)
  double epsilon = 0.0;   // -(tau / 2) * h_gamma
  int inner_iters = 0;
  bool exact = false;
};

struct ProxOptions {
  int inner_limit = 5000;
  /// Start the dual iteration from the previously accepted dual point.
  bool warm_start = true;
  /// Accelerated (Chambolle-Dossal) projected gradient; plain projected
  /// gradient when false.
  bool accelerated = true;
  double fista_a = 2.1;
  /// When set, stop on h - Psi <= gap_tolerance instead of the eta test.
  std::optional<double> gap_tolerance;
};

/// Computes the inexact proximal point for one outer iteration. Instances may
/// carry warm-start state and belong to a single solver run.
class ProxSolver {
 public:
  virtual ~ProxSolver() = default;
  virtual ProxCertificate solve(const IterateState& state, double tau, double gamma) = 0;
};

/// The convex term f1.
class Regularizer {
 public:
  virtual ~Regularizer() = default;

  virtual Index dimension() const = 0;
  /// f1(x); +infinity outside dom(f1).
  virtual double value(const Vector& x) const = 0;
  virtual bool in_domain(const Vector& x) const = 0;
  /// Euclidean projection onto dom(f1) (closed box).
  virtual Vector project_domain(const Vector& x) const = 0;
  /// Whether coordinate j sits on the boundary of dom(f1); used to zero the
  /// reduced gradient.
  virtual bool at_bound(const Vector& x, Index j) const = 0;
  virtual std::unique_ptr<ProxSolver> make_prox_solver(const ProxOptions& options) const = 0;
};

/// f1 = indicator of [lower, upper]^n. Its scaled proximal map is the clamp.
class BoxIndicator final : public Regularizer {
 public:
  BoxIndicator(Index n, double lower, double upper);

  Index dimension() const override { return n_; }
  double value(const Vector& x) const override;
  bool in_domain(const Vector& x) const override;
  Vector project_domain(const Vector& x) const override;
  bool at_bound(const Vector& x, Index j) const override;
  std::unique_ptr<ProxSolver> make_prox_solver(const ProxOptions& options) const override;

  double lower() const { return lower_; }
  double upper() const { return upper_; }

 private:
  Index n_;
  double lower_;
  double upper_;
};

/// f1(x) = g(A x) restricted to a closed box dom(f1), with g proper convex lsc
/// and g* an indicator (value 0 on its domain). The proximal point is obtained
/// from the dual problem.
class CompositeRegularizer final : public Regularizer {
 public:
  struct Parts {
    std::shared_ptr<const LinearOperator> op;
    std::function<double(const Vector&)> g;
    /// In-place projection onto dom(g*).
    std::function<void(Vector&)> project_conjugate;
    std::function<bool(const Vector&)> in_conjugate_domain;
    double domain_lower = -std::numeric_limits<double>::infinity();
    double domain_upper = std::numeric_limits<double>::infinity();
    double rho = 1.0;
  };

  static constexpr int kPowerIterations = 50;
  static constexpr double kNormSafety = 1.05;

  explicit CompositeRegularizer(Parts parts);

  Index dimension() const override { return parts_.op->cols(); }
  double value(const Vector& x) const override;
  bool in_domain(const Vector& x) const override;
  Vector project_domain(const Vector& x) const override;
  bool at_bound(const Vector& x, Index j) const override;
  std::unique_ptr<ProxSolver> make_prox_solver(const ProxOptions& options) const override;

  const LinearOperator& op() const { return *parts_.op; }
  double g(const Vector& t) const { return parts_.g(t); }
  void project_conjugate(Vector& v) const { parts_.project_conjugate(v); }
  bool in_conjugate_domain(const Vector& v) const { return parts_.in_conjugate_domain(v); }
  double rho() const { return parts_.rho; }
  /// Upper bound on ||A||^2 (power iteration estimate times kNormSafety).
  double norm_sq_bound() const { return norm_sq_bound_; }

 private:
  Parts parts_;
  double norm_sq_bound_;
};

/// rho * sum_i ||grad_i x|| + indicator(x >= 0) on a width x height grid.
std::shared_ptr<const CompositeRegularizer> make_tv_nonneg_regularizer(Index width, Index height,
                                                                       double rho);

/// h^k_gamma(y) given f1(y): grad^T (y - x) + gamma/(2 alpha) ||y - x||_D^2 + f1(y) - f1(x).
double linearized_model(const Vector& y, double f1_y, const IterateState& state, double gamma);

/// Entrywise clamp into [lower, upper].
Vector exact_prox_box(const Vector& z, double lower, double upper);

/// Projects v (length 3n) onto dom(g*) of TV + nonnegativity: each pixel pair
/// onto the rho-ball, the trailing n entries onto the nonpositive orthant.
Vector project_dual_tv(const Vector& v, double rho, Index n);
void project_dual_tv_inplace(Vector& v, double rho, Index n);

/// Psi^k(v). Throws InfeasiblePointError when v lies outside dom(g*).
double dual_objective(const Vector& v, const IterateState& state,
                      const CompositeRegularizer& regularizer);

/// P_dom(f1)(z - alpha D^{-1} A^T v).
Vector primal_from_dual(const Vector& v, const IterateState& state,
                        const CompositeRegularizer& regularizer);

/// Accelerated projected gradient ascent on Psi^k from `v_start` (zero when
/// empty), stopping at the first inner iterate with h(y) <= eta * Psi(v).
/// Throws InexactProxFailure when inner_limit iterations do not suffice.
ProxCertificate inexact_prox_dual(const IterateState& state, const CompositeRegularizer& regularizer,
                                  double tau, double gamma, const ProxOptions& options,
                                  const Vector& v_start = Vector());

}  // namespace vmilan
