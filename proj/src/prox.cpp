#include "vmilan/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vmilan/solver.hpp"

namespace vmilan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class ExactBoxProx final : public ProxSolver {
 public:
  explicit ExactBoxProx(const BoxIndicator& box) : box_(box) {}

  ProxCertificate solve(const IterateState& state, double tau, double gamma) override {
    ProxCertificate cert;
    cert.y_tilde = exact_prox_box(proximal_target(state), box_.lower(), box_.upper());
    cert.h_primal = linearized_model(cert.y_tilde, 0.0, state, 1.0);
    cert.psi_dual = cert.h_primal;
    cert.h_gamma = linearized_model(cert.y_tilde, 0.0, state, gamma);
    cert.epsilon = -0.5 * tau * cert.h_gamma;
    cert.exact = true;
    return cert;
  }

 private:
  const BoxIndicator& box_;
};

class DualProx final : public ProxSolver {
 public:
  DualProx(const CompositeRegularizer& regularizer, ProxOptions options)
      : regularizer_(regularizer), options_(std::move(options)) {}

  ProxCertificate solve(const IterateState& state, double tau, double gamma) override {
    const Vector& start = options_.warm_start ? warm_v_ : empty_;
    ProxCertificate cert = inexact_prox_dual(state, regularizer_, tau, gamma, options_, start);
    if (options_.warm_start) warm_v_ = cert.dual_v;
    return cert;
  }

 private:
  const CompositeRegularizer& regularizer_;
  ProxOptions options_;
  Vector warm_v_;
  const Vector empty_;
};

// Quantities shared by the dual objective and the primal recovery at v.
struct DualPoint {
  Vector w;       // A^T v
  Vector y_hat;   // z - alpha D^{-1} A^T v (unprojected)
};

DualPoint dual_point(const Vector& v, const Vector& z, const IterateState& state,
                     const CompositeRegularizer& regularizer) {
  DualPoint p;
  regularizer.op().adjoint(v, p.w);
  p.y_hat = z - state.alpha * p.w.cwiseQuotient(state.metric.diag);
  return p;
}

// Psi(v) written around x^k to avoid cancelling the large terms
// ||z||_D^2 / (2 alpha) and alpha ||grad||^2_{D^{-1}} / 2:
//   Psi(v) = v^T A y_hat + grad^T (y_hat - x) + ||y_hat - x||_D^2 / (2 alpha) - g*(v) - f1(x).
// g* is an indicator here, so it vanishes for the feasible v the callers pass.
double dual_value(const DualPoint& p, const IterateState& state) {
  const Vector d = p.y_hat - state.x;
  // v^T A y_hat == (A^T v)^T y_hat
  return p.w.dot(p.y_hat) + state.grad_f0.dot(d) + state.metric.norm_sq(d) / (2.0 * state.alpha) -
         state.f1_value;
}

}  // namespace

double linearized_model(const Vector& y, double f1_y, const IterateState& state, double gamma) {
  if (y.size() != state.x.size()) throw DimensionMismatch("h_gamma: point has wrong dimension");
  if (!std::isfinite(f1_y)) return kInf;
  const Vector d = y - state.x;
  return state.grad_f0.dot(d) + gamma / (2.0 * state.alpha) * state.metric.norm_sq(d) + f1_y -
         state.f1_value;
}

Vector exact_prox_box(const Vector& z, double lower, double upper) {
  if (!(lower <= upper)) throw std::invalid_argument("box requires lower <= upper");
  return z.cwiseMax(lower).cwiseMin(upper);
}

void project_dual_tv_inplace(Vector& v, double rho, Index n) {
  if (v.size() != 3 * n) throw DimensionMismatch("TV dual vector must have 3n entries");
  for (Index i = 0; i < n; ++i) {
    const double norm = std::hypot(v[2 * i], v[2 * i + 1]);
    // Pairs already rescaled onto the sphere can sit a few ulps above rho;
    // leaving them alone keeps the projection idempotent.
    if (norm > rho * (1.0 + 8.0 * std::numeric_limits<double>::epsilon())) {
      const double s = rho / norm;
      v[2 * i] *= s;
      v[2 * i + 1] *= s;
    }
  }
  for (Index i = 2 * n; i < 3 * n; ++i) v[i] = std::min(v[i], 0.0);
}

Vector project_dual_tv(const Vector& v, double rho, Index n) {
  Vector out = v;
  project_dual_tv_inplace(out, rho, n);
  return out;
}

// ---------------------------------------------------------------------------

BoxIndicator::BoxIndicator(Index n, double lower, double upper) : n_(n), lower_(lower), upper_(upper) {
  if (!(lower <= upper)) throw std::invalid_argument("box requires lower <= upper");
}

double BoxIndicator::value(const Vector& x) const { return in_domain(x) ? 0.0 : kInf; }

bool BoxIndicator::in_domain(const Vector& x) const {
  if (x.size() != n_) throw DimensionMismatch("box indicator: wrong dimension");
  return (x.array() >= lower_).all() && (x.array() <= upper_).all();
}

Vector BoxIndicator::project_domain(const Vector& x) const { return exact_prox_box(x, lower_, upper_); }

bool BoxIndicator::at_bound(const Vector& x, Index j) const { return x[j] == lower_ || x[j] == upper_; }

std::unique_ptr<ProxSolver> BoxIndicator::make_prox_solver(const ProxOptions&) const {
  return std::make_unique<ExactBoxProx>(*this);
}

CompositeRegularizer::CompositeRegularizer(Parts parts) : parts_(std::move(parts)) {
  if (!parts_.op || !parts_.g || !parts_.project_conjugate || !parts_.in_conjugate_domain) {
    throw std::invalid_argument("composite regularizer is missing a component");
  }
  norm_sq_bound_ = estimate_norm_squared(*parts_.op, kPowerIterations) * kNormSafety;
}

double CompositeRegularizer::value(const Vector& x) const {
  if (!in_domain(x)) return kInf;
  return parts_.g(parts_.op->apply(x));
}

bool CompositeRegularizer::in_domain(const Vector& x) const {
  if (x.size() != dimension()) throw DimensionMismatch("composite regularizer: wrong dimension");
  return (x.array() >= parts_.domain_lower).all() && (x.array() <= parts_.domain_upper).all();
}

Vector CompositeRegularizer::project_domain(const Vector& x) const {
  return x.cwiseMax(parts_.domain_lower).cwiseMin(parts_.domain_upper);
}

bool CompositeRegularizer::at_bound(const Vector& x, Index j) const {
  return x[j] == parts_.domain_lower || x[j] == parts_.domain_upper;
}

std::unique_ptr<ProxSolver> CompositeRegularizer::make_prox_solver(const ProxOptions& options) const {
  return std::make_unique<DualProx>(*this, options);
}

std::shared_ptr<const CompositeRegularizer> make_tv_nonneg_regularizer(Index width, Index height,
                                                                       double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("TV weight rho must be positive");
  const Index n = width * height;
  CompositeRegularizer::Parts parts;
  parts.op = make_tv_operator(width, height);
  parts.g = [n, rho](const Vector& t) {
    double tv = 0.0;
    for (Index i = 0; i < n; ++i) tv += std::hypot(t[2 * i], t[2 * i + 1]);
    for (Index i = 2 * n; i < 3 * n; ++i) {
      if (t[i] < 0.0) return kInf;
    }
    return rho * tv;
  };
  parts.project_conjugate = [n, rho](Vector& v) { project_dual_tv_inplace(v, rho, n); };
  parts.in_conjugate_domain = [n, rho](const Vector& v) {
    if (v.size() != 3 * n) return false;
    const double limit = rho * (1.0 + 1e-12);
    for (Index i = 0; i < n; ++i) {
      if (std::hypot(v[2 * i], v[2 * i + 1]) > limit) return false;
    }
    for (Index i = 2 * n; i < 3 * n; ++i) {
      if (v[i] > 0.0) return false;
    }
    return true;
  };
  parts.domain_lower = 0.0;
  parts.rho = rho;
  return std::make_shared<CompositeRegularizer>(std::move(parts));
}

// ---------------------------------------------------------------------------

double dual_objective(const Vector& v, const IterateState& state,
                      const CompositeRegularizer& regularizer) {
  if (v.size() != regularizer.op().rows()) throw DimensionMismatch("dual vector has wrong dimension");
  if (!regularizer.in_conjugate_domain(v)) {
    throw InfeasiblePointError("dual vector lies outside dom(g*)");
  }
  const Vector z = proximal_target(state);
  return dual_value(dual_point(v, z, state, regularizer), state);
}

Vector primal_from_dual(const Vector& v, const IterateState& state,
                        const CompositeRegularizer& regularizer) {
  const Vector z = proximal_target(state);
  return regularizer.project_domain(dual_point(v, z, state, regularizer).y_hat);
}

ProxCertificate inexact_prox_dual(const IterateState& state, const CompositeRegularizer& regularizer,
                                  double tau, double gamma, const ProxOptions& options,
                                  const Vector& v_start) {
  if (options.inner_limit < 1) throw std::invalid_argument("inner_limit must be at least 1");
  const Index m = regularizer.op().rows();
  const Vector z = proximal_target(state);
  const double eta = 1.0 / (1.0 + tau / 2.0);

  // Gradient of the smooth dual term is Lipschitz with constant
  // alpha ||A D^{-1} A^T|| <= alpha max_i (D^{-1})_ii ||A||^2.
  const double lipschitz =
      state.alpha * state.metric.inverse().maxCoeff() * regularizer.norm_sq_bound();
  const double step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

  Vector v = v_start.size() == m ? v_start : Vector::Zero(m);
  regularizer.project_conjugate(v);
  Vector v_prev = v;
  Vector u = v;
  Vector ay;
  double gap = kInf;

  for (int ell = 0;; ++ell) {
    const DualPoint p = dual_point(v, z, state, regularizer);
    const Vector y = regularizer.project_domain(p.y_hat);
    const double f1_y = regularizer.value(y);
    const double h = linearized_model(y, f1_y, state, 1.0);
    const double psi = dual_value(p, state);
    gap = h - psi;
    const bool accepted = options.gap_tolerance ? gap <= *options.gap_tolerance : h <= eta * psi;
    if (accepted) {
      ProxCertificate cert;
      cert.y_tilde = y;
      cert.dual_v = v;
      cert.h_primal = h;
      cert.psi_dual = psi;
      cert.h_gamma = linearized_model(y, f1_y, state, gamma);
      cert.epsilon = -0.5 * tau * cert.h_gamma;
      cert.inner_iters = ell;
      return cert;
    }
    if (ell >= options.inner_limit) break;

    // Projected gradient ascent step on Psi from the extrapolated point u.
    const DualPoint pu = (ell == 0 || !options.accelerated) ? p : dual_point(u, z, state, regularizer);
    regularizer.op().apply(pu.y_hat, ay);
    v_prev = v;
    v = (options.accelerated ? u : v) + step * ay;
    regularizer.project_conjugate(v);
    if (options.accelerated) {
      const double n = ell + 1;
      const double t_n = (n + options.fista_a - 1.0) / options.fista_a;
      const double t_next = (n + options.fista_a) / options.fista_a;
      u = v + ((t_n - 1.0) / t_next) * (v - v_prev);
    }
  }
  throw InexactProxFailure("inexact prox: no certificate within " +
                               std::to_string(options.inner_limit) + " inner iterations (gap " +
                               std::to_string(gap) + ")",
                           gap);
}

}  // namespace vmilan
