#include "vmilan/diagnostics.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace vmilan {

bool audit_leq(double lhs, double rhs) {
  if (std::isnan(lhs) || std::isnan(rhs)) return false;
  return lhs <= rhs + 1e-10 + 1e-12 * std::max(std::abs(lhs), std::abs(rhs));
}

std::uint32_t check_iteration(const IterateRecord& r, const SolverConfig& config,
                              double previous_f_value) {
  std::uint32_t flags = 0;
  if (!audit_leq(r.h_gamma, 0.0)) flags |= kHGammaNonpositive;
  const double bound = -4.0 * config.alpha_max * config.mu * (1.0 + config.tau) * r.h_gamma;
  if (!audit_leq(r.tilde_dist * r.tilde_dist, bound)) flags |= kProxDistanceBound;
  if (!audit_leq(r.f_value, std::min(r.f_tilde, r.f_linesearch))) flags |= kStep5Choice;
  if (!audit_leq(r.step_norm, r.tilde_dist)) flags |= kStepNotLonger;
  bool monotone = audit_leq(r.f_value, r.f_prev);
  if (std::isfinite(previous_f_value)) monotone = monotone && audit_leq(r.f_value, previous_f_value);
  if (!monotone) flags |= kMonotone;
  if (!audit_leq(r.f_linesearch, r.f_prev + config.beta * r.lambda * r.h_gamma)) flags |= kArmijo;
  return flags;
}

int AuditReport::total_violations() const {
  int total = 0;
  for (int v : violations) total += v;
  return total;
}

std::string AuditReport::check_name(int index) {
  static const char* names[kAuditChecks] = {"h_gamma_nonpositive", "prox_distance_bound",
                                            "step5_choice",        "step_not_longer",
                                            "monotone",            "armijo"};
  if (index < 0 || index >= kAuditChecks) throw std::out_of_range("audit check index");
  return names[index];
}

AuditReport audit_trace(const std::vector<IterateRecord>& trace, const SolverConfig& config) {
  AuditReport report;
  report.iterations = static_cast<int>(trace.size());
  double previous = std::numeric_limits<double>::quiet_NaN();
  double lambda_min = std::numeric_limits<double>::infinity();
  for (const IterateRecord& r : trace) {
    for (double field : {r.f_value, r.lambda, r.step_norm, r.h_gamma, r.f_prev, r.f_tilde,
                         r.f_linesearch, r.tilde_dist, r.epsilon_k}) {
      if (std::isnan(field)) {
        throw IncompleteTraceError("trace row " + std::to_string(r.k) + " is missing audit fields");
      }
    }
    const std::uint32_t flags = check_iteration(r, config, previous);
    report.flags.push_back(flags);
    for (int c = 0; c < kAuditChecks; ++c) {
      if (flags & (1u << c)) ++report.violations[static_cast<std::size_t>(c)];
    }
    report.epsilon.push_back(r.epsilon_k);
    report.max_epsilon = std::max(report.max_epsilon, r.epsilon_k);
    lambda_min = std::min(lambda_min, r.lambda);
    previous = r.f_value;
  }
  if (!trace.empty()) {
    report.final_epsilon = trace.back().epsilon_k;
    report.empirical_lambda_min = lambda_min;
    report.empirical_a =
        config.beta * lambda_min / (4.0 * config.alpha_max * config.mu * (1.0 + config.tau));
  }
  return report;
}

double mse(const Vector& x, const Vector& reference) {
  if (x.size() != reference.size()) throw DimensionMismatch("mse: size mismatch");
  if (x.size() == 0) throw std::invalid_argument("mse of empty vectors");
  return (x - reference).squaredNorm() / static_cast<double>(x.size());
}

double psnr(const Vector& x, const Vector& x_true) {
  if (x.size() != x_true.size()) throw DimensionMismatch("psnr: size mismatch");
  const double range = x.maxCoeff() - x.minCoeff();
  if (range == 0.0) throw PsnrUndefined("psnr undefined for a constant image");
  const double err = (x_true - x).squaredNorm();
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(static_cast<double>(x.size()) * range * range / err);
}

double fd_gradient_check(const std::function<double(const Vector&)>& f_eval,
                         const std::function<Vector(const Vector&)>& grad_eval, const Vector& x,
                         double h, int trials, std::uint64_t seed) {
  const Index n = x.size();
  const Vector g = grad_eval(x);
  const double g_scale = g.lpNorm<Eigen::Infinity>();
  std::vector<Index> coords;
  if (trials >= n) {
    for (Index j = 0; j < n; ++j) coords.push_back(j);
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Index> pick(0, n - 1);
    for (int t = 0; t < trials; ++t) coords.push_back(pick(rng));
  }
  double worst = 0.0;
  Vector probe = x;
  for (Index j : coords) {
    auto at = [&](double offset) {
      probe[j] = x[j] + offset;
      const double v = f_eval(probe);
      probe[j] = x[j];
      return v;
    };
    // Fourth-order central stencil.
    const double fd = (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(g[j]), 1e-8 * g_scale, 1e-300});
    worst = std::max(worst, std::abs(fd - g[j]) / denom);
  }
  return worst;
}

Vector dense_prox_oracle(const DenseProxSpec& spec, const BoxIndicator& box, int iterations) {
  // Projected gradient on a separable strongly convex quadratic; step 1/L.
  const Vector& d = spec.metric.diag;
  const double step = spec.alpha / d.maxCoeff();
  Vector y = box.project_domain(spec.z);
  for (int it = 0; it < iterations; ++it) {
    const Vector grad = d.cwiseProduct(y - spec.z) / spec.alpha;
    Vector next = box.project_domain(y - step * grad);
    if (next == y) break;
    y = std::move(next);
  }
  return y;
}

Vector dense_prox_oracle(const DenseProxSpec& spec, const CompositeRegularizer& regularizer,
                         int iterations) {
  // ADMM on min_y q(y) + g(w) s.t. Ay = w, q(y) = ||y - z||_D^2 / (2 alpha).
  // q is strongly convex and A has full column rank, so the iteration
  // converges linearly. The prox of g / beta comes from Moreau's identity,
  // since g* is the indicator of the set project_conjugate maps onto.
  const LinearOperator& a = regularizer.op();
  const Index n = spec.z.size();
  const Index m = a.rows();
  Eigen::MatrixXd dense_a(m, n);
  Vector unit = Vector::Zero(n);
  for (Index j = 0; j < n; ++j) {
    unit[j] = 1.0;
    dense_a.col(j) = a.apply(unit);
    unit[j] = 0.0;
  }
  const Vector weight = spec.metric.diag / spec.alpha;
  const double beta = weight.mean();
  Eigen::MatrixXd system = beta * dense_a.transpose() * dense_a;
  system.diagonal() += weight;
  const Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) throw Error("dense prox oracle: singular system");

  const Vector wz = weight.cwiseProduct(spec.z);
  Vector y = spec.z;
  Vector w = dense_a * y;
  Vector u = Vector::Zero(m);
  for (int it = 0; it < iterations; ++it) {
    y = llt.solve(wz + beta * dense_a.transpose() * (w - u));
    const Vector ay = dense_a * y;
    const Vector s = ay + u;
    Vector scaled = beta * s;
    regularizer.project_conjugate(scaled);
    w = s - scaled / beta;
    u += ay - w;
  }
  return regularizer.project_domain(y);
}

}  // namespace vmilan
