#include "vmilan/metrics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vmilan {

// ---------------------------------------------------------------------------
// DiagonalMetric

DiagonalMetric DiagonalMetric::identity(Index n, double mu) {
  return DiagonalMetric{Vector::Ones(n), mu};
}

DiagonalMetric DiagonalMetric::from_inverse(const Vector& inverse_request, double mu) {
  if (!(mu >= 1.0)) throw std::invalid_argument("metric bound mu must be >= 1");
  const double lo = 1.0 / mu;
  Vector diag(inverse_request.size());
  for (Index i = 0; i < diag.size(); ++i) {
    const double req = inverse_request[i];
    const double inv = std::isnan(req) ? lo : std::clamp(req, lo, mu);
    diag[i] = 1.0 / inv;
  }
  return DiagonalMetric{std::move(diag), mu};
}

double DiagonalMetric::norm_sq(const Vector& v) const {
  return (diag.array() * v.array().square()).sum();
}

double DiagonalMetric::inverse_norm_sq(const Vector& v) const {
  return (v.array().square() / diag.array()).sum();
}

bool DiagonalMetric::valid() const {
  const double slack = 1e-12;
  const double lo = (1.0 / mu_bound) * (1.0 - slack);
  const double hi = mu_bound * (1.0 + slack);
  return diag.size() > 0 && (diag.array() >= lo).all() && (diag.array() <= hi).all();
}

// ---------------------------------------------------------------------------
// Scaling matrices

DiagonalMetric sg_metric_gaussian(const Vector& x, const GaussianSdTerm& term, double mu) {
  const Vector v = term.split_gradient_positive_part(x);
  const double eps = std::numeric_limits<double>::epsilon();
  Vector request(x.size());
  for (Index i = 0; i < x.size(); ++i) request[i] = x[i] / (v[i] + eps);
  return DiagonalMetric::from_inverse(request, mu);
}

DiagonalMetric sg_metric_cauchy(const Vector& x, const CauchyTerm& term, double mu) {
  const Vector v = term.split_gradient_positive_part(x);
  Vector request(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      request[i] = 1.0 / mu;
    } else if (!(v[i] > 0.0)) {
      request[i] = mu;
    } else {
      request[i] = x[i] / v[i];
    }
  }
  return DiagonalMetric::from_inverse(request, mu);
}

namespace {

const LinearOperator* forward_operator(const SmoothTerm& term) {
  if (auto* t = dynamic_cast<const GaussianSdTerm*>(&term)) return &t->op();
  if (auto* t = dynamic_cast<const CauchyTerm*>(&term)) return &t->op();
  if (auto* t = dynamic_cast<const LeastSquaresTerm*>(&term)) return &t->op();
  return nullptr;
}

}  // namespace

DiagonalMetric majorant_diag_metric(const SmoothTerm& term, double mu) {
  const auto curvature = term.curvature_bound();
  if (!curvature) {
    throw std::invalid_argument("majorant metric needs a curvature bound for " + term.name());
  }
  const LinearOperator* op = forward_operator(term);
  const double op_norm_sq = op ? estimate_norm_squared(*op) : 1.0;
  const double c = *curvature * op_norm_sq;
  return DiagonalMetric::from_inverse(Vector::Constant(term.dimension(), c), mu);
}

namespace {

class IdentityMetric final : public MetricStrategy {
 public:
  DiagonalMetric compute(const Vector& x, double mu) override {
    return DiagonalMetric::identity(x.size(), mu);
  }
  std::string name() const override { return "identity"; }
};

class SgMetric final : public MetricStrategy {
 public:
  explicit SgMetric(const SmoothTerm& term) : term_(term) {}
  DiagonalMetric compute(const Vector& x, double mu) override {
    if (auto* t = dynamic_cast<const GaussianSdTerm*>(&term_)) return sg_metric_gaussian(x, *t, mu);
    return sg_metric_cauchy(x, dynamic_cast<const CauchyTerm&>(term_), mu);
  }
  std::string name() const override { return "sg"; }

 private:
  const SmoothTerm& term_;
};

class MajorantMetric final : public MetricStrategy {
 public:
  explicit MajorantMetric(const SmoothTerm& term) : term_(term) {}
  DiagonalMetric compute(const Vector&, double mu) override {
    if (!cached_ || cached_->mu_bound != mu) cached_ = majorant_diag_metric(term_, mu);
    return *cached_;
  }
  std::string name() const override { return "majorant-lipschitz-fallback"; }

 private:
  const SmoothTerm& term_;
  std::optional<DiagonalMetric> cached_;
};

}  // namespace

std::unique_ptr<MetricStrategy> make_metric_strategy(const std::string& name, const Problem& problem) {
  const SmoothTerm& term = problem.smooth();
  if (name == "identity") return std::make_unique<IdentityMetric>();
  if (name == "sg") {
    if (!dynamic_cast<const GaussianSdTerm*>(&term) && !dynamic_cast<const CauchyTerm*>(&term)) {
      throw std::invalid_argument("sg metric is defined for gaussian_sd and cauchy problems only");
    }
    return std::make_unique<SgMetric>(term);
  }
  if (name == "majorant") {
    if (!term.curvature_bound()) {
      throw std::invalid_argument("majorant metric unavailable for " + term.name());
    }
    return std::make_unique<MajorantMetric>(term);
  }
  throw std::invalid_argument("unknown metric strategy: " + name);
}

// ---------------------------------------------------------------------------
// Steplengths

double bb_steplength(const Vector& s, const Vector& y, double alpha_min, double alpha_max) {
  const double sty = s.dot(y);
  if (!(sty > 0.0)) return alpha_max;
  return std::clamp(s.squaredNorm() / sty, alpha_min, alpha_max);
}

void SteplengthMemory::push(double alpha, Vector scaled_gradient) {
  alphas.push_back(alpha);
  scaled_gradients.push_back(std::move(scaled_gradient));
  while (static_cast<int>(alphas.size()) > window) {
    alphas.pop_front();
    scaled_gradients.pop_front();
  }
}

std::optional<std::vector<double>> ritz_values(const SteplengthMemory& memory,
                                               const Vector& current_scaled_gradient) {
  const int m = static_cast<int>(memory.alphas.size());
  if (m == 0) return std::nullopt;
  const Index n = current_scaled_gradient.size();

  Eigen::MatrixXd g(n, m);
  for (int j = 0; j < m; ++j) g.col(j) = memory.scaled_gradients[static_cast<std::size_t>(j)];
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(m + 1, m);
  for (int j = 0; j < m; ++j) {
    const double inv_alpha = 1.0 / memory.alphas[static_cast<std::size_t>(j)];
    gamma(j, j) = inv_alpha;
    gamma(j + 1, j) = -inv_alpha;
  }

  const Eigen::MatrixXd gram = g.transpose() * g;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Eigen::MatrixXd r_upper = llt.matrixU();
  const Eigen::VectorXd diag = r_upper.diagonal().cwiseAbs();
  if (!(diag.minCoeff() > 1e-12 * diag.maxCoeff())) return std::nullopt;

  // R^T r = G^T g_k
  const Eigen::VectorXd rhs = g.transpose() * current_scaled_gradient;
  const Eigen::VectorXd r = r_upper.transpose().triangularView<Eigen::Lower>().solve(rhs);

  Eigen::MatrixXd rr(m, m + 1);
  rr.leftCols(m) = r_upper;
  rr.col(m) = r;
  // Phi = [R r] Gamma R^{-1}; computed as (R^{-T} (Gamma^T [R r]^T))^T.
  const Eigen::MatrixXd left = rr * gamma;
  const Eigen::MatrixXd phi =
      r_upper.transpose().triangularView<Eigen::Lower>().solve(left.transpose()).transpose();

  Eigen::MatrixXd sym = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    sym(i, i) = phi(i, i);
    for (int j = 0; j < i; ++j) {
      sym(i, j) = phi(i, j);
      sym(j, i) = phi(i, j);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) return std::nullopt;
  std::vector<double> values(eig.eigenvalues().data(), eig.eigenvalues().data() + m);
  for (double v : values) {
    if (!std::isfinite(v)) return std::nullopt;
  }
  return values;
}

std::optional<std::vector<double>> ritz_steplengths(const SteplengthMemory& memory,
                                                    const Vector& current_scaled_gradient,
                                                    double alpha_min, double alpha_max) {
  const auto values = ritz_values(memory, current_scaled_gradient);
  if (!values) return std::nullopt;
  std::vector<double> steps;
  for (double v : *values) {
    if (v > 0.0) steps.push_back(std::clamp(1.0 / v, alpha_min, alpha_max));
  }
  if (steps.empty()) return std::nullopt;
  std::sort(steps.begin(), steps.end());
  return steps;
}

double SteplengthStrategy::bb_fallback(const SteplengthContext& ctx) const {
  if (!prev_x_ || !prev_grad_) return ctx.alpha_max;
  return bb_steplength(ctx.x - *prev_x_, ctx.grad - *prev_grad_, ctx.alpha_min, ctx.alpha_max);
}

void SteplengthStrategy::remember(const SteplengthContext& ctx) {
  prev_x_ = ctx.x;
  prev_grad_ = ctx.grad;
}

double BarzilaiBorweinSteplength::next(const SteplengthContext& ctx) {
  const double alpha = (ctx.k == 0 || !prev_x_) ? std::clamp(1.0, ctx.alpha_min, ctx.alpha_max)
                                                : bb_fallback(ctx);
  remember(ctx);
  return alpha;
}

double RitzSteplength::next(const SteplengthContext& ctx) {
  const Vector scaled = ctx.metric.diag.cwiseSqrt().cwiseProduct(ctx.reduced_grad);
  double alpha;
  if (ctx.k == 0 || !prev_x_) {
    alpha = std::clamp(1.0, ctx.alpha_min, ctx.alpha_max);
  } else if (!memory_.queue.empty()) {
    alpha = memory_.queue.front();
    memory_.queue.pop_front();
  } else if (memory_.full()) {
    if (auto steps = ritz_steplengths(memory_, scaled, ctx.alpha_min, ctx.alpha_max)) {
      memory_.queue.assign(steps->begin(), steps->end());
      alpha = memory_.queue.front();
      memory_.queue.pop_front();
    } else {
      ++fallback_events_;
      alpha = bb_fallback(ctx);
    }
  } else {
    alpha = bb_fallback(ctx);
  }
  alpha = std::clamp(alpha, ctx.alpha_min, ctx.alpha_max);
  memory_.push(alpha, scaled);
  remember(ctx);
  return alpha;
}

std::unique_ptr<SteplengthStrategy> make_steplength_strategy(const std::string& name, int window) {
  if (name == "bb") return std::make_unique<BarzilaiBorweinSteplength>();
  if (name == "ritz") {
    if (window < 1) throw std::invalid_argument("ritz window must be >= 1");
    return std::make_unique<RitzSteplength>(window);
  }
  throw std::invalid_argument("unknown steplength strategy: " + name);
}

}  // namespace vmilan
