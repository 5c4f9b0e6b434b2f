#include "vmilan/problems.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <string>

namespace vmilan {

namespace {

void check_size(const Vector& x, Index n, const char* who) {
  if (x.size() != n) {
    throw DimensionMismatch(std::string(who) + ": expected " + std::to_string(n) + " entries, got " +
                            std::to_string(x.size()));
  }
}

}  // namespace

Problem::Problem(std::shared_ptr<const SmoothTerm> smooth, std::shared_ptr<const Regularizer> regularizer)
    : smooth_(std::move(smooth)), regularizer_(std::move(regularizer)) {
  if (!smooth_ || !regularizer_) throw std::invalid_argument("problem needs both f0 and f1");
  if (smooth_->dimension() != regularizer_->dimension()) {
    throw DimensionMismatch("f0 and f1 act on spaces of different dimension");
  }
}

double Problem::value(const Vector& x) const {
  const double f1_x = regularizer_->value(x);
  if (!std::isfinite(f1_x)) return std::numeric_limits<double>::infinity();
  return smooth_->value(x) + f1_x;
}

Vector Problem::reduced_gradient(const Vector& x, const Vector& grad) const {
  Vector reduced = grad;
  for (Index j = 0; j < x.size(); ++j) {
    if (regularizer_->at_bound(x, j)) reduced[j] = 0.0;
  }
  return reduced;
}

// ---------------------------------------------------------------------------

double RationalToyTerm::value(const Vector& x) const {
  check_size(x, 1, "toy1d");
  if (!(x[0] > -1.0)) throw DomainError("toy1d: x must exceed -1");
  return 2.0 / (x[0] + 1.0);
}

Vector RationalToyTerm::gradient(const Vector& x) const {
  check_size(x, 1, "toy1d");
  if (!(x[0] > -1.0)) throw DomainError("toy1d: x must exceed -1");
  const double s = x[0] + 1.0;
  Vector g(1);
  g[0] = -2.0 / (s * s);
  return g;
}

// ---------------------------------------------------------------------------

LeastSquaresTerm::LeastSquaresTerm(std::shared_ptr<const LinearOperator> H, Vector g)
    : H_(std::move(H)), g_(std::move(g)) {
  check_size(g_, H_->rows(), "least squares data");
}

double LeastSquaresTerm::value(const Vector& x) const {
  return 0.5 * (H_->apply(x) - g_).squaredNorm();
}

Vector LeastSquaresTerm::gradient(const Vector& x) const { return H_->adjoint(H_->apply(x) - g_); }

// ---------------------------------------------------------------------------

GaussianSdTerm::GaussianSdTerm(std::shared_ptr<const LinearOperator> H, Vector g, Vector a, Vector b)
    : H_(std::move(H)), g_(std::move(g)), a_(std::move(a)), b_(std::move(b)) {
  const Index n = H_->rows();
  check_size(g_, n, "gaussian_sd data");
  check_size(a_, n, "gaussian_sd a");
  check_size(b_, n, "gaussian_sd b");
  if ((a_.array() < 0.0).any()) throw std::invalid_argument("gaussian_sd: a must be nonnegative");
  if ((b_.array() <= 0.0).any()) throw std::invalid_argument("gaussian_sd: b must be positive");
}

double GaussianSdTerm::value(const Vector& x) const {
  const Vector u = H_->apply(x);
  double total = 0.0;
  for (Index i = 0; i < u.size(); ++i) {
    const double d = a_[i] * u[i] + b_[i];
    if (!(d > 0.0)) throw DomainError("gaussian_sd: a_i (Hx)_i + b_i must be positive");
    const double r = u[i] - g_[i];
    total += r * r / d + std::log(d);
  }
  return 0.5 * total;
}

Vector GaussianSdTerm::gradient(const Vector& x) const {
  const Vector u = H_->apply(x);
  Vector q(u.size());
  for (Index i = 0; i < u.size(); ++i) {
    const double d = a_[i] * u[i] + b_[i];
    if (!(d > 0.0)) throw DomainError("gaussian_sd: a_i (Hx)_i + b_i must be positive");
    const double r = u[i] - g_[i];
    q[i] = r / d - a_[i] * r * r / (2.0 * d * d) + a_[i] / (2.0 * d);
  }
  return H_->adjoint(q);
}

std::optional<double> GaussianSdTerm::curvature_bound() const {
  double bound = 0.0;
  for (Index i = 0; i < g_.size(); ++i) {
    const double num = b_[i] + a_[i] * std::abs(g_[i]);
    bound = std::max(bound, num * num / (b_[i] * b_[i] * b_[i]));
  }
  return bound;
}

Vector GaussianSdTerm::split_gradient_positive_part(const Vector& x) const {
  const Vector u = H_->apply(x);
  Vector s(u.size());
  for (Index i = 0; i < u.size(); ++i) {
    const double d = a_[i] * u[i] + b_[i];
    s[i] = u[i] * (a_[i] * (u[i] + g_[i]) + 2.0 * b_[i]) / (2.0 * d * d) + a_[i] / (2.0 * d);
  }
  return H_->adjoint(s);
}

// ---------------------------------------------------------------------------

CauchyTerm::CauchyTerm(std::shared_ptr<const LinearOperator> H, Vector g, double gamma_noise,
                       double lambda_reg)
    : H_(std::move(H)), g_(std::move(g)), gamma_(gamma_noise), lambda_(lambda_reg) {
  check_size(g_, H_->rows(), "cauchy data");
  if (!(gamma_ > 0.0)) throw std::invalid_argument("cauchy: gamma must be positive");
  if (!(lambda_ > 0.0)) throw std::invalid_argument("cauchy: lambda must be positive");
}

double CauchyTerm::value(const Vector& x) const {
  const Vector u = H_->apply(x);
  const double g2 = gamma_ * gamma_;
  double total = 0.0;
  for (Index i = 0; i < u.size(); ++i) {
    const double r = u[i] - g_[i];
    total += std::log(g2 + r * r);
  }
  return 0.5 * lambda_ * total;
}

Vector CauchyTerm::gradient(const Vector& x) const {
  const Vector u = H_->apply(x);
  const double g2 = gamma_ * gamma_;
  Vector q(u.size());
  for (Index i = 0; i < u.size(); ++i) {
    const double r = u[i] - g_[i];
    q[i] = lambda_ * r / (g2 + r * r);
  }
  return H_->adjoint(q);
}

std::optional<double> CauchyTerm::curvature_bound() const { return lambda_ / (gamma_ * gamma_); }

Vector CauchyTerm::split_gradient_positive_part(const Vector& x) const {
  const Vector u = H_->apply(x);
  const double g2 = gamma_ * gamma_;
  Vector s(u.size());
  for (Index i = 0; i < u.size(); ++i) {
    const double r = u[i] - g_[i];
    s[i] = lambda_ * u[i] / (g2 + r * r);
  }
  return H_->adjoint(s);
}

// ---------------------------------------------------------------------------

namespace {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// A(c) = C + (C - I) L for the Neumann 5-point Laplacian.
SparseMatrix assemble_system(const Vector& c, Index width, Index height, bool transpose) {
  const Index n = width * height;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(5 * n));
  auto add = [&](Index row, Index col, double v) {
    if (transpose) std::swap(row, col);
    entries.emplace_back(row, col, v);
  };
  for (Index r = 0; r < height; ++r) {
    for (Index col = 0; col < width; ++col) {
      const Index i = r * width + col;
      const double w = c[i] - 1.0;
      int neighbours = 0;
      auto link = [&](Index j) {
        ++neighbours;
        if (w != 0.0) add(i, j, w);
      };
      if (r > 0) link(i - width);
      if (r + 1 < height) link(i + width);
      if (col > 0) link(i - 1);
      if (col + 1 < width) link(i + 1);
      add(i, i, c[i] - w * neighbours);
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  return a;
}

}  // namespace

CompressionTerm::CompressionTerm(ImageGrid u0, double lambda_reg)
    : u0_(std::move(u0)), lambda_(lambda_reg), laplacian_(u0_.width, u0_.height) {
  if (!(lambda_ >= 0.0)) throw std::invalid_argument("compression: lambda must be nonnegative");
}

Vector CompressionTerm::solve(const Vector& c, const Vector& rhs, bool transpose) const {
  const Index n = u0_.size();
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) return Vector::Zero(n);
  const SparseMatrix a = assemble_system(c, u0_.width, u0_.height, transpose);

  Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double>> krylov;
  krylov.setTolerance(1e-2 * kSolveTolerance);
  krylov.setMaxIterations(10 * n);
  krylov.compute(a);
  Vector x;
  if (krylov.info() == Eigen::Success) x = krylov.solve(rhs);
  double residual = x.size() == n ? (a * x - rhs).norm() / rhs_norm
                                  : std::numeric_limits<double>::infinity();
  if (!(residual <= kSolveTolerance)) {
    // Direct factorization when the Krylov iteration stalls.
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    const Eigen::SparseMatrix<double> col_major = a;
    lu.compute(col_major);
    if (lu.info() == Eigen::Success) {
      x = lu.solve(rhs);
      residual = (a * x - rhs).norm() / rhs_norm;
    }
  }
  if (!(residual <= kSolveTolerance)) {
    throw LinearSolveError("compression: linear solve did not converge (relative residual " +
                               std::to_string(residual) + ")",
                           residual);
  }
  return x;
}

Vector CompressionTerm::reconstruct(const Vector& c) const {
  check_size(c, u0_.size(), "compression mask");
  return solve(c, c.cwiseProduct(u0_.pixels), false);
}

Vector CompressionTerm::apply_system(const Vector& c, const Vector& v) const {
  check_size(c, u0_.size(), "compression mask");
  return c.cwiseProduct(v) + (c.array() - 1.0).matrix().cwiseProduct(laplacian_.apply(v));
}

double CompressionTerm::value(const Vector& c) const {
  const Vector u = reconstruct(c);
  return 0.5 * (u - u0_.pixels).squaredNorm() + lambda_ * c.sum();
}

Vector CompressionTerm::gradient(const Vector& c) const {
  const Vector u = reconstruct(c);
  const Vector residual = u - u0_.pixels;
  const Vector w = solve(c, residual, true);
  const Vector structural = u0_.pixels - u - laplacian_.apply(u);
  return w.cwiseProduct(structural).array() + lambda_;
}

// ---------------------------------------------------------------------------

Problem make_toy1d_problem() {
  return Problem(std::make_shared<RationalToyTerm>(), std::make_shared<BoxIndicator>(1, 0.0, 10.0));
}

Problem make_gaussian_sd_problem(std::shared_ptr<const ConvOperator> H, const ImageGrid& observed,
                                 Vector a, Vector b, double rho) {
  const Index w = H->width(), h = H->height();
  if (observed.width != w || observed.height != h) throw DimensionMismatch("observed image vs blur grid");
  auto smooth = std::make_shared<GaussianSdTerm>(std::move(H), observed.pixels, std::move(a), std::move(b));
  return Problem(std::move(smooth), make_tv_nonneg_regularizer(w, h, rho));
}

Problem make_cauchy_problem(std::shared_ptr<const ConvOperator> H, const ImageGrid& observed,
                            double gamma_noise, double lambda_reg, double rho) {
  const Index w = H->width(), h = H->height();
  if (observed.width != w || observed.height != h) throw DimensionMismatch("observed image vs blur grid");
  auto smooth = std::make_shared<CauchyTerm>(std::move(H), observed.pixels, gamma_noise, lambda_reg);
  return Problem(std::move(smooth), make_tv_nonneg_regularizer(w, h, rho));
}

Problem make_compression_problem(const ImageGrid& u0, double lambda_reg, double box_upper) {
  return Problem(std::make_shared<CompressionTerm>(u0, lambda_reg),
                 std::make_shared<BoxIndicator>(u0.size(), 0.0, box_upper));
}

}  // namespace vmilan
