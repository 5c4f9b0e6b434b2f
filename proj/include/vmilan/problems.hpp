#pragma once

#include <memory>
#include <optional>
#include <string>

#include "vmilan/image.hpp"
#include "vmilan/imaging_operators.hpp"
#include "vmilan/prox.hpp"

namespace vmilan {

/// The differentiable term f0.
class SmoothTerm {
 public:
  virtual ~SmoothTerm() = default;

  virtual Index dimension() const = 0;
  /// Throws DomainError outside dom(f0).
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  /// Bound on the Hessian spectral norm over the nonnegative orthant, when one
  /// is available in closed form. Used by the majorant metric fallback.
  virtual std::optional<double> curvature_bound() const { return std::nullopt; }
  virtual std::string name() const = 0;
};

/// f = f0 + f1 with the feasible set given by dom(f1).
class Problem {
 public:
  Problem(std::shared_ptr<const SmoothTerm> smooth, std::shared_ptr<const Regularizer> regularizer);

  Index dimension() const { return smooth_->dimension(); }
  double f0(const Vector& x) const { return smooth_->value(x); }
  Vector grad_f0(const Vector& x) const { return smooth_->gradient(x); }
  double f1(const Vector& x) const { return regularizer_->value(x); }
  /// f0 + f1; +infinity outside dom(f1).
  double value(const Vector& x) const;
  bool in_domain(const Vector& x) const { return regularizer_->in_domain(x); }

  /// Gradient with the entries on the boundary of dom(f1) zeroed.
  Vector reduced_gradient(const Vector& x, const Vector& grad) const;

  const SmoothTerm& smooth() const { return *smooth_; }
  const Regularizer& regularizer() const { return *regularizer_; }
  std::shared_ptr<const SmoothTerm> smooth_ptr() const { return smooth_; }

 private:
  std::shared_ptr<const SmoothTerm> smooth_;
  std::shared_ptr<const Regularizer> regularizer_;
};

/// f0(x) = 2 / (x + 1) on R (domain x > -1).
class RationalToyTerm final : public SmoothTerm {
 public:
  Index dimension() const override { return 1; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  std::optional<double> curvature_bound() const override { return 4.0; }
  std::string name() const override { return "toy1d"; }
};

/// f0(x) = 1/2 ||H x - g||^2.
class LeastSquaresTerm final : public SmoothTerm {
 public:
  LeastSquaresTerm(std::shared_ptr<const LinearOperator> H, Vector g);

  Index dimension() const override { return H_->cols(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  std::optional<double> curvature_bound() const override { return 1.0; }
  std::string name() const override { return "least_squares"; }
  const LinearOperator& op() const { return *H_; }

 private:
  std::shared_ptr<const LinearOperator> H_;
  Vector g_;
};

/// Negative log-likelihood under signal-dependent Gaussian noise:
/// f0(x) = 1/2 sum_i [ r_i^2 / d_i + log d_i ], r = Hx - g, d = a.*Hx + b.
class GaussianSdTerm final : public SmoothTerm {
 public:
  GaussianSdTerm(std::shared_ptr<const LinearOperator> H, Vector g, Vector a, Vector b);

  Index dimension() const override { return H_->cols(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  /// max_i (b_i + a_i |g_i|)^2 / b_i^3 bounds the per-pixel second derivative
  /// on Hx >= 0.
  std::optional<double> curvature_bound() const override;
  std::string name() const override { return "gaussian_sd"; }

  /// Positive part V(x) = H^T s of the split gradient.
  Vector split_gradient_positive_part(const Vector& x) const;

  const LinearOperator& op() const { return *H_; }
  const Vector& observed() const { return g_; }
  const Vector& a() const { return a_; }
  const Vector& b() const { return b_; }

 private:
  std::shared_ptr<const LinearOperator> H_;
  Vector g_;
  Vector a_;
  Vector b_;
};

/// Cauchy-noise discrepancy f0(x) = (lambda/2) sum_i log(gamma^2 + ((Hx)_i - g_i)^2).
class CauchyTerm final : public SmoothTerm {
 public:
  CauchyTerm(std::shared_ptr<const LinearOperator> H, Vector g, double gamma_noise,
             double lambda_reg);

  Index dimension() const override { return H_->cols(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  /// lambda / gamma^2.
  std::optional<double> curvature_bound() const override;
  std::string name() const override { return "cauchy"; }

  /// V(x) = lambda H^T s, s_i = (Hx)_i / (gamma^2 + ((Hx)_i - g_i)^2).
  Vector split_gradient_positive_part(const Vector& x) const;

  const LinearOperator& op() const { return *H_; }
  double gamma_noise() const { return gamma_; }
  double lambda_reg() const { return lambda_; }

 private:
  std::shared_ptr<const LinearOperator> H_;
  Vector g_;
  double gamma_;
  double lambda_;
};

/// Optimal inpainting mask for linear diffusion compression:
/// f0(c) = 1/2 ||u(c) - u0||^2 + lambda sum_i c_i with A(c) u = C u0,
/// A(c) = C + (C - I) L, C = diag(c).
class CompressionTerm final : public SmoothTerm {
 public:
  static constexpr double kSolveTolerance = 1e-10;

  CompressionTerm(ImageGrid u0, double lambda_reg);

  Index dimension() const override { return u0_.size(); }
  double value(const Vector& c) const override;
  Vector gradient(const Vector& c) const override;
  std::string name() const override { return "compression"; }

  /// Reconstruction u = A(c)^{-1} C u0. Throws LinearSolveError when the
  /// relative residual exceeds kSolveTolerance.
  Vector reconstruct(const Vector& c) const;
  /// A(c) v, for consistency checks.
  Vector apply_system(const Vector& c, const Vector& v) const;

  const ImageGrid& original() const { return u0_; }
  double lambda_reg() const { return lambda_; }

 private:
  Vector solve(const Vector& c, const Vector& rhs, bool transpose) const;

  ImageGrid u0_;
  double lambda_;
  Laplacian laplacian_;
};

// Problem factories. Deblurring problems use TV + nonnegativity as f1.

Problem make_toy1d_problem();
Problem make_gaussian_sd_problem(std::shared_ptr<const ConvOperator> H, const ImageGrid& observed,
                                 Vector a, Vector b, double rho);
Problem make_cauchy_problem(std::shared_ptr<const ConvOperator> H, const ImageGrid& observed,
                            double gamma_noise, double lambda_reg, double rho = 1.0);
Problem make_compression_problem(const ImageGrid& u0, double lambda_reg, double box_upper = 1.5);

}  // namespace vmilan
