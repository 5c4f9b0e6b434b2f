#include <doctest.h>

#include <cmath>
#include <limits>

#include "support/instances.hpp"
#include "vmilan/problems.hpp"

using namespace vmilan;
using vmilan::testing::random_vector;

namespace {

std::shared_ptr<const LinearOperator> scalar_identity() { return std::make_shared<IdentityOperator>(1); }

Vector scalar(double v) { return Vector::Constant(1, v); }

double fd_error(const SmoothTerm& term, const Vector& x) {
  const double h = 1e-4 * std::max(1.0, x.lpNorm<Eigen::Infinity>());
  return fd_gradient_check([&](const Vector& v) { return term.value(v); },
                           [&](const Vector& v) { return term.gradient(v); }, x, h,
                           static_cast<int>(x.size()));
}

}  // namespace

TEST_CASE("gaussian_sd scalar hand values") {
  GaussianSdTerm term(scalar_identity(), scalar(0.0), scalar(1.0), scalar(1.0));
  // 1/2 [ 1/2 + log 2 ]
  CHECK(term.value(scalar(1.0)) == doctest::Approx(0.5 * (0.5 + std::log(2.0))).epsilon(1e-15));
  CHECK(term.value(scalar(1.0)) == doctest::Approx(0.5966).epsilon(1e-4));
  // d/dt 1/2 [t^2/(t+1) + log(t+1)] at t = 1: 1/2 [(2t(t+1) - t^2)/(t+1)^2 + 1/(t+1)] = 1/2 (3/4 + 1/2)
  CHECK(term.gradient(scalar(1.0))[0] == doctest::Approx(0.625).epsilon(1e-15));
}

TEST_CASE("gaussian_sd vanishes at a perfect fit with a = 0, b = 1") {
  NoiseSource rng(1);
  auto blur = std::make_shared<const ConvOperator>(6, 6, gaussian_kernel(3, 1.0));
  const Vector x = random_vector(rng, 36);
  GaussianSdTerm term(blur, blur->apply(x), Vector::Zero(36), Vector::Ones(36));
  CHECK(term.value(x) == doctest::Approx(0.0));
  CHECK(term.gradient(x).norm() < 1e-15);
}

TEST_CASE("gaussian_sd rejects points outside its domain") {
  GaussianSdTerm term(scalar_identity(), scalar(0.0), scalar(1.0), scalar(1.0));
  CHECK_THROWS_AS(term.value(scalar(-2.0)), DomainError);
  CHECK_THROWS_AS(term.gradient(scalar(-1.0)), DomainError);
}

TEST_CASE("cauchy scalar hand values") {
  CauchyTerm term(scalar_identity(), scalar(0.0), 1.0, 2.0);
  CHECK(term.value(scalar(1.0)) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(term.gradient(scalar(1.0))[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("cauchy at a perfect fit") {
  NoiseSource rng(2);
  auto blur = std::make_shared<const ConvOperator>(5, 4, gaussian_kernel(3, 1.0));
  const Vector x = random_vector(rng, 20);
  const double gamma = 0.02, lambda = 0.35;
  CauchyTerm term(blur, blur->apply(x), gamma, lambda);
  CHECK(term.value(x) == doctest::Approx(lambda / 2.0 * 20.0 * std::log(gamma * gamma)).epsilon(1e-14));
  CHECK(term.gradient(x).norm() < 1e-12);
}

TEST_CASE("cauchy curvature bound covers sampled second derivatives") {
  const double gamma = 0.3, lambda = 0.7;
  CauchyTerm term(scalar_identity(), scalar(0.0), gamma, lambda);
  const double bound = *term.curvature_bound();
  CHECK(bound == doctest::Approx(lambda / (gamma * gamma)));
  double worst = 0.0;
  for (double t = -3.0; t <= 3.0; t += 0.001) {
    const double h = 1e-4;
    const double second = (term.gradient(scalar(t + h))[0] - term.gradient(scalar(t - h))[0]) / (2 * h);
    worst = std::max(worst, std::abs(second));
  }
  CHECK(worst <= bound * (1.0 + 1e-6));
  CHECK(worst >= 0.99 * bound);  // attained at zero residual
}

TEST_CASE("split gradient parts are nonnegative and sum to the gradient") {
  NoiseSource rng(3);
  auto blur = std::make_shared<const ConvOperator>(8, 8, gaussian_kernel(5, 1.0));
  const Vector truth = random_vector(rng, 64);
  const Vector g = blur->apply(truth);
  GaussianSdTerm sd(blur, g, Vector::Ones(64), Vector::Ones(64));
  CauchyTerm cauchy(blur, g, 0.02, 0.35);
  const Vector x = random_vector(rng, 64);
  CHECK(sd.split_gradient_positive_part(x).minCoeff() >= 0.0);
  CHECK(cauchy.split_gradient_positive_part(x).minCoeff() >= 0.0);
  // Cauchy: V - U = grad with U = lambda H^T (g / (gamma^2 + r^2)) >= 0 for g >= 0.
  const Vector hx = blur->apply(x);
  const Vector denom = (0.02 * 0.02 + (hx - g).array().square()).matrix();
  const Vector u = 0.35 * blur->adjoint(g.cwiseQuotient(denom));
  CHECK((cauchy.split_gradient_positive_part(x) - u - cauchy.gradient(x)).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("smooth term gradients match finite differences") {
  NoiseSource rng(4);
  auto blur = std::make_shared<const ConvOperator>(8, 8, gaussian_kernel(7, 1.0));
  const ImageGrid truth = make_phantom(8, 8);
  DegradeSpec spec;
  spec.model = NoiseModel::kGaussianSd;
  GaussianSdTerm sd(blur, degrade_synthetic(truth, *blur, spec).pixels, Vector::Ones(64), Vector::Ones(64));
  CauchyTerm cauchy(blur, degrade_synthetic(truth, *blur, DegradeSpec{}).pixels, 0.02, 0.35);
  LeastSquaresTerm ls(blur, truth.pixels);
  for (int p = 0; p < 10; ++p) {
    const Vector x = random_vector(rng, 64);
    CHECK(fd_error(sd, x) <= 1e-6);
    CHECK(fd_error(cauchy, x) <= 1e-6);
    CHECK(fd_error(ls, x) <= 1e-6);
  }
  RationalToyTerm toy;
  for (double t : {0.0, 0.5, 3.0, 9.0}) CHECK(fd_error(toy, scalar(t)) <= 1e-8);
}

TEST_CASE("compression with the all-ones mask reproduces the image") {
  const ImageGrid u0 = make_smooth_scene(7, 6);
  const double lambda = 0.01;
  CompressionTerm term(u0, lambda);
  const Vector ones = Vector::Ones(42);
  CHECK((term.reconstruct(ones) - u0.pixels).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(term.value(ones) == doctest::Approx(lambda * 42.0).epsilon(1e-12));
  CompressionTerm no_penalty(u0, 0.0);
  CHECK(std::abs(no_penalty.value(ones)) < 1e-20);
}

TEST_CASE("compression forward map is consistent") {
  NoiseSource rng(5);
  const ImageGrid u0 = make_smooth_scene(9, 9);
  CompressionTerm term(u0, 0.01);
  for (int t = 0; t < 5; ++t) {
    const Vector c = random_vector(rng, 81, 0.05, 1.0);
    const Vector u = term.reconstruct(c);
    const Vector cu0 = c.cwiseProduct(u0.pixels);
    CHECK((term.apply_system(c, u) - cu0).norm() <= 1e-9 * cu0.norm());
  }
}

TEST_CASE("compression gradient matches finite differences") {
  NoiseSource rng(6);
  CompressionTerm term(make_smooth_scene(6, 6), 0.01);
  for (int p = 0; p < 10; ++p) CHECK(fd_error(term, random_vector(rng, 36, 0.05, 1.0)) <= 1e-5);
}

TEST_CASE("reduced gradient zeroes entries on the box boundary") {
  const Problem p = make_compression_problem(make_smooth_scene(3, 1), 0.01, 1.5);
  Vector c(3);
  c << 0.0, 0.7, 1.5;
  Vector g(3);
  g << 1.0, 2.0, 3.0;
  const Vector r = p.reduced_gradient(c, g);
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 2.0);
  CHECK(r[2] == 0.0);

  auto blur = std::make_shared<const ConvOperator>(2, 2, delta_kernel());
  const Problem tv = make_cauchy_problem(blur, ImageGrid(2, 2, Vector::Constant(4, 0.5)), 0.02, 0.35);
  CHECK(tv.reduced_gradient(Vector::Zero(4), Vector::Ones(4)).norm() == 0.0);
  CHECK((tv.reduced_gradient(Vector::Constant(4, 0.3), Vector::Ones(4)) - Vector::Ones(4)).norm() == 0.0);
}

TEST_CASE("problem value is infinite outside the feasible set") {
  const Problem toy = make_toy1d_problem();
  CHECK(toy.value(scalar(1.0)) == doctest::Approx(1.0));
  CHECK(toy.value(scalar(10.0)) == doctest::Approx(2.0 / 11.0));
  CHECK(toy.value(scalar(11.0)) == std::numeric_limits<double>::infinity());
  CHECK_FALSE(toy.in_domain(scalar(-0.5)));
}

TEST_CASE("problem factories check image sizes") {
  auto blur = std::make_shared<const ConvOperator>(4, 4, delta_kernel());
  CHECK_THROWS_AS(make_cauchy_problem(blur, ImageGrid(3, 4), 0.02, 0.35), DimensionMismatch);
  CHECK_THROWS_AS(make_gaussian_sd_problem(blur, ImageGrid(4, 3), Vector::Ones(12), Vector::Ones(12), 0.03),
                  DimensionMismatch);
}
