#include <doctest.h>

#include <cmath>

#include "support/instances.hpp"
#include "vmilan/imaging_operators.hpp"
#include "vmilan/linear_operator.hpp"
#include "vmilan/parallel.hpp"

using namespace vmilan;
using vmilan::testing::random_vector;

namespace {

double adjoint_residual(const LinearOperator& op, NoiseSource& rng) {
  const Vector x = random_vector(rng, op.cols(), -1.0, 1.0);
  const Vector y = random_vector(rng, op.rows(), -1.0, 1.0);
  const double lhs = op.apply(x).dot(y);
  const double rhs = x.dot(op.adjoint(y));
  return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
}

}  // namespace

TEST_CASE("adjoint identities hold for every operator") {
  NoiseSource rng(1);
  ConvOperator conv_direct(13, 9, gaussian_kernel(5, 1.2));
  ConvOperator conv_fft(64, 64, gaussian_kernel(9, 1.0));
  DiscreteGradient grad(11, 7);
  Laplacian lap(11, 7);
  IdentityOperator id(5);
  auto tv = make_tv_operator(6, 5);
  CHECK_FALSE(conv_direct.uses_fft());
  CHECK(conv_fft.uses_fft());
  for (const LinearOperator* op :
       {static_cast<const LinearOperator*>(&conv_direct), static_cast<const LinearOperator*>(&conv_fft),
        static_cast<const LinearOperator*>(&grad), static_cast<const LinearOperator*>(&lap),
        static_cast<const LinearOperator*>(&id), static_cast<const LinearOperator*>(tv.get())}) {
    for (int t = 0; t < 20; ++t) CHECK(adjoint_residual(*op, rng) <= 1e-10);
  }
}

TEST_CASE("convolution with a delta kernel is the identity") {
  NoiseSource rng(2);
  ConvOperator conv(7, 5, delta_kernel());
  const Vector x = random_vector(rng, 35);
  CHECK((conv.apply(x) - x).norm() == 0.0);
  CHECK((conv.adjoint(x) - x).norm() == 0.0);
}

TEST_CASE("normalized kernel keeps a constant image constant") {
  ConvOperator conv(10, 8, gaussian_kernel(7, 1.0));
  const Vector c = Vector::Constant(80, 0.3);
  CHECK((conv.apply(c) - c).lpNorm<Eigen::Infinity>() < 1e-15);
  ConvOperator big(64, 64, gaussian_kernel(9, 1.0));
  const Vector c2 = Vector::Constant(64 * 64, 0.7);
  CHECK((big.apply(c2) - c2).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("gaussian kernel sums to one and is symmetric") {
  const Kernel k = gaussian_kernel(9, 1.0);
  double sum = 0.0;
  for (double w : k.weights) sum += w;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(k.at(0, 3) == k.at(3, 0));
  CHECK(k.at(4, 4) > k.at(4, 5));
  CHECK_THROWS_AS(gaussian_kernel(4, 1.0), std::invalid_argument);
}

TEST_CASE("FFT and direct convolution agree at 64x64") {
  NoiseSource rng(3);
  ConvOperator fft(64, 64, gaussian_kernel(9, 1.0), ConvOperator::Method::kFft);
  ConvOperator direct(64, 64, gaussian_kernel(9, 1.0), ConvOperator::Method::kDirect);
  const Vector x = random_vector(rng, 64 * 64);
  CHECK((fft.apply(x) - direct.apply(x)).lpNorm<Eigen::Infinity>() <= 1e-10);
  CHECK((fft.adjoint(x) - direct.adjoint(x)).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("an off-center kernel shifts with periodic wrap") {
  Kernel k;
  k.side = 3;
  k.weights = {0, 0, 0, 0, 0, 1, 0, 0, 0};  // weight at offset (0, +1)
  ConvOperator conv(4, 3, k);
  ImageGrid img(4, 3);
  img.at(1, 0) = 1.0;
  const Vector out = conv.apply(img.pixels);
  // (Hx)(r, c) = sum k(dr, dc) x(r - dr, c - dc); the spike moves one column right.
  CHECK(out[1 * 4 + 1] == 1.0);
  CHECK(out.sum() == 1.0);
  ImageGrid edge(4, 3);
  edge.at(2, 3) = 1.0;
  CHECK(conv.apply(edge.pixels)[2 * 4 + 0] == 1.0);
}

TEST_CASE("discrete gradient of a constant image vanishes; a ramp has unit slope") {
  DiscreteGradient grad(5, 4);
  CHECK(grad.apply(Vector::Constant(20, 2.5)).norm() == 0.0);
  ImageGrid ramp(5, 4);
  for (Index r = 0; r < 4; ++r)
    for (Index c = 0; c < 5; ++c) ramp.at(r, c) = static_cast<double>(c);
  const Vector g = grad.apply(ramp.pixels);
  for (Index r = 0; r < 4; ++r) {
    for (Index c = 0; c < 5; ++c) {
      const Index i = r * 5 + c;
      CHECK(g[2 * i] == 0.0);
      CHECK(g[2 * i + 1] == (c < 4 ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("laplacian stencil") {
  Laplacian lap(5, 5);
  CHECK(lap.apply(Vector::Constant(25, 1.0)).norm() == 0.0);
  ImageGrid spike(5, 5);
  spike.at(2, 2) = 1.0;
  const Vector out = lap.apply(spike.pixels);
  CHECK(out[2 * 5 + 2] == -4.0);
  CHECK(out[1 * 5 + 2] == 1.0);
  CHECK(out[3 * 5 + 2] == 1.0);
  CHECK(out[2 * 5 + 1] == 1.0);
  CHECK(out[2 * 5 + 3] == 1.0);
  CHECK(out.sum() == doctest::Approx(0.0));
  // Corner pixel has two neighbors under the Neumann rule.
  ImageGrid corner(5, 5);
  corner.at(0, 0) = 1.0;
  CHECK(lap.apply(corner.pixels)[0] == -2.0);
}

TEST_CASE("operators reject inputs of the wrong size") {
  DiscreteGradient grad(4, 4);
  CHECK_THROWS_AS(grad.apply(Vector::Zero(15)), DimensionMismatch);
  CHECK_THROWS_AS(grad.adjoint(Vector::Zero(16)), DimensionMismatch);
  ConvOperator conv(4, 4, gaussian_kernel(3, 1.0));
  CHECK_THROWS_AS(conv.apply(Vector::Zero(17)), DimensionMismatch);
}

TEST_CASE("stacked operator concatenates blocks") {
  auto tv = make_tv_operator(3, 2);
  CHECK(tv->rows() == 18);
  CHECK(tv->cols() == 6);
  const Vector x = Vector::LinSpaced(6, 0.0, 5.0);
  const Vector out = tv->apply(x);
  CHECK((out.tail(6) - x).norm() == 0.0);
  CHECK((out.head(12) - DiscreteGradient(3, 2).apply(x)).norm() == 0.0);
}

TEST_CASE("power iteration norm estimate") {
  CHECK(estimate_norm_squared(IdentityOperator(10)) == doctest::Approx(1.0));
  // ||grad||^2 < 8 for the 2D forward-difference operator; the estimate approaches from below.
  const double g = estimate_norm_squared(DiscreteGradient(16, 16), 200);
  CHECK(g <= 8.0);
  CHECK(g > 7.0);
  const double conv = estimate_norm_squared(ConvOperator(16, 16, gaussian_kernel(5, 1.0)));
  CHECK(conv == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("threaded operator loops give identical results") {
  NoiseSource rng(4);
  ConvOperator conv(40, 30, gaussian_kernel(7, 1.0));
  const Vector x = random_vector(rng, 1200);
  set_thread_count(1);
  const Vector one = conv.apply(x);
  set_thread_count(4);
  const Vector four = conv.apply(x);
  set_thread_count(1);
  CHECK((one - four).norm() == 0.0);
}
