#pragma once

// Seeded problem instances shared by the unit tests and the acceptance binary.

#include <cmath>
#include <memory>

#include "vmilan/diagnostics.hpp"
#include "vmilan/imaging_operators.hpp"
#include "vmilan/problems.hpp"
#include "vmilan/synthetic.hpp"

namespace vmilan::testing {

inline Vector random_vector(NoiseSource& rng, Index n, double lo = 0.0, double hi = 1.0) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = lo + (hi - lo) * rng.uniform();
  return v;
}

struct CauchyInstance {
  ImageGrid truth;
  ImageGrid observed;
  std::shared_ptr<const ConvOperator> blur;
  Problem problem;
  Vector x0;
};

/// Phantom blurred by a 9x9 Gaussian (sigma 1), Cauchy noise gamma = 0.02,
/// observation clipped into [0, 1]; lambda = 0.35 and unit TV weight.
inline CauchyInstance make_cauchy_instance(Index side, std::uint64_t seed) {
  ImageGrid truth = make_phantom(side, side);
  auto blur = std::make_shared<const ConvOperator>(side, side, gaussian_kernel(9, 1.0));
  DegradeSpec spec;
  spec.model = NoiseModel::kCauchy;
  spec.gamma_noise = 0.02;
  spec.clip = true;
  spec.seed = seed;
  ImageGrid observed = degrade_synthetic(truth, *blur, spec);
  Problem problem = make_cauchy_problem(blur, observed, 0.02, 0.35, 1.0);
  Vector x0 = observed.pixels;
  return CauchyInstance{std::move(truth), std::move(observed), blur, std::move(problem),
                        std::move(x0)};
}

/// Inpainting-mask instance: smooth scene, lambda = 0.01, box [0, 1.5].
inline constexpr double kCompressionLambda = 0.01;
inline Problem make_compression_instance(Index side) {
  return make_compression_problem(make_smooth_scene(side, side), kCompressionLambda, 1.5);
}

}  // namespace vmilan::testing
