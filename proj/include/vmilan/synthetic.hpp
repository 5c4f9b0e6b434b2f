#pragma once

#include <cstdint>
#include <random>

#include "vmilan/image.hpp"
#include "vmilan/linear_operator.hpp"

namespace vmilan {

/// Portable uniform/normal/Cauchy draws on top of std::mt19937_64, so seeded
/// datasets do not depend on the standard library's distribution code.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in (0, 1).
  double uniform();
  /// Standard normal (Box-Muller).
  double normal();
  /// Cauchy with location 0 and scale gamma, by inverse CDF: gamma tan(pi (u - 1/2)).
  double cauchy(double gamma);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Deterministic piecewise-smooth test object in [0, 1]: smooth background,
/// rectangles, a disc and a ramp.
ImageGrid make_phantom(Index width, Index height);

/// Deterministic smooth scene in [0, 1]: a slow oscillation with one bright and
/// one dark blob. Used for the inpainting-mask problem when no image is given.
ImageGrid make_smooth_scene(Index width, Index height);

enum class NoiseModel { kGaussianSd, kCauchy };

struct DegradeSpec {
  NoiseModel model = NoiseModel::kCauchy;
  // gaussian_sd: g = Hx + sqrt(a Hx + b) w
  double a = 1.0;
  double b = 1.0;
  // cauchy: g = Hx + gamma tan(pi (u - 1/2))
  double gamma_noise = 0.02;
  /// Multiplies the noise sample; 0 yields g = Hx exactly.
  double noise_scale = 1.0;
  /// Clamp the observation into [0, 1], as stored in an image file.
  bool clip = false;
  std::uint64_t seed = 0;
};

ImageGrid degrade_synthetic(const ImageGrid& x_true, const LinearOperator& H, const DegradeSpec& spec);

}  // namespace vmilan
