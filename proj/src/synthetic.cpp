#include "vmilan/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vmilan {

double NoiseSource::uniform() {
  // 53 random bits; zero is rejected so the result lies in (0, 1).
  for (;;) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double NoiseSource::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  has_spare_ = true;
  return r * std::cos(angle);
}

double NoiseSource::cauchy(double gamma) {
  return gamma * std::tan(std::numbers::pi * (uniform() - 0.5));
}

ImageGrid make_phantom(Index width, Index height) {
  ImageGrid img(width, height);
  const double w = static_cast<double>(width);
  const double h = static_cast<double>(height);
  for (Index r = 0; r < height; ++r) {
    for (Index c = 0; c < width; ++c) {
      const double x = (c + 0.5) / w;
      const double y = (r + 0.5) / h;
      double v = 0.15 + 0.1 * std::sin(2.0 * std::numbers::pi * x) * std::cos(std::numbers::pi * y);
      if (x > 0.1 && x < 0.45 && y > 0.15 && y < 0.4) v = 0.8;
      if (x > 0.6 && x < 0.9 && y > 0.1 && y < 0.3) v = 0.55;
      const double dx = x - 0.35;
      const double dy = y - 0.68;
      if (dx * dx + dy * dy < 0.04) v = 0.95;
      if (x > 0.6 && x < 0.9 && y > 0.5 && y < 0.9) v = 0.2 + 0.7 * (x - 0.6) / 0.3;
      img.at(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

ImageGrid make_smooth_scene(Index width, Index height) {
  ImageGrid img(width, height);
  const double pi = std::numbers::pi;
  auto blob = [](double dx, double dy, double spread) {
    return std::exp(-(dx * dx + dy * dy) / spread);
  };
  for (Index r = 0; r < height; ++r) {
    for (Index c = 0; c < width; ++c) {
      const double x = (c + 0.5) / static_cast<double>(width);
      const double y = (r + 0.5) / static_cast<double>(height);
      const double v = 0.45 + 0.25 * std::sin(2.0 * pi * x + 0.5) * std::cos(1.5 * pi * y) +
                       0.3 * blob(x - 0.6, y - 0.4, 0.02) - 0.2 * blob(x - 0.25, y - 0.75, 0.01);
      img.at(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

ImageGrid degrade_synthetic(const ImageGrid& x_true, const LinearOperator& H, const DegradeSpec& spec) {
  if (H.cols() != x_true.size() || H.rows() != x_true.size()) {
    throw DimensionMismatch("degrade: operator does not match the image");
  }
  const Vector hx = H.apply(x_true.pixels);
  NoiseSource noise(spec.seed);
  Vector g(hx.size());
  for (Index i = 0; i < g.size(); ++i) {
    double sample = 0.0;
    if (spec.model == NoiseModel::kGaussianSd) {
      const double variance = spec.a * hx[i] + spec.b;
      if (!(variance >= 0.0)) throw DomainError("degrade: negative noise variance");
      sample = std::sqrt(variance) * noise.normal();
    } else {
      sample = noise.cauchy(spec.gamma_noise);
    }
    g[i] = hx[i] + spec.noise_scale * sample;
    if (spec.clip) g[i] = std::clamp(g[i], 0.0, 1.0);
  }
  return ImageGrid(x_true.width, x_true.height, std::move(g));
}

}  // namespace vmilan
