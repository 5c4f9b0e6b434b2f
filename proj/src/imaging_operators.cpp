#include "vmilan/imaging_operators.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <string>

#include "vmilan/parallel.hpp"

namespace vmilan {

namespace {

// fftw planner calls are not thread-safe.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

Index wrap(Index i, Index n) {
  i %= n;
  return i < 0 ? i + n : i;
}

template <typename T>
struct FftwDeleter {
  void operator()(T* p) const { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T, FftwDeleter<T>>;

template <typename T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  return FftwBuffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * n)));
}

}  // namespace

Kernel gaussian_kernel(int side, double sigma) {
  if (side < 1 || side % 2 == 0) throw std::invalid_argument("kernel side must be odd and positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian sigma must be positive");
  Kernel k;
  k.side = side;
  k.weights.resize(static_cast<std::size_t>(side * side));
  const int h = side / 2;
  double total = 0.0;
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const double dr = r - h;
      const double dc = c - h;
      const double w = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
      k.weights[static_cast<std::size_t>(r * side + c)] = w;
      total += w;
    }
  }
  for (double& w : k.weights) w /= total;
  return k;
}

Kernel delta_kernel() { return Kernel{1, {1.0}}; }

struct ConvOperator::FftPlan {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  Index spectrum_size = 0;
  std::vector<std::complex<double>> kernel_spectrum;

  ~FftPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

ConvOperator::ConvOperator(Index width, Index height, Kernel kernel, Method method)
    : width_(width), height_(height), kernel_(std::move(kernel)) {
  if (width_ < 1 || height_ < 1) throw DimensionMismatch("convolution grid must be non-empty");
  if (kernel_.side < 1 || kernel_.side % 2 == 0 ||
      kernel_.weights.size() != static_cast<std::size_t>(kernel_.side * kernel_.side)) {
    throw std::invalid_argument("convolution kernel must be square with odd side");
  }
  const bool use_fft =
      method == Method::kFft ||
      (method == Method::kAuto && width_ >= kFftThreshold && height_ >= kFftThreshold);
  if (!use_fft) return;

  fft_ = std::make_unique<FftPlan>();
  const Index n = width_ * height_;
  const Index half = width_ / 2 + 1;
  fft_->spectrum_size = height_ * half;
  auto real = fftw_buffer<double>(static_cast<std::size_t>(n));
  auto spec = fftw_buffer<fftw_complex>(static_cast<std::size_t>(fft_->spectrum_size));
  {
    std::lock_guard lock(fftw_planner_mutex());
    fft_->forward = fftw_plan_dft_r2c_2d(static_cast<int>(height_), static_cast<int>(width_),
                                         real.get(), spec.get(), FFTW_ESTIMATE);
    fft_->backward = fftw_plan_dft_c2r_2d(static_cast<int>(height_), static_cast<int>(width_),
                                          spec.get(), real.get(), FFTW_ESTIMATE);
  }

  // Kernel centred at the origin of the periodic grid.
  std::fill(real.get(), real.get() + n, 0.0);
  const int h = kernel_.side / 2;
  for (int p = 0; p < kernel_.side; ++p) {
    for (int q = 0; q < kernel_.side; ++q) {
      const Index r = wrap(p - h, height_);
      const Index c = wrap(q - h, width_);
      real.get()[r * width_ + c] += kernel_.at(p, q);
    }
  }
  fftw_execute_dft_r2c(fft_->forward, real.get(), spec.get());
  fft_->kernel_spectrum.resize(static_cast<std::size_t>(fft_->spectrum_size));
  for (Index i = 0; i < fft_->spectrum_size; ++i) {
    fft_->kernel_spectrum[static_cast<std::size_t>(i)] = {spec.get()[i][0], spec.get()[i][1]};
  }
}

ConvOperator::~ConvOperator() = default;

void ConvOperator::direct(const Vector& in, Vector& out, bool flipped) const {
  out.resize(in.size());
  const int h = kernel_.side / 2;
  const int side = kernel_.side;
  parallel_for(height_, [&](Index row_begin, Index row_end) {
    for (Index r = row_begin; r < row_end; ++r) {
      for (Index c = 0; c < width_; ++c) {
        double acc = 0.0;
        for (int p = 0; p < side; ++p) {
          const Index rr = flipped ? wrap(r + p - h, height_) : wrap(r - p + h, height_);
          for (int q = 0; q < side; ++q) {
            const Index cc = flipped ? wrap(c + q - h, width_) : wrap(c - q + h, width_);
            acc += kernel_.at(p, q) * in[rr * width_ + cc];
          }
        }
        out[r * width_ + c] = acc;
      }
    }
  });
}

void ConvOperator::apply(const Vector& in, Vector& out) const {
  check_apply_input(in);
  if (!fft_) {
    direct(in, out, false);
    return;
  }
  const Index n = width_ * height_;
  auto real = fftw_buffer<double>(static_cast<std::size_t>(n));
  auto spec = fftw_buffer<fftw_complex>(static_cast<std::size_t>(fft_->spectrum_size));
  std::copy(in.data(), in.data() + n, real.get());
  fftw_execute_dft_r2c(fft_->forward, real.get(), spec.get());
  for (Index i = 0; i < fft_->spectrum_size; ++i) {
    const std::complex<double> v{spec.get()[i][0], spec.get()[i][1]};
    const std::complex<double> w = v * fft_->kernel_spectrum[static_cast<std::size_t>(i)];
    spec.get()[i][0] = w.real();
    spec.get()[i][1] = w.imag();
  }
  fftw_execute_dft_c2r(fft_->backward, spec.get(), real.get());
  out.resize(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (Index i = 0; i < n; ++i) out[i] = real.get()[i] * scale;
}

void ConvOperator::adjoint(const Vector& in, Vector& out) const {
  check_adjoint_input(in);
  if (!fft_) {
    direct(in, out, true);
    return;
  }
  const Index n = width_ * height_;
  auto real = fftw_buffer<double>(static_cast<std::size_t>(n));
  auto spec = fftw_buffer<fftw_complex>(static_cast<std::size_t>(fft_->spectrum_size));
  std::copy(in.data(), in.data() + n, real.get());
  fftw_execute_dft_r2c(fft_->forward, real.get(), spec.get());
  for (Index i = 0; i < fft_->spectrum_size; ++i) {
    const std::complex<double> v{spec.get()[i][0], spec.get()[i][1]};
    const std::complex<double> w = v * std::conj(fft_->kernel_spectrum[static_cast<std::size_t>(i)]);
    spec.get()[i][0] = w.real();
    spec.get()[i][1] = w.imag();
  }
  fftw_execute_dft_c2r(fft_->backward, spec.get(), real.get());
  out.resize(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (Index i = 0; i < n; ++i) out[i] = real.get()[i] * scale;
}

void DiscreteGradient::apply(const Vector& in, Vector& out) const {
  check_apply_input(in);
  out.resize(2 * width_ * height_);
  parallel_for(height_, [&](Index row_begin, Index row_end) {
    for (Index r = row_begin; r < row_end; ++r) {
      for (Index c = 0; c < width_; ++c) {
        const Index i = r * width_ + c;
        out[2 * i] = r + 1 < height_ ? in[i + width_] - in[i] : 0.0;
        out[2 * i + 1] = c + 1 < width_ ? in[i + 1] - in[i] : 0.0;
      }
    }
  });
}

void DiscreteGradient::adjoint(const Vector& in, Vector& out) const {
  check_adjoint_input(in);
  out.resize(width_ * height_);
  parallel_for(height_, [&](Index row_begin, Index row_end) {
    for (Index r = row_begin; r < row_end; ++r) {
      for (Index c = 0; c < width_; ++c) {
        const Index i = r * width_ + c;
        double acc = 0.0;
        if (r + 1 < height_) acc -= in[2 * i];
        if (r > 0) acc += in[2 * (i - width_)];
        if (c + 1 < width_) acc -= in[2 * i + 1];
        if (c > 0) acc += in[2 * (i - 1) + 1];
        out[i] = acc;
      }
    }
  });
}

void Laplacian::apply(const Vector& in, Vector& out) const {
  check_apply_input(in);
  out.resize(width_ * height_);
  parallel_for(height_, [&](Index row_begin, Index row_end) {
    for (Index r = row_begin; r < row_end; ++r) {
      for (Index c = 0; c < width_; ++c) {
        const Index i = r * width_ + c;
        double acc = 0.0;
        if (r > 0) acc += in[i - width_] - in[i];
        if (r + 1 < height_) acc += in[i + width_] - in[i];
        if (c > 0) acc += in[i - 1] - in[i];
        if (c + 1 < width_) acc += in[i + 1] - in[i];
        out[i] = acc;
      }
    }
  });
}

std::shared_ptr<const StackedOperator> make_tv_operator(Index width, Index height) {
  std::vector<std::shared_ptr<const LinearOperator>> blocks{
      std::make_shared<DiscreteGradient>(width, height),
      std::make_shared<IdentityOperator>(width * height)};
  return std::make_shared<StackedOperator>(std::move(blocks));
}

}  // namespace vmilan
