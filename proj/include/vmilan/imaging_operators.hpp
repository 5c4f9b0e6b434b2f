#pragma once

#include <memory>
#include <vector>

#include "vmilan/image.hpp"
#include "vmilan/linear_operator.hpp"

namespace vmilan {

/// Square convolution kernel with odd side length, centered at (side/2, side/2).
struct Kernel {
  int side = 1;
  std::vector<double> weights;  // row-major, side*side entries

  double at(int r, int c) const { return weights[r * side + c]; }
};

/// Truncated Gaussian of the given side length, normalized to unit sum.
Kernel gaussian_kernel(int side, double sigma);
/// Unit impulse (identity convolution).
Kernel delta_kernel();

/// 2D convolution on a width x height grid with periodic boundary.
///
/// Grids with both sides >= kFftThreshold are applied in the frequency domain
/// (FFTW); smaller grids use the direct sum. The adjoint is correlation with
/// the same kernel (convolution with the flipped kernel).
class ConvOperator final : public LinearOperator {
 public:
  enum class Method { kAuto, kDirect, kFft };
  static constexpr Index kFftThreshold = 64;

  ConvOperator(Index width, Index height, Kernel kernel, Method method = Method::kAuto);
  ~ConvOperator() override;
  ConvOperator(const ConvOperator&) = delete;
  ConvOperator& operator=(const ConvOperator&) = delete;

  Index rows() const override { return width_ * height_; }
  Index cols() const override { return width_ * height_; }
  void apply(const Vector& in, Vector& out) const override;
  void adjoint(const Vector& in, Vector& out) const override;
  using LinearOperator::adjoint;
  using LinearOperator::apply;

  Index width() const { return width_; }
  Index height() const { return height_; }
  const Kernel& kernel() const { return kernel_; }
  bool uses_fft() const { return fft_ != nullptr; }

 private:
  void direct(const Vector& in, Vector& out, bool flipped) const;

  struct FftPlan;
  Index width_;
  Index height_;
  Kernel kernel_;
  std::unique_ptr<FftPlan> fft_;
};

/// Per-pixel forward differences with Neumann boundary. Output has 2n entries,
/// interleaved per pixel: [2i] = vertical difference x(r+1,c) - x(r,c),
/// [2i+1] = horizontal difference x(r,c+1) - x(r,c); the difference across the
/// last row/column is zero.
class DiscreteGradient final : public LinearOperator {
 public:
  DiscreteGradient(Index width, Index height) : width_(width), height_(height) {}

  Index rows() const override { return 2 * width_ * height_; }
  Index cols() const override { return width_ * height_; }
  void apply(const Vector& in, Vector& out) const override;
  /// Negative divergence.
  void adjoint(const Vector& in, Vector& out) const override;
  using LinearOperator::adjoint;
  using LinearOperator::apply;

  Index width() const { return width_; }
  Index height() const { return height_; }

 private:
  Index width_;
  Index height_;
};

/// 5-point Laplacian with Neumann boundary: (Lx)_i = sum over in-grid
/// neighbors j of (x_j - x_i). Symmetric negative semidefinite.
class Laplacian final : public LinearOperator {
 public:
  Laplacian(Index width, Index height) : width_(width), height_(height) {}

  Index rows() const override { return width_ * height_; }
  Index cols() const override { return width_ * height_; }
  void apply(const Vector& in, Vector& out) const override;
  void adjoint(const Vector& in, Vector& out) const override { apply(in, out); }
  using LinearOperator::adjoint;
  using LinearOperator::apply;

  Index width() const { return width_; }
  Index height() const { return height_; }

 private:
  Index width_;
  Index height_;
};

/// Stacked [gradient; identity] operator used by TV + nonnegativity (m = 3n).
std::shared_ptr<const StackedOperator> make_tv_operator(Index width, Index height);

}  // namespace vmilan
