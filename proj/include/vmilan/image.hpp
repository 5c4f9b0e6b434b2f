#pragma once

#include <filesystem>
#include <string>

#include "vmilan/types.hpp"

namespace vmilan {

/// Grayscale image stored row-major; pixel (row, col) lives at row * width + col.
struct ImageGrid {
  Index width = 0;
  Index height = 0;
  Vector pixels;

  ImageGrid() = default;
  ImageGrid(Index w, Index h) : width(w), height(h), pixels(Vector::Zero(w * h)) {}
  ImageGrid(Index w, Index h, Vector data);

  Index size() const { return width * height; }
  double& at(Index row, Index col) { return pixels[row * width + col]; }
  double at(Index row, Index col) const { return pixels[row * width + col]; }
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Loads a binary (P5) PGM with maxval up to 65535; values are scaled to [0, 1].
ImageGrid read_pgm(const std::filesystem::path& path);

/// Writes a binary PGM with 8 or 16 bits per sample. Values are clamped to
/// [0, 1] and rounded to the nearest quantization level.
void write_pgm(const std::filesystem::path& path, const ImageGrid& image, int bits = 16);

/// Raw float64 dump: an ASCII line "VMF64 <width> <height>\n" followed by
/// width*height little-endian doubles. Bit-exact round trip.
ImageGrid read_raw(const std::filesystem::path& path);
void write_raw(const std::filesystem::path& path, const ImageGrid& image);

/// Dispatches on extension: ".pgm" or ".f64".
ImageGrid read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const ImageGrid& image);

}  // namespace vmilan
