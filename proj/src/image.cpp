#include "vmilan/image.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace vmilan {

ImageGrid::ImageGrid(Index w, Index h, Vector data) : width(w), height(h), pixels(std::move(data)) {
  if (pixels.size() != w * h) throw DimensionMismatch("image data does not match width*height");
}

namespace {

// Reads the next whitespace-separated header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string token;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string ignored;
      std::getline(in, ignored);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(ch);
  }
  return token;
}

Index parse_dimension(const std::string& token, const std::filesystem::path& path) {
  try {
    const long long v = std::stoll(token);
    if (v <= 0) throw std::out_of_range("non-positive");
    return static_cast<Index>(v);
  } catch (const std::exception&) {
    throw IoError("malformed header in " + path.string());
  }
}

}  // namespace

ImageGrid read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (next_token(in) != "P5") throw IoError(path.string() + " is not a binary PGM (P5)");
  const Index width = parse_dimension(next_token(in), path);
  const Index height = parse_dimension(next_token(in), path);
  const Index maxval = parse_dimension(next_token(in), path);
  if (maxval > 65535) throw IoError("PGM maxval above 65535 in " + path.string());
  // next_token consumed the single whitespace byte after maxval.

  ImageGrid image(width, height);
  const bool wide = maxval > 255;
  const std::size_t bytes = static_cast<std::size_t>(width * height) * (wide ? 2 : 1);
  std::vector<unsigned char> raw(bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes) throw IoError("truncated PGM " + path.string());
  const double scale = 1.0 / static_cast<double>(maxval);
  for (Index i = 0; i < image.size(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    const unsigned value = wide ? (static_cast<unsigned>(raw[2 * u]) << 8) | raw[2 * u + 1] : raw[u];
    image.pixels[i] = value * scale;
  }
  return image;
}

void write_pgm(const std::filesystem::path& path, const ImageGrid& image, int bits) {
  if (bits != 8 && bits != 16) throw std::invalid_argument("PGM depth must be 8 or 16 bits");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const unsigned maxval = bits == 8 ? 255u : 65535u;
  out << "P5\n" << image.width << ' ' << image.height << '\n' << maxval << '\n';
  std::vector<unsigned char> raw;
  raw.reserve(static_cast<std::size_t>(image.size()) * (bits / 8));
  for (Index i = 0; i < image.size(); ++i) {
    const double v = std::clamp(image.pixels[i], 0.0, 1.0);
    const auto q = static_cast<unsigned>(std::lround(v * maxval));
    if (bits == 16) raw.push_back(static_cast<unsigned char>(q >> 8));
    raw.push_back(static_cast<unsigned char>(q & 0xffu));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

ImageGrid read_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  std::istringstream fields(header);
  std::string magic;
  long long width = 0, height = 0;
  fields >> magic >> width >> height;
  if (magic != "VMF64" || width <= 0 || height <= 0) {
    throw IoError(path.string() + " is not a VMF64 raw image");
  }
  ImageGrid image(static_cast<Index>(width), static_cast<Index>(height));
  for (Index i = 0; i < image.size(); ++i) {
    std::uint64_t bitsle = 0;
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (in.gcount() != 8) throw IoError("truncated raw image " + path.string());
    for (int j = 7; j >= 0; --j) bitsle = (bitsle << 8) | b[j];
    image.pixels[i] = std::bit_cast<double>(bitsle);
  }
  return image;
}

void write_raw(const std::filesystem::path& path, const ImageGrid& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "VMF64 " << image.width << ' ' << image.height << '\n';
  for (Index i = 0; i < image.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(image.pixels[i]);
    unsigned char b[8];
    for (int j = 0; j < 8; ++j) {
      b[j] = static_cast<unsigned char>(bits & 0xffu);
      bits >>= 8;
    }
    out.write(reinterpret_cast<const char*>(b), 8);
  }
  if (!out) throw IoError("write failed for " + path.string());
}

ImageGrid read_image(const std::filesystem::path& path) {
  if (path.extension() == ".f64") return read_raw(path);
  if (path.extension() == ".pgm") return read_pgm(path);
  throw IoError("unsupported image extension: " + path.string());
}

void write_image(const std::filesystem::path& path, const ImageGrid& image) {
  if (path.extension() == ".f64") return write_raw(path, image);
  if (path.extension() == ".pgm") return write_pgm(path, image, 16);
  throw IoError("unsupported image extension: " + path.string());
}

}  // namespace vmilan
