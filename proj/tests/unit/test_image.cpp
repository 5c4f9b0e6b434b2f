#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "support/instances.hpp"
#include "vmilan/image.hpp"

using namespace vmilan;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "vmilan_unit_image";
  fs::create_directories(dir);
  return dir;
}

ImageGrid random_image(Index w, Index h, std::uint64_t seed) {
  NoiseSource rng(seed);
  return ImageGrid(w, h, testing::random_vector(rng, w * h));
}

}  // namespace

TEST_CASE("raw float dump round-trips bit for bit") {
  ImageGrid img = random_image(7, 5, 1);
  img.pixels[3] = -0.25;  // raw files are not clamped
  img.pixels[4] = 1.75;
  const fs::path p = scratch_dir() / "roundtrip.f64";
  write_raw(p, img);
  const ImageGrid back = read_raw(p);
  CHECK(back.width == 7);
  CHECK(back.height == 5);
  CHECK((back.pixels.array() == img.pixels.array()).all());
  CHECK((read_image(p).pixels.array() == img.pixels.array()).all());
}

TEST_CASE("16-bit PGM round-trip is exact up to quantization") {
  const ImageGrid img = random_image(9, 4, 2);
  const fs::path p = scratch_dir() / "roundtrip16.pgm";
  write_pgm(p, img, 16);
  const ImageGrid back = read_pgm(p);
  CHECK(back.width == 9);
  CHECK(back.height == 4);
  CHECK((back.pixels - img.pixels).lpNorm<Eigen::Infinity>() <= 0.5 / 65535.0 + 1e-15);
  // A quantized image survives a second trip unchanged.
  write_pgm(p, back, 16);
  CHECK((read_pgm(p).pixels.array() == back.pixels.array()).all());
}

TEST_CASE("8-bit PGM quantizes to 1/255 and clamps") {
  ImageGrid img = random_image(3, 3, 3);
  img.pixels[0] = -1.0;
  img.pixels[1] = 2.0;
  const fs::path p = scratch_dir() / "roundtrip8.pgm";
  write_pgm(p, img, 8);
  const ImageGrid back = read_pgm(p);
  CHECK(back.pixels[0] == 0.0);
  CHECK(back.pixels[1] == 1.0);
  for (Index i = 2; i < 9; ++i) CHECK(std::abs(back.pixels[i] - img.pixels[i]) <= 0.5 / 255.0 + 1e-15);
  CHECK(fs::file_size(p) == 9 + std::string("P5\n3 3\n255\n").size());
}

TEST_CASE("PGM reader accepts header comments") {
  const fs::path p = scratch_dir() / "comment.pgm";
  {
    std::ofstream out(p, std::ios::binary);
    out << "P5\n# a comment\n2 1\n# another\n255\n";
    out.put(static_cast<char>(0));
    out.put(static_cast<char>(255));
  }
  const ImageGrid img = read_pgm(p);
  CHECK(img.width == 2);
  CHECK(img.pixels[0] == 0.0);
  CHECK(img.pixels[1] == 1.0);
}

TEST_CASE("image I/O errors") {
  CHECK_THROWS_AS(read_image(scratch_dir() / "missing.pgm"), IoError);
  CHECK_THROWS_AS(read_image(scratch_dir() / "file.png"), IoError);
  const fs::path bad = scratch_dir() / "bad.pgm";
  {
    std::ofstream out(bad, std::ios::binary);
    out << "P2\n2 2\n255\n0 0 0 0\n";
  }
  CHECK_THROWS_AS(read_pgm(bad), IoError);
  const fs::path trunc = scratch_dir() / "trunc.pgm";
  {
    std::ofstream out(trunc, std::ios::binary);
    out << "P5\n4 4\n255\n";
    out.put('a');
  }
  CHECK_THROWS_AS(read_pgm(trunc), IoError);
  CHECK_THROWS_AS(ImageGrid(3, 3, Vector::Zero(8)), DimensionMismatch);
  CHECK_THROWS_AS(write_pgm(scratch_dir() / "x.pgm", ImageGrid(2, 2), 12), std::invalid_argument);
}
