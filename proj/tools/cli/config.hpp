#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "vmilan/solver.hpp"
#include "vmilan/synthetic.hpp"

namespace vmilan::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ProblemKind { kGaussianSd, kCauchy, kCompression, kToy1d };

std::string to_string(ProblemKind kind);

struct ProblemParams {
  ProblemKind kind = ProblemKind::kCauchy;
  int kernel_size = 9;
  double kernel_sigma = 1.0;
  double gamma_noise = 0.02;  // cauchy
  double lambda = 0.35;       // cauchy data weight; compression sparsity weight
  double rho = 1.0;           // TV weight
  double a = 1.0;             // gaussian_sd
  double b = 1.0;
  double box_upper = 1.5;     // compression
};

enum class Scene { kPhantom, kSmooth };

struct DataParams {
  std::optional<std::filesystem::path> observed;
  std::optional<std::filesystem::path> truth;
  std::optional<std::filesystem::path> image;  // compression u0
  // Synthetic fallback when no files are given.
  int width = 64;
  int height = 64;
  Scene scene = Scene::kPhantom;
  bool clip = true;
  double noise_scale = 1.0;
  /// Starting point: empty means the default for the problem (observed image
  /// for deblurring, all-ones mask, 0 for toy1d); otherwise a constant.
  std::optional<double> x0;
};

struct OutputParams {
  std::optional<std::filesystem::path> reconstruction;
  std::optional<std::filesystem::path> trace;
  std::optional<std::filesystem::path> summary;
  // Written by `degrade`; the truth image only when it was synthesized.
  std::optional<std::filesystem::path> observed;
  std::optional<std::filesystem::path> truth;
};

struct ExperimentConfig {
  ProblemParams problem;
  DataParams data;
  SolverConfig solver;
  std::string metric = "identity";
  std::string steplength = "bb";
  int window = 3;
  OutputParams output;
  std::uint64_t seed = 0;
  bool audit = false;
};

/// Parses a YAML experiment file. Relative paths are resolved against the
/// file's directory. Unknown keys, wrong types and out-of-range values raise
/// ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

}  // namespace vmilan::cli
