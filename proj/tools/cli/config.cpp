#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace vmilan::cli {

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kGaussianSd: return "gaussian_sd";
    case ProblemKind::kCauchy: return "cauchy";
    case ProblemKind::kCompression: return "compression";
    case ProblemKind::kToy1d: return "toy1d";
  }
  return "unknown";
}

namespace {

void reject_unknown(const YAML::Node& node, const std::string& where,
                    const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(where + ": expected a mapping");
  for (const auto& entry : node) {
    const auto key = entry.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
  const YAML::Node value = node[key];
  if (!value) return;
  try {
    out = value.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

void read_path(const YAML::Node& node, const char* key, std::optional<std::filesystem::path>& out,
               const std::filesystem::path& base, const std::string& where) {
  std::string text;
  read(node, key, text, where);
  if (text.empty()) return;
  std::filesystem::path p(text);
  out = p.is_absolute() || base.empty() ? p : base / p;
}

ProblemKind parse_kind(const std::string& s) {
  if (s == "gaussian_sd") return ProblemKind::kGaussianSd;
  if (s == "cauchy") return ProblemKind::kCauchy;
  if (s == "compression") return ProblemKind::kCompression;
  if (s == "toy1d") return ProblemKind::kToy1d;
  throw ConfigError("problem.kind: unknown problem '" + s + "'");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  if (!root || root.IsNull()) throw ConfigError("config is empty");
  reject_unknown(root, "config", {"problem", "data", "solver", "strategy", "output", "seed", "audit"});

  ExperimentConfig cfg;
  if (!root["problem"]) throw ConfigError("config: missing 'problem' section");

  const YAML::Node problem = root["problem"];
  reject_unknown(problem, "problem",
                 {"kind", "kernel_size", "kernel_sigma", "gamma", "lambda", "rho", "a", "b",
                  "box_upper"});
  std::string kind;
  read(problem, "kind", kind, "problem");
  if (kind.empty()) throw ConfigError("problem.kind is required");
  cfg.problem.kind = parse_kind(kind);
  if (cfg.problem.kind == ProblemKind::kCompression) cfg.problem.lambda = 0.01;
  read(problem, "kernel_size", cfg.problem.kernel_size, "problem");
  read(problem, "kernel_sigma", cfg.problem.kernel_sigma, "problem");
  read(problem, "gamma", cfg.problem.gamma_noise, "problem");
  read(problem, "lambda", cfg.problem.lambda, "problem");
  read(problem, "rho", cfg.problem.rho, "problem");
  read(problem, "a", cfg.problem.a, "problem");
  read(problem, "b", cfg.problem.b, "problem");
  read(problem, "box_upper", cfg.problem.box_upper, "problem");
  if (cfg.problem.kernel_size < 1 || cfg.problem.kernel_size % 2 == 0) {
    throw ConfigError("problem.kernel_size must be a positive odd integer");
  }
  if (!(cfg.problem.kernel_sigma > 0.0)) throw ConfigError("problem.kernel_sigma must be positive");
  if (!(cfg.problem.gamma_noise > 0.0)) throw ConfigError("problem.gamma must be positive");
  if (!(cfg.problem.lambda >= 0.0)) throw ConfigError("problem.lambda must be nonnegative");
  if (!(cfg.problem.rho > 0.0)) throw ConfigError("problem.rho must be positive");
  if (!(cfg.problem.a >= 0.0) || !(cfg.problem.b > 0.0)) {
    throw ConfigError("problem: need a >= 0 and b > 0");
  }
  if (!(cfg.problem.box_upper > 0.0)) throw ConfigError("problem.box_upper must be positive");

  if (cfg.problem.kind == ProblemKind::kCompression) cfg.data.scene = Scene::kSmooth;
  if (const YAML::Node data = root["data"]) {
    reject_unknown(data, "data",
                   {"observed", "truth", "image", "width", "height", "scene", "clip", "noise_scale",
                    "x0"});
    read_path(data, "observed", cfg.data.observed, base_dir, "data");
    read_path(data, "truth", cfg.data.truth, base_dir, "data");
    read_path(data, "image", cfg.data.image, base_dir, "data");
    read(data, "width", cfg.data.width, "data");
    read(data, "height", cfg.data.height, "data");
    std::string scene = cfg.data.scene == Scene::kSmooth ? "smooth" : "phantom";
    read(data, "scene", scene, "data");
    if (scene == "phantom") {
      cfg.data.scene = Scene::kPhantom;
    } else if (scene == "smooth") {
      cfg.data.scene = Scene::kSmooth;
    } else {
      throw ConfigError("data.scene must be 'phantom' or 'smooth'");
    }
    read(data, "clip", cfg.data.clip, "data");
    read(data, "noise_scale", cfg.data.noise_scale, "data");
    if (data["x0"]) {
      double x0 = 0.0;
      read(data, "x0", x0, "data");
      cfg.data.x0 = x0;
    }
    if (cfg.data.width < 1 || cfg.data.height < 1) throw ConfigError("data: width/height must be >= 1");
    if (!(cfg.data.noise_scale >= 0.0)) throw ConfigError("data.noise_scale must be nonnegative");
  }

  if (const YAML::Node solver = root["solver"]) {
    reject_unknown(solver, "solver",
                   {"alpha_min", "alpha_max", "mu", "delta", "beta", "gamma", "tau",
                    "max_outer_iters", "max_backtracks", "stop_tol", "inner_limit", "warm_start",
                    "accelerated", "fista_a"});
    SolverConfig& s = cfg.solver;
    read(solver, "alpha_min", s.alpha_min, "solver");
    read(solver, "alpha_max", s.alpha_max, "solver");
    read(solver, "mu", s.mu, "solver");
    read(solver, "delta", s.delta, "solver");
    read(solver, "beta", s.beta, "solver");
    read(solver, "gamma", s.gamma, "solver");
    read(solver, "tau", s.tau, "solver");
    read(solver, "max_outer_iters", s.max_outer_iters, "solver");
    read(solver, "max_backtracks", s.max_backtracks, "solver");
    read(solver, "stop_tol", s.stop_tol, "solver");
    read(solver, "inner_limit", s.prox.inner_limit, "solver");
    read(solver, "warm_start", s.prox.warm_start, "solver");
    read(solver, "accelerated", s.prox.accelerated, "solver");
    read(solver, "fista_a", s.prox.fista_a, "solver");
  }
  try {
    cfg.solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  if (const YAML::Node strategy = root["strategy"]) {
    reject_unknown(strategy, "strategy", {"metric", "steplength", "window"});
    read(strategy, "metric", cfg.metric, "strategy");
    read(strategy, "steplength", cfg.steplength, "strategy");
    read(strategy, "window", cfg.window, "strategy");
  }
  if (cfg.metric != "identity" && cfg.metric != "sg" && cfg.metric != "majorant") {
    throw ConfigError("strategy.metric must be identity, sg or majorant");
  }
  if (cfg.steplength != "bb" && cfg.steplength != "ritz") {
    throw ConfigError("strategy.steplength must be bb or ritz");
  }
  if (cfg.window < 1) throw ConfigError("strategy.window must be >= 1");

  if (const YAML::Node output = root["output"]) {
    reject_unknown(output, "output", {"reconstruction", "trace", "summary", "observed", "truth"});
    read_path(output, "reconstruction", cfg.output.reconstruction, base_dir, "output");
    read_path(output, "trace", cfg.output.trace, base_dir, "output");
    read_path(output, "summary", cfg.output.summary, base_dir, "output");
    read_path(output, "observed", cfg.output.observed, base_dir, "output");
    read_path(output, "truth", cfg.output.truth, base_dir, "output");
  }
  read(root, "seed", cfg.seed, "config");
  read(root, "audit", cfg.audit, "config");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

}  // namespace vmilan::cli
