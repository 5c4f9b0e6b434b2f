#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>

#include <json.hpp>

#include "config.hpp"
#include "report.hpp"
#include "vmilan/diagnostics.hpp"
#include "vmilan/image.hpp"
#include "vmilan/metrics.hpp"
#include "vmilan/parallel.hpp"
#include "vmilan/problems.hpp"
#include "vmilan/solver.hpp"
#include "vmilan/synthetic.hpp"

namespace vmilan::cli {

namespace {

using nlohmann::json;

ImageGrid make_scene(const DataParams& data) {
  return data.scene == Scene::kSmooth ? make_smooth_scene(data.width, data.height)
                                      : make_phantom(data.width, data.height);
}

std::uint64_t effective_seed(const ExperimentConfig& cfg, const Overrides& o) {
  return o.seed.value_or(cfg.seed);
}

DegradeSpec degrade_spec(const ExperimentConfig& cfg, std::uint64_t seed) {
  DegradeSpec spec;
  if (cfg.problem.kind == ProblemKind::kGaussianSd) {
    spec.model = NoiseModel::kGaussianSd;
  } else if (cfg.problem.kind == ProblemKind::kCauchy) {
    spec.model = NoiseModel::kCauchy;
  } else {
    throw ConfigError("degrade needs problem.kind gaussian_sd or cauchy");
  }
  spec.a = cfg.problem.a;
  spec.b = cfg.problem.b;
  spec.gamma_noise = cfg.problem.gamma_noise;
  spec.noise_scale = cfg.data.noise_scale;
  spec.clip = cfg.data.clip;
  spec.seed = seed;
  return spec;
}

struct DeblurData {
  std::optional<ImageGrid> truth;
  bool truth_synthetic = false;
  ImageGrid observed;
  std::shared_ptr<const ConvOperator> blur;
};

DeblurData load_deblur_data(const ExperimentConfig& cfg, std::uint64_t seed) {
  DeblurData d;
  if (cfg.data.truth) {
    d.truth = read_image(*cfg.data.truth);
  } else if (!cfg.data.observed) {
    d.truth = make_scene(cfg.data);
    d.truth_synthetic = true;
  }
  if (cfg.data.observed) d.observed = read_image(*cfg.data.observed);
  const ImageGrid& shape = cfg.data.observed ? d.observed : *d.truth;
  if (d.truth && cfg.data.observed &&
      (d.truth->width != d.observed.width || d.truth->height != d.observed.height)) {
    throw ConfigError("data.truth and data.observed differ in size");
  }
  d.blur = std::make_shared<const ConvOperator>(
      shape.width, shape.height, gaussian_kernel(cfg.problem.kernel_size, cfg.problem.kernel_sigma));
  if (!cfg.data.observed) d.observed = degrade_synthetic(*d.truth, *d.blur, degrade_spec(cfg, seed));
  return d;
}

std::filesystem::path with_suffix(const std::filesystem::path& p, const std::string& suffix) {
  return p.parent_path() / (p.stem().string() + suffix + p.extension().string());
}

double safe_psnr(const Vector& x, const Vector& truth) {
  try {
    return psnr(x, truth);
  } catch (const PsnrUndefined&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void make_parent_dirs(std::initializer_list<std::optional<std::filesystem::path>> paths) {
  for (const auto& p : paths) {
    if (p && p->has_parent_path()) std::filesystem::create_directories(p->parent_path());
  }
}

std::string reason_name(StopReason r) {
  return r == StopReason::kStepTolerance ? "step_tolerance" : "max_iterations";
}

int run_solve(const ExperimentConfig& cfg, const Overrides& overrides, std::ostream& out,
              std::ostream& err) {
  const std::uint64_t seed = effective_seed(cfg, overrides);
  SolverConfig solver = cfg.solver;
  solver.rng_seed = seed;
  if (overrides.max_iters) solver.max_outer_iters = *overrides.max_iters;
  try {
    solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const bool audit = cfg.audit || overrides.audit;

  json summary;
  summary["problem"] = to_string(cfg.problem.kind);
  summary["seed"] = seed;

  std::optional<Problem> problem;
  Vector x0;
  DeblurData deblur;
  std::optional<ImageGrid> u0;
  switch (cfg.problem.kind) {
    case ProblemKind::kToy1d:
      problem = make_toy1d_problem();
      x0 = Vector::Constant(1, cfg.data.x0.value_or(0.0));
      break;
    case ProblemKind::kCompression:
      u0 = cfg.data.image ? read_image(*cfg.data.image) : make_scene(cfg.data);
      problem = make_compression_problem(*u0, cfg.problem.lambda, cfg.problem.box_upper);
      x0 = Vector::Constant(u0->size(), cfg.data.x0.value_or(1.0));
      break;
    case ProblemKind::kGaussianSd:
    case ProblemKind::kCauchy: {
      deblur = load_deblur_data(cfg, seed);
      const Index n = deblur.observed.size();
      if (cfg.problem.kind == ProblemKind::kGaussianSd) {
        problem = make_gaussian_sd_problem(deblur.blur, deblur.observed,
                                           Vector::Constant(n, cfg.problem.a),
                                           Vector::Constant(n, cfg.problem.b), cfg.problem.rho);
      } else {
        problem = make_cauchy_problem(deblur.blur, deblur.observed, cfg.problem.gamma_noise,
                                      cfg.problem.lambda, cfg.problem.rho);
      }
      x0 = cfg.data.x0 ? Vector::Constant(n, *cfg.data.x0)
                       : Vector(deblur.observed.pixels.cwiseMax(0.0));
      if (deblur.truth) {
        summary["psnr_degraded"] =
            number_or_null(safe_psnr(deblur.observed.pixels, deblur.truth->pixels));
      }
      break;
    }
  }

  std::unique_ptr<MetricStrategy> metric;
  std::unique_ptr<SteplengthStrategy> steps;
  try {
    metric = make_metric_strategy(cfg.metric, *problem);
    steps = make_steplength_strategy(cfg.steplength, cfg.window);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  summary["metric"] = metric->name();
  summary["metric_fallback"] = cfg.metric == "majorant";
  summary["steplength"] = steps->name();

  std::optional<double> first_y_tilde;
  IterationObserver observer = [&](const IterateRecord& rec, const Vector& y_tilde, const IterateState&) {
    if (rec.k == 0 && y_tilde.size() == 1) first_y_tilde = y_tilde[0];
  };

  const auto trace_path = overrides.trace ? overrides.trace : cfg.output.trace;
  make_parent_dirs({trace_path, cfg.output.reconstruction, cfg.output.summary});
  const auto t0 = std::chrono::steady_clock::now();
  RunResult run;
  try {
    run = vmilan_run(*problem, solver, *metric, *steps, x0, observer);
  } catch (const LinesearchFailure& e) {
    if (trace_path) write_trace(*trace_path, e.trace());
    throw;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  double inner_total = 0.0;
  for (const IterateRecord& r : run.trace) inner_total += r.inner_iters;
  summary["iterations"] = run.trace.size();
  summary["stop_reason"] = reason_name(run.reason);
  summary["final_f"] = run.f_value;
  summary["mean_inner_iters"] =
      run.trace.empty() ? 0.0 : inner_total / static_cast<double>(run.trace.size());
  summary["wall_time_s"] = wall;
  summary["steplength_fallback_events"] = steps->fallback_events();
  summary["threads"] = thread_count();

  json outputs = json::object();
  if (trace_path) {
    write_trace(*trace_path, run.trace);
    outputs["trace"] = trace_path->string();
  }

  switch (cfg.problem.kind) {
    case ProblemKind::kToy1d:
      summary["y_tilde_first"] = number_or_null(first_y_tilde.value_or(std::nan("")));
      summary["x_final"] = run.x[0];
      break;
    case ProblemKind::kCompression: {
      const auto& term = static_cast<const CompressionTerm&>(problem->smooth());
      const Vector u = term.reconstruct(run.x);
      summary["mse"] = mse(u, u0->pixels);
      summary["psnr"] = number_or_null(safe_psnr(u, u0->pixels));
      summary["mask_density"] =
          static_cast<double>((run.x.array() > 0.0).count()) / static_cast<double>(run.x.size());
      if (cfg.output.reconstruction) {
        write_image(*cfg.output.reconstruction, ImageGrid(u0->width, u0->height, u));
        const auto mask_path = with_suffix(*cfg.output.reconstruction, "_mask");
        write_image(mask_path, ImageGrid(u0->width, u0->height, run.x));
        outputs["reconstruction"] = cfg.output.reconstruction->string();
        outputs["mask"] = mask_path.string();
      }
      break;
    }
    case ProblemKind::kGaussianSd:
    case ProblemKind::kCauchy:
      if (deblur.truth) {
        summary["psnr"] = number_or_null(safe_psnr(run.x, deblur.truth->pixels));
        summary["mse"] = mse(run.x, deblur.truth->pixels);
      }
      if (cfg.output.reconstruction) {
        write_image(*cfg.output.reconstruction,
                    ImageGrid(deblur.observed.width, deblur.observed.height, run.x));
        outputs["reconstruction"] = cfg.output.reconstruction->string();
      }
      break;
  }

  int code = kExitOk;
  if (audit) {
    const AuditReport report = audit_trace(run.trace, solver);
    summary["audit"] = audit_to_json(report);
    if (!report.clean()) {
      err << "audit: " << report.total_violations() << " violated inequalities\n";
      code = kExitAudit;
    }
  }
  if (cfg.output.summary) {
    outputs["summary"] = cfg.output.summary->string();
    summary["outputs"] = outputs;
    write_json(*cfg.output.summary, summary);
  } else {
    summary["outputs"] = outputs;
  }
  out << summary.dump(2) << '\n';
  return code;
}

int run_degrade(const ExperimentConfig& cfg, const Overrides& overrides, std::ostream& out) {
  if (!cfg.output.observed) throw ConfigError("degrade needs output.observed");
  if (cfg.data.observed) throw ConfigError("degrade takes data.truth or a synthetic scene, not data.observed");
  const std::uint64_t seed = effective_seed(cfg, overrides);
  const DeblurData d = load_deblur_data(cfg, seed);
  make_parent_dirs({cfg.output.observed, cfg.output.truth});
  write_image(*cfg.output.observed, d.observed);
  json summary;
  summary["problem"] = to_string(cfg.problem.kind);
  summary["seed"] = seed;
  summary["width"] = d.observed.width;
  summary["height"] = d.observed.height;
  summary["observed"] = cfg.output.observed->string();
  summary["observed_mean"] = d.observed.pixels.mean();
  summary["blurred_mean"] = d.blur->apply(d.truth->pixels).mean();
  summary["psnr_degraded"] = number_or_null(safe_psnr(d.observed.pixels, d.truth->pixels));
  if (cfg.output.truth && d.truth_synthetic) {
    write_image(*cfg.output.truth, *d.truth);
    summary["truth"] = cfg.output.truth->string();
  }
  out << summary.dump(2) << '\n';
  return kExitOk;
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace

int cmd_solve(const std::filesystem::path& config_path, const Overrides& overrides,
              std::ostream& out, std::ostream& err) {
  return guarded(err, [&] { return run_solve(load_config(config_path), overrides, out, err); });
}

int cmd_degrade(const std::filesystem::path& config_path, const Overrides& overrides,
                std::ostream& out, std::ostream& err) {
  return guarded(err, [&] { return run_degrade(load_config(config_path), overrides, out); });
}

}  // namespace vmilan::cli
