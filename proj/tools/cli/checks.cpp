#include <cmath>
#include <iostream>
#include <memory>

#include <json.hpp>

#include "commands.hpp"
#include "vmilan/diagnostics.hpp"
#include "vmilan/imaging_operators.hpp"
#include "vmilan/metrics.hpp"
#include "vmilan/problems.hpp"
#include "vmilan/prox.hpp"
#include "vmilan/solver.hpp"
#include "vmilan/synthetic.hpp"

namespace vmilan::cli {

namespace {

using nlohmann::json;

constexpr double kAdjointTol = 1e-10;
constexpr double kGradientTol = 1e-6;
constexpr double kCompressionGradientTol = 1e-5;
constexpr double kProxTol = 1e-6;
constexpr double kFdStep = 1e-4;

struct CheckList {
  json rows = json::array();
  bool pass = true;

  void add(const std::string& name, double value, double tol) {
    const bool ok = value <= tol;
    rows.push_back({{"name", name}, {"value", value}, {"tolerance", tol}, {"pass", ok}});
    pass = pass && ok;
  }
  void add_flag(const std::string& name, bool ok, json detail) {
    rows.push_back({{"name", name}, {"pass", ok}, {"detail", std::move(detail)}});
    pass = pass && ok;
  }
};

Vector uniform_vector(NoiseSource& rng, Index n, double lo, double hi) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = lo + (hi - lo) * rng.uniform();
  return v;
}

double adjoint_worst(const LinearOperator& op, NoiseSource& rng, int trials) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Vector x = uniform_vector(rng, op.cols(), 0.0, 1.0);
    const Vector y = uniform_vector(rng, op.rows(), 0.0, 1.0);
    const double lhs = op.apply(x).dot(y);
    const double rhs = x.dot(op.adjoint(y));
    worst = std::max(worst, std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300}));
  }
  return worst;
}

void check_adjoints(CheckList& list, NoiseSource& rng) {
  list.add("adjoint.conv_direct_16x16",
           adjoint_worst(ConvOperator(16, 16, gaussian_kernel(7, 1.5)), rng, 5), kAdjointTol);
  list.add("adjoint.conv_fft_64x64",
           adjoint_worst(ConvOperator(64, 64, gaussian_kernel(9, 1.0)), rng, 5), kAdjointTol);
  list.add("adjoint.gradient", adjoint_worst(DiscreteGradient(16, 12), rng, 5), kAdjointTol);
  list.add("adjoint.laplacian", adjoint_worst(Laplacian(16, 12), rng, 5), kAdjointTol);
  list.add("adjoint.tv_stack", adjoint_worst(*make_tv_operator(8, 8), rng, 5), kAdjointTol);
}

void check_gradients(CheckList& list, NoiseSource& rng, bool inject_bug) {
  const Index side = 8;
  auto blur = std::make_shared<const ConvOperator>(side, side, gaussian_kernel(7, 1.0));
  const ImageGrid truth = make_phantom(side, side);
  DegradeSpec gspec;
  gspec.model = NoiseModel::kGaussianSd;
  gspec.seed = 5;
  GaussianSdTerm sd(blur, degrade_synthetic(truth, *blur, gspec).pixels, Vector::Ones(side * side),
                    Vector::Ones(side * side));
  DegradeSpec cspec;
  cspec.seed = 6;
  CauchyTerm cauchy(blur, degrade_synthetic(truth, *blur, cspec).pixels, 0.02, 0.35);
  CompressionTerm compression(make_smooth_scene(6, 6), 0.01);

  const double bug = inject_bug ? 1.0 + 1e-3 : 1.0;
  auto worst = [&](const SmoothTerm& term, double lo, double hi) {
    double w = 0.0;
    for (int p = 0; p < 3; ++p) {
      const Vector x = uniform_vector(rng, term.dimension(), lo, hi);
      const double h = kFdStep * std::max(1.0, x.lpNorm<Eigen::Infinity>());
      w = std::max(w, fd_gradient_check([&](const Vector& v) { return term.value(v); },
                                        [&](const Vector& v) { return Vector(bug * term.gradient(v)); },
                                        x, h, static_cast<int>(x.size())));
    }
    return w;
  };
  list.add("gradient.gaussian_sd", worst(sd, 0.0, 1.0), kGradientTol);
  list.add("gradient.cauchy", worst(cauchy, 0.0, 1.0), kGradientTol);
  // Masks in (0, 1] keep the diffusion system diagonally dominant.
  list.add("gradient.compression", worst(compression, 0.05, 1.0), kCompressionGradientTol);
}

void check_prox(CheckList& list, NoiseSource& rng) {
  double worst = 0.0;
  for (const auto& [w, h] : {std::pair<Index, Index>{2, 2}, {4, 1}, {3, 3}}) {
    const Index n = w * h;
    auto reg = make_tv_nonneg_regularizer(w, h, 0.1 + 0.9 * rng.uniform());
    IterateState state;
    state.x = uniform_vector(rng, n, 0.0, 1.0);
    state.alpha = 0.5 + 1.5 * rng.uniform();
    state.metric = DiagonalMetric::from_inverse(uniform_vector(rng, n, 0.5, 2.0), 1e10);
    const Vector z = uniform_vector(rng, n, -0.5, 1.5);
    state.grad_f0 = state.metric.diag.cwiseProduct(state.x - z) / state.alpha;
    state.f1_value = reg->value(state.x);
    ProxOptions options;
    options.gap_tolerance = 1e-12;
    options.inner_limit = 2000000;
    const ProxCertificate cert = inexact_prox_dual(state, *reg, 1e6 - 1.0, 1.0, options);
    const Vector oracle = dense_prox_oracle(DenseProxSpec{z, state.alpha, state.metric}, *reg);
    worst = std::max(worst, (cert.y_tilde - oracle).lpNorm<Eigen::Infinity>());
  }
  list.add("prox.tv_vs_dense_oracle", worst, kProxTol);

  double worst_box = 0.0;
  for (Index n = 4; n < 8; ++n) {
    BoxIndicator box(n, 0.0, 1.5);
    const Vector z = uniform_vector(rng, n, -1.0, 2.5);
    DenseProxSpec spec{z, 0.5 + rng.uniform(),
                       DiagonalMetric::from_inverse(uniform_vector(rng, n, 0.5, 2.0), 1e10)};
    worst_box = std::max(
        worst_box, (exact_prox_box(z, 0.0, 1.5) - dense_prox_oracle(spec, box)).lpNorm<Eigen::Infinity>());
  }
  list.add("prox.box_vs_dense_oracle", worst_box, 1e-12);
}

json audited_run(const std::string& name, const Problem& problem, const SolverConfig& config,
                 const std::string& metric_name, const std::string& steps_name, const Vector& x0,
                 bool& ok) {
  auto metric = make_metric_strategy(metric_name, problem);
  auto steps = make_steplength_strategy(steps_name);
  const RunResult run = vmilan_run(problem, config, *metric, *steps, x0);
  const AuditReport report = audit_trace(run.trace, config);
  bool inline_clean = true;
  for (const IterateRecord& r : run.trace) inline_clean = inline_clean && r.invariant_flags == 0;
  ok = report.clean() && inline_clean;
  return {{"run", name},
          {"iterations", run.trace.size()},
          {"violations", report.total_violations()},
          {"inline_flags_clean", inline_clean},
          {"max_epsilon", report.max_epsilon}};
}

void check_invariants(CheckList& list, std::uint64_t seed) {
  {
    SolverConfig config;
    config.beta = 0.5;
    config.max_outer_iters = 50;
    bool ok = false;
    json d = audited_run("toy1d", make_toy1d_problem(), config, "identity", "bb", Vector::Zero(1), ok);
    list.add_flag("invariants.toy1d", ok, d);
  }
  {
    const Index side = 32;
    auto blur = std::make_shared<const ConvOperator>(side, side, gaussian_kernel(9, 1.0));
    DegradeSpec spec;
    spec.clip = true;
    spec.seed = seed;
    const ImageGrid observed = degrade_synthetic(make_phantom(side, side), *blur, spec);
    SolverConfig config;
    config.max_outer_iters = 40;
    config.stop_tol = 0.0;
    bool ok = false;
    json d = audited_run("cauchy_32", make_cauchy_problem(blur, observed, 0.02, 0.35, 1.0), config,
                         "sg", "ritz", observed.pixels, ok);
    list.add_flag("invariants.cauchy", ok, d);
  }
  {
    SolverConfig config;
    config.alpha_max = 1e5;
    config.max_outer_iters = 30;
    config.stop_tol = 0.0;
    bool ok = false;
    json d = audited_run("compression_8", make_compression_problem(make_smooth_scene(8, 8), 0.01),
                         config, "identity", "ritz", Vector::Ones(64), ok);
    list.add_flag("invariants.compression", ok, d);
  }
}

}  // namespace

int cmd_check(const std::string& scope, const CheckOptions& options, std::ostream& out,
              std::ostream& err) {
  const bool all = scope == "all";
  if (!all && scope != "adjoints" && scope != "gradients" && scope != "prox" &&
      scope != "invariants") {
    err << "unknown check scope '" << scope << "'\n";
    return kExitUsage;
  }
  CheckList list;
  NoiseSource rng(options.seed);
  try {
    if (all || scope == "adjoints") check_adjoints(list, rng);
    if (all || scope == "gradients") check_gradients(list, rng, options.inject_gradient_bug);
    if (all || scope == "prox") check_prox(list, rng);
    if (all || scope == "invariants") check_invariants(list, options.seed);
  } catch (const std::exception& e) {
    list.add_flag("exception", false, e.what());
  }
  const json report = {{"scope", scope},
                       {"seed", options.seed},
                       {"fault_injected", options.inject_gradient_bug},
                       {"checks", list.rows},
                       {"pass", list.pass}};
  out << report.dump(2) << '\n';
  if (!list.pass) err << "check '" << scope << "' failed\n";
  return list.pass ? kExitOk : kExitCheckFailed;
}

}  // namespace vmilan::cli
