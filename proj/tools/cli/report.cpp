#include "report.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vmilan::cli {

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> columns = {
      "k",         "f_value",     "alpha",       "lambda",          "backtracks",
      "step_norm", "h_gamma",     "epsilon_k",   "inner_iters",     "chose_tilde",
      "invariant_flags", "f_prev", "f_tilde",    "f_linesearch",    "tilde_dist"};
  return columns;
}

namespace {

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::runtime_error("trace: bad number '" + s + "'");
  return v;
}

}  // namespace

void write_trace(std::ostream& out, const std::vector<IterateRecord>& trace) {
  out << kTraceVersionLine << '\n';
  const auto& cols = trace_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const IterateRecord& r : trace) {
    out << r.k << ',' << real(r.f_value) << ',' << real(r.alpha) << ',' << real(r.lambda) << ','
        << r.backtracks << ',' << real(r.step_norm) << ',' << real(r.h_gamma) << ','
        << real(r.epsilon_k) << ',' << r.inner_iters << ',' << (r.chose_tilde ? 1 : 0) << ','
        << r.invariant_flags << ',' << real(r.f_prev) << ',' << real(r.f_tilde) << ','
        << real(r.f_linesearch) << ',' << real(r.tilde_dist) << '\n';
  }
}

void write_trace(const std::filesystem::path& path, const std::vector<IterateRecord>& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace " + path.string());
  write_trace(out, trace);
  if (!out) throw std::runtime_error("write failed for trace " + path.string());
}

std::vector<IterateRecord> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kTraceVersionLine) {
    throw std::runtime_error("trace: missing or unsupported version line");
  }
  if (!std::getline(in, line)) throw std::runtime_error("trace: missing header");
  std::vector<IterateRecord> trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != trace_columns().size()) throw std::runtime_error("trace: wrong column count");
    IterateRecord r;
    r.k = std::stoi(f[0]);
    r.f_value = parse_real(f[1]);
    r.alpha = parse_real(f[2]);
    r.lambda = parse_real(f[3]);
    r.backtracks = std::stoi(f[4]);
    r.step_norm = parse_real(f[5]);
    r.h_gamma = parse_real(f[6]);
    r.epsilon_k = parse_real(f[7]);
    r.inner_iters = std::stoi(f[8]);
    r.chose_tilde = f[9] == "1";
    r.invariant_flags = static_cast<std::uint32_t>(std::stoul(f[10]));
    r.f_prev = parse_real(f[11]);
    r.f_tilde = parse_real(f[12]);
    r.f_linesearch = parse_real(f[13]);
    r.tilde_dist = parse_real(f[14]);
    trace.push_back(r);
  }
  return trace;
}

nlohmann::json audit_to_json(const AuditReport& report) {
  nlohmann::json j;
  j["iterations"] = report.iterations;
  j["total_violations"] = report.total_violations();
  nlohmann::json checks = nlohmann::json::object();
  for (int c = 0; c < kAuditChecks; ++c) {
    checks[AuditReport::check_name(c)] = report.violations[static_cast<std::size_t>(c)];
  }
  j["violations"] = checks;
  nlohmann::json bad = nlohmann::json::array();
  for (std::size_t k = 0; k < report.flags.size(); ++k) {
    if (report.flags[k] != 0) bad.push_back({{"k", k}, {"flags", report.flags[k]}});
  }
  j["violating_iterations"] = bad;
  j["max_epsilon"] = report.max_epsilon;
  j["final_epsilon"] = report.final_epsilon;
  // Labelled empirical: min_k lambda_k stands in for the unknown lower bound.
  if (report.iterations > 0) {
    j["empirical_lambda_min"] = report.empirical_lambda_min;
    j["empirical_a"] = report.empirical_a;
  }
  return j;
}

}  // namespace vmilan::cli
