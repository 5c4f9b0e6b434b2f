#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "vmilan/diagnostics.hpp"
#include "vmilan/solver.hpp"

namespace vmilan::cli {

/// First line of every trace file. Bump when columns change.
inline constexpr const char* kTraceVersionLine = "# vmilan-trace v1";

/// Column names, in file order; one per IterateRecord field.
const std::vector<std::string>& trace_columns();

/// Headered CSV, one row per outer iteration, reals printed with %.17g so the
/// file round-trips exactly and two identical runs give identical bytes.
void write_trace(std::ostream& out, const std::vector<IterateRecord>& trace);
void write_trace(const std::filesystem::path& path, const std::vector<IterateRecord>& trace);

/// Parses a file written by write_trace. Throws std::runtime_error on malformed input.
std::vector<IterateRecord> read_trace(const std::filesystem::path& path);

nlohmann::json audit_to_json(const AuditReport& report);

}  // namespace vmilan::cli
