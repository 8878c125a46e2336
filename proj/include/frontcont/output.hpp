#pragma once

#include "frontcont/config.hpp"
#include "frontcont/continuation.hpp"

#include <iosfwd>
#include <string>

namespace frontcont {

/// Shortest-safe fixed formatting: %.17g by default.
std::string fmt(double v, int precision = 17);

void write_branch_csv(std::ostream& os, const Branch& br, int precision = 17);
nlohmann::json branch_summary(const RunConfig& cfg, const Branch& br);

/// Creates the directory if needed and probes it with a temporary file.
bool directory_writable(const std::string& dir);

/// Writes branch.csv, summary.json and snapshots; returns the files written.
std::vector<std::string> write_run_artifacts(const std::string& dir, const RunConfig& cfg, const Branch& br);

}  // namespace frontcont
