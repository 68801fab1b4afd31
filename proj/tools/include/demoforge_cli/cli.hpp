#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "demoforge/pipeline/experiment.hpp"

namespace demoforge::cli {

/// Process exit codes. Stage failures map to 10 + stage index.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kConfig = 3,
  kIo = 4,
  kStageBase = 10,
};

int exit_code_for(Stage stage);

/// Parses argv, runs one verb and returns the process exit code. Diagnostics
/// go to err, human-readable output to out.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// CSV -> aligned text table (one row per results line) plus a per-setting
/// summary, written to `<dir>/report.txt`, and one gnuplot-ready
/// `<dir>/report_<metric>.dat` per metric. Returns the rendered text.
std::string render_report(const std::filesystem::path& dir);

/// The text table alone.
std::string format_results_table(const std::vector<ResultRow>& rows);

}  // namespace demoforge::cli
