#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "holon/harness.hpp"
#include "holon/workloads.hpp"

namespace holon {

// Fixed six-decimal rendering used for every number in the CSVs.
std::string format_number(double v);

// Writes latency.csv, throughput.csv, summary.csv and output/<partition>.csv
// under `dir`, creating it if needed. Throws std::runtime_error when a file
// cannot be written.
void write_reports(const RunResult& result, const std::filesystem::path& dir);

// Writes output/<partition>.csv only; used for oracle results.
void write_output_dir(const OutputLines& lines, const std::filesystem::path& dir);
// Reads output/<partition>.csv back. Throws UsageError if there is no
// output directory.
OutputLines read_output_dir(const std::filesystem::path& dir);

struct DiffResult {
  bool equal = true;
  std::vector<std::string> differences;
};

// Line-by-line comparison of two output sets; reports at most `limit`
// differences.
DiffResult diff_outputs(const OutputLines& run, const OutputLines& expected, std::size_t limit = 20);

}  // namespace holon
