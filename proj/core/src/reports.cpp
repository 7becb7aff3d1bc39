#include "holon/reports.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "holon/errors.hpp"

namespace holon {

namespace fs = std::filesystem;

namespace {

std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  return s == "-0.000000" ? "0.000000" : s;
}

void write_output_dir(const OutputLines& lines, const fs::path& dir) {
  const auto out_dir = dir / "output";
  fs::create_directories(out_dir);
  for (const auto& [p, rows] : lines) {
    const auto path = out_dir / (p.str() + ".csv");
    auto out = open_for_write(path);
    for (const auto& row : rows) out << row << '\n';
    finish(out, path);
  }
}

void write_reports(const RunResult& result, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  const auto& m = result.metrics;

  {
    const auto path = dir / "latency.csv";
    auto out = open_for_write(path);
    out << "time_s,partition,window,latency_s\n";
    for (const auto& s : m.latency) {
      out << format_number(s.first_emit_s) << ',' << s.partition.str() << ',' << s.window << ','
          << format_number(s.latency_s()) << '\n';
    }
    finish(out, path);
  }
  {
    const auto path = dir / "throughput.csv";
    auto out = open_for_write(path);
    out << "time_s,events_per_s\n";
    for (const auto& b : m.throughput) out << b.second << ',' << b.events << '\n';
    finish(out, path);
  }
  {
    const auto path = dir / "summary.csv";
    auto out = open_for_write(path);
    out << "metric,value\n";
    out << "completed," << (result.completed ? 1 : 0) << '\n';
    out << "events_generated," << result.events_generated << '\n';
    out << "events_consumed," << m.events_consumed << '\n';
    out << "windows," << result.windows << '\n';
    out << "elapsed_s," << format_number(result.elapsed_s) << '\n';
    if (m.percentiles) {
      out << "latency_avg_s," << format_number(m.percentiles->avg) << '\n';
      out << "latency_p99_s," << format_number(m.percentiles->p99) << '\n';
    }
    if (m.sensitivity) {
      out << "sensitivity," << format_number(m.sensitivity->area) << '\n';
      out << "sensitivity_peak_s," << format_number(m.sensitivity->peak) << '\n';
      out << "sensitivity_duration_s," << format_number(m.sensitivity->duration_s) << '\n';
    }
    finish(out, path);
  }
  write_output_dir(result.outputs, dir);
}

OutputLines read_output_dir(const fs::path& dir) {
  const auto out_dir = dir / "output";
  if (!fs::is_directory(out_dir)) throw UsageError("no output directory under " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(out_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  OutputLines out;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + f.string());
    auto& rows = out[PartitionId(f.stem().string())];
    for (std::string line; std::getline(in, line);) rows.push_back(line);
  }
  return out;
}

DiffResult diff_outputs(const OutputLines& run, const OutputLines& expected, std::size_t limit) {
  DiffResult d;
  auto note = [&](std::string msg) {
    d.equal = false;
    if (d.differences.size() < limit) d.differences.push_back(std::move(msg));
  };
  for (const auto& [p, _] : run)
    if (!expected.contains(p)) note("unexpected partition " + p.str());
  for (const auto& [p, want] : expected) {
    auto it = run.find(p);
    if (it == run.end()) {
      note("missing partition " + p.str());
      continue;
    }
    const auto& got = it->second;
    const auto n = std::max(got.size(), want.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (i >= got.size()) {
        note(p.str() + " line " + std::to_string(i + 1) + ": missing, expected '" + want[i] + "'");
      } else if (i >= want.size()) {
        note(p.str() + " line " + std::to_string(i + 1) + ": unexpected '" + got[i] + "'");
      } else if (got[i] != want[i]) {
        note(p.str() + " line " + std::to_string(i + 1) + ": got '" + got[i] + "', expected '" + want[i] + "'");
      }
    }
  }
  return d;
}

}  // namespace holon
