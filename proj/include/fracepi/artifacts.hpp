#pragma once

// CSV emission and ingestion for run artifacts, plus an all-or-nothing
// artifact writer used by the command-line front end.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fracepi/calibration.hpp"
#include "fracepi/costeff.hpp"
#include "fracepi/error.hpp"
#include "fracepi/focp.hpp"
#include "fracepi/frackernel.hpp"

namespace fracepi {

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// 64-bit FNV-1a, as 16 hex digits.
inline std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile(path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string trajectory_csv(const Trajectory& traj, const std::vector<std::string>& columns) {
  if (columns.size() != traj.dim()) throw ShapeMismatch("trajectory_csv: column count differs from dimension");
  std::ostringstream o;
  o << 't';
  for (const auto& c : columns) o << ',' << c;
  o << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    o << format_real(traj.grid().time(k));
    for (std::size_t c = 0; c < traj.dim(); ++c) o << ',' << format_real(traj(k, c));
    o << '\n';
  }
  return o.str();
}

inline constexpr std::string_view kFocpHeader = "t,S,E,I,R,p1,p2,p3,p4,T";

inline std::string focp_csv(const FocpSolution& sol) {
  std::ostringstream o;
  o << kFocpHeader << '\n';
  for (std::size_t k = 0; k < sol.state.size(); ++k) {
    o << format_real(sol.state.grid().time(k));
    for (std::size_t c = 0; c < 4; ++c) o << ',' << format_real(sol.state(k, c));
    for (std::size_t c = 0; c < 4; ++c) o << ',' << format_real(sol.adjoint(k, c));
    o << ',' << format_real(sol.control.values[k]) << '\n';
  }
  return o.str();
}

inline std::string focp_summary_csv(const FocpSolution& sol) {
  std::ostringstream o;
  o << "objective,iterations,final_residual,converged\n"
    << format_real(sol.objective) << ',' << sol.iterations << ',' << format_real(sol.final_residual()) << ','
    << (sol.converged ? "true" : "false") << '\n';
  return o.str();
}

/// State and control read back from a focp CSV.
struct FocpRecord {
  Trajectory state;
  ControlTrajectory control;
};

inline FocpRecord parse_focp_csv(std::string_view text, const std::string& origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kFocpHeader)
    throw MalformedRow(1, origin + ": expected header '" + std::string(kFocpHeader) + "'");
  std::vector<double> times, states, controls;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view row = detail::trim(line);
    if (row.empty()) continue;
    std::vector<double> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = row.find(',', start);
      auto v = detail::parse_double(row.substr(start, comma == row.npos ? row.npos : comma - start));
      if (!v) throw MalformedRow(line_no, origin + ": non-numeric field");
      fields.push_back(*v);
      if (comma == row.npos) break;
      start = comma + 1;
    }
    if (fields.size() != 10) throw MalformedRow(line_no, origin + ": expected 10 fields");
    times.push_back(fields[0]);
    states.insert(states.end(), fields.begin() + 1, fields.begin() + 5);
    controls.push_back(fields[9]);
  }
  if (times.size() < 2) throw TooFewRows(times.size());
  const Grid grid(times.front(), times.back(), times.size() - 1);
  return {Trajectory(grid, 4, std::move(states)), ControlTrajectory{grid, std::move(controls)}};
}

inline std::string fit_evaluations_csv(const FitResult& fit) {
  std::ostringstream o;
  o << "alpha,error\n";
  for (const auto& e : fit.evaluations)
    o << format_real(e.alpha) << ',' << (e.feasible ? format_real(e.error) : std::string("inf")) << '\n';
  return o.str();
}

inline std::string fit_summary_csv(const FitResult& fit) {
  std::ostringstream o;
  o << "best_alpha,error,relative_error\n"
    << format_real(fit.best_alpha) << ',' << format_real(fit.error) << ',' << format_real(fit.relative_error) << '\n';
  return o.str();
}

inline std::string report_csv(const CostEffReport& report) {
  std::ostringstream o;
  write_report_csv(o, report);
  return o.str();
}

/// Writes files under one directory; unless commit() is called, every file
/// it wrote is removed again on destruction.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ConfigError("--out", "cannot create output directory " + dir_.string() + ": " + ec.message());
  }
  ArtifactWriter(const ArtifactWriter&) = delete;
  ArtifactWriter& operator=(const ArtifactWriter&) = delete;

  ~ArtifactWriter() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& f : files_) std::filesystem::remove(dir_ / f.name, ec);
  }

  struct File {
    std::string name;
    std::string hash;
  };

  void write(const std::string& name, std::string_view content) {
    const auto path = dir_ / name;
    std::filesystem::create_directories(path.parent_path());
    files_.push_back({name, fnv1a_hex(content)});
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("failed to write " + path.string());
  }

  void commit() { committed_ = true; }
  const std::filesystem::path& dir() const noexcept { return dir_; }
  const std::vector<File>& files() const noexcept { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<File> files_;
  bool committed_ = false;
};

}  // namespace fracepi
