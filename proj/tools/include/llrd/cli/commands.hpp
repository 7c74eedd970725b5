#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "llrd/cli/output.hpp"
#include "llrd/cli/spec.hpp"

namespace llrd::cli {

// Command-line values; each one overrides the matching spec field.
struct RunOptions {
  std::optional<LogBase> units;
  std::optional<std::size_t> points;
  std::optional<double> lambda0;
  std::optional<double> distortion;
  std::optional<std::uint64_t> seed;
};

struct Bundle {
  std::string command;
  Json json;  // already sanitized
  std::vector<std::pair<std::string, CsvTable>> tables;  // file name, table
  // Set when the run finished but a verification check failed.
  std::string failed_check;
};

inline constexpr std::size_t kDefaultCurvePoints = 50;

Bundle cmd_analyze(const ProblemSpec& spec, const RunOptions& opt = {});
// Table "curve.csv": D, R_loglik, R_logloss_bound, slope, converged.
Bundle cmd_curve(const ProblemSpec& spec, const RunOptions& opt = {});
Bundle cmd_dual(const ProblemSpec& spec, const RunOptions& opt = {});
Bundle cmd_translate(const ProblemSpec& spec, const RunOptions& opt = {});
Bundle cmd_rdp(const ProblemSpec& spec, const RunOptions& opt = {});
// Tables "<figure>.csv" (curve schema) and json = markers.
Bundle cmd_reproduce(const std::string& figure, const RunOptions& opt = {});

// With out_dir: writes <command>.json (markers.json for reproduce) and every
// table into it. Without: prints tables (curve) or the JSON to the stream.
void emit(const Bundle& bundle, const std::optional<std::string>& out_dir, std::ostream& os);

}  // namespace llrd::cli
