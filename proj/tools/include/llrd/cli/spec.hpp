#pragma once

// Problem specs: a JSON document naming a source pmf, an optional channel
// P_{X|U}, an optional classical distortion matrix, reporting units and
// solver overrides. Matrices are row-major nested arrays whose rows follow
// the source alphabet.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "llrd/info.hpp"
#include "llrd/loglik.hpp"

namespace llrd::cli {

using Json = nlohmann::ordered_json;

struct SolverOverrides {
  std::optional<double> tol;
  std::optional<std::size_t> max_iters;
  std::optional<std::size_t> points;
  std::optional<std::vector<double>> lambda_grid;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> restarts;
  std::optional<std::size_t> factor_iters;

  friend bool operator==(const SolverOverrides&, const SolverOverrides&) = default;
};

struct ProblemSpec {
  std::string name;
  LogBase units = LogBase::bits;
  Pmf source;
  std::optional<Channel> channel;  // P_{X|U}; outputs = source alphabet
  std::optional<DistortionMatrix> distortion;
  SolverOverrides solver;

  friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

// Throws ValidationError with the offending field path, e.g.
// "channel.matrix[1][2]: must be a number".
ProblemSpec parse_spec(const Json& doc);
ProblemSpec load_spec(const std::string& path);
Json to_json(const ProblemSpec& spec);

// FNV-1a 64 of the canonical serialization, as 16 hex digits.
std::string spec_hash(const ProblemSpec& spec);

// "fig2": Ber(0.25) through BSC(0.1). "fig3": Ber(0.35) through the binary
// three-input channel [0.8 0.4 0.2; 0.2 0.6 0.8].
ProblemSpec builtin_spec(const std::string& figure);

}  // namespace llrd::cli
