#include "llrd/cli/spec.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "llrd/errors.hpp"

namespace llrd::cli {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

const Json& field(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path, "must be an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing");
  return *it;
}

double number(const Json& v, const std::string& path, bool allow_inf = false) {
  if (v.is_number()) {
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "must be finite");
    return x;
  }
  if (allow_inf && v.is_string() && v.get<std::string>() == "inf") {
    return std::numeric_limits<double>::infinity();
  }
  fail(path, allow_inf ? "must be a number or \"inf\"" : "must be a number");
}

std::uint64_t unsigned_int(const Json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) fail(path, "must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

Alphabet labels(const Json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "must be a non-empty array of strings");
  Alphabet out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) fail(path + "[" + std::to_string(i) + "]", "must be a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

Eigen::MatrixXd matrix(const Json& v, const std::string& path, std::size_t rows, std::size_t cols,
                       bool allow_inf) {
  if (!v.is_array() || v.size() != rows) {
    fail(path, "must have " + std::to_string(rows) + " rows");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!v[r].is_array() || v[r].size() != cols) fail(rp, "must have " + std::to_string(cols) + " entries");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          number(v[r][c], rp + "[" + std::to_string(c) + "]", allow_inf);
    }
  }
  return m;
}

// Re-raises core validation errors under the field they came from.
template <typename F>
auto wrap(const std::string& path, F&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
}

Json number_out(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

Json matrix_out(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(number_out(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

ProblemSpec parse_spec(const Json& doc) {
  if (!doc.is_object()) fail("spec", "must be an object");
  ProblemSpec spec;
  const Json& name = field(doc, "name", "spec");
  if (!name.is_string()) fail("name", "must be a string");
  spec.name = name.get<std::string>();

  if (doc.contains("units")) {
    if (!doc["units"].is_string()) fail("units", "must be \"bits\" or \"nats\"");
    spec.units = wrap("units", [&] { return parse_log_base(doc["units"].get<std::string>()); });
  }

  const Json& src = field(doc, "source", "spec");
  const Alphabet xs = labels(field(src, "alphabet", "source"), "source.alphabet");
  const Json& probs = field(src, "probs", "source");
  if (!probs.is_array() || probs.size() != xs.size()) {
    fail("source.probs", "must have " + std::to_string(xs.size()) + " entries");
  }
  Eigen::VectorXd pv(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    pv(static_cast<Eigen::Index>(i)) = number(probs[i], "source.probs[" + std::to_string(i) + "]");
  }
  spec.source = wrap("source", [&] { return Pmf(xs, pv); });

  if (doc.contains("channel")) {
    const Json& ch = doc["channel"];
    const Alphabet us = labels(field(ch, "inputs", "channel"), "channel.inputs");
    const Alphabet outs = ch.contains("outputs") ? labels(ch["outputs"], "channel.outputs") : xs;
    if (outs != xs) fail("channel.outputs", "must equal source.alphabet");
    Eigen::MatrixXd m = matrix(field(ch, "matrix", "channel"), "channel.matrix", xs.size(), us.size(), false);
    spec.channel = wrap("channel", [&] { return Channel(us, xs, std::move(m)); });
  }

  if (doc.contains("distortion")) {
    const Json& dj = doc["distortion"];
    const Alphabet ys = dj.contains("recon") ? labels(dj["recon"], "distortion.recon") : xs;
    Eigen::MatrixXd m = matrix(field(dj, "matrix", "distortion"), "distortion.matrix", xs.size(), ys.size(), true);
    spec.distortion = wrap("distortion", [&] { return DistortionMatrix(xs, ys, std::move(m)); });
  }

  if (!spec.channel && !spec.distortion) fail("spec", "needs a channel or a distortion");

  if (doc.contains("solver")) {
    const Json& s = doc["solver"];
    if (!s.is_object()) fail("solver", "must be an object");
    for (const auto& [key, v] : s.items()) {
      const std::string path = "solver." + key;
      if (key == "tol") {
        spec.solver.tol = number(v, path);
        if (!(*spec.solver.tol > 0.0)) fail(path, "must be > 0");
      } else if (key == "max_iters") {
        spec.solver.max_iters = unsigned_int(v, path);
      } else if (key == "points") {
        spec.solver.points = unsigned_int(v, path);
        if (*spec.solver.points == 0) fail(path, "must be >= 1");
      } else if (key == "lambda_grid") {
        if (!v.is_array() || v.empty()) fail(path, "must be a non-empty array");
        std::vector<double> grid;
        for (std::size_t i = 0; i < v.size(); ++i) {
          grid.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
          if (!(grid.back() > 0.0)) fail(path + "[" + std::to_string(i) + "]", "must be > 0");
        }
        spec.solver.lambda_grid = std::move(grid);
      } else if (key == "seed") {
        spec.solver.seed = unsigned_int(v, path);
      } else if (key == "restarts") {
        spec.solver.restarts = unsigned_int(v, path);
      } else if (key == "factor_iters") {
        spec.solver.factor_iters = unsigned_int(v, path);
      } else {
        fail(path, "unknown solver option");
      }
    }
  }
  return spec;
}

ProblemSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("spec: cannot open " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError("spec: " + path + " is not valid JSON (" + e.what() + ")");
  }
  return parse_spec(doc);
}

Json to_json(const ProblemSpec& spec) {
  Json doc;
  doc["name"] = spec.name;
  doc["units"] = to_string(spec.units);
  Json probs = Json::array();
  for (std::size_t i = 0; i < spec.source.size(); ++i) probs.push_back(spec.source[i]);
  doc["source"] = {{"alphabet", spec.source.alphabet()}, {"probs", probs}};
  if (spec.channel) {
    doc["channel"] = {{"inputs", spec.channel->input_alphabet()},
                      {"outputs", spec.channel->output_alphabet()},
                      {"matrix", matrix_out(spec.channel->matrix())}};
  }
  if (spec.distortion) {
    doc["distortion"] = {{"recon", spec.distortion->recon_alphabet()},
                         {"matrix", matrix_out(spec.distortion->values())}};
  }
  Json solver = Json::object();
  const SolverOverrides& s = spec.solver;
  if (s.tol) solver["tol"] = *s.tol;
  if (s.max_iters) solver["max_iters"] = *s.max_iters;
  if (s.points) solver["points"] = *s.points;
  if (s.lambda_grid) solver["lambda_grid"] = *s.lambda_grid;
  if (s.seed) solver["seed"] = *s.seed;
  if (s.restarts) solver["restarts"] = *s.restarts;
  if (s.factor_iters) solver["factor_iters"] = *s.factor_iters;
  if (!solver.empty()) doc["solver"] = std::move(solver);
  return doc;
}

std::string spec_hash(const ProblemSpec& spec) {
  const std::string text = to_json(spec).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ProblemSpec builtin_spec(const std::string& figure) {
  ProblemSpec spec;
  spec.name = figure;
  spec.units = LogBase::bits;
  if (figure == "fig2") {
    spec.source = Pmf::bernoulli(0.25);
    spec.channel = Channel::bsc(0.1);
  } else if (figure == "fig3") {
    spec.source = Pmf::bernoulli(0.35);
    Eigen::MatrixXd m(2, 3);
    m << 0.8, 0.4, 0.2,
         0.2, 0.6, 0.8;
    spec.channel = Channel({"u0", "u1", "u2"}, spec.source.alphabet(), m);
  } else {
    throw ValidationError("figure: expected fig2 or fig3, got '" + figure + "'");
  }
  spec.solver.points = 50;
  return spec;
}

}  // namespace llrd::cli
