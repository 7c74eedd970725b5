#include "llrd/cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <ostream>

#include "llrd/ba.hpp"
#include "llrd/dual.hpp"
#include "llrd/errors.hpp"
#include "llrd/loglik.hpp"
#include "llrd/rdp.hpp"

#ifndef LLRD_VERSION
#define LLRD_VERSION "unknown"
#endif

namespace llrd::cli {

namespace {

LogBase units_of(const ProblemSpec& spec, const RunOptions& opt) { return opt.units.value_or(spec.units); }

Json meta(const std::string& command, const ProblemSpec& spec, const RunOptions& opt) {
  Json config = Json::object();
  config["units"] = to_string(units_of(spec, opt));
  if (opt.points) config["points"] = *opt.points;
  if (opt.lambda0) config["lambda0"] = *opt.lambda0;
  if (opt.distortion) config["distortion"] = *opt.distortion;
  if (opt.seed) config["seed"] = *opt.seed;
  Json m;
  m["tool"] = "llrd";
  m["version"] = LLRD_VERSION;
  m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  m["command"] = command;
  m["spec"] = spec.name;
  m["spec_hash"] = spec_hash(spec);
  m["config"] = std::move(config);
  return m;
}

Json pmf_json(const Pmf& p) {
  Json out = Json::object();
  for (std::size_t i = 0; i < p.size(); ++i) out[p.alphabet()[i]] = p[i];
  return out;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

const Channel& need_channel(const ProblemSpec& spec, const char* who) {
  if (!spec.channel) throw ValidationError(std::string(who) + ": spec has no channel");
  return *spec.channel;
}

const DistortionMatrix& need_distortion(const ProblemSpec& spec, const char* who) {
  if (!spec.distortion) throw ValidationError(std::string(who) + ": spec has no distortion matrix");
  return *spec.distortion;
}

double need_value(const std::optional<double>& v, const char* who, const char* flag) {
  if (!v) throw ValidationError(std::string(who) + ": " + flag + " is required");
  if (!std::isfinite(*v)) throw ValidationError(std::string(who) + ": " + flag + " must be finite");
  return *v;
}

ba::BaConfig ba_config(const ProblemSpec& spec) {
  ba::BaConfig cfg;
  if (spec.solver.tol) cfg.tol = *spec.solver.tol;
  if (spec.solver.max_iters) cfg.max_iters = *spec.solver.max_iters;
  return cfg;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  std::vector<double> out;
  if (n == 1) return {lo};
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  out.back() = hi;
  return out;
}

struct CurveRun {
  CsvTable table{{"D", "R_loglik", "R_logloss_bound", "slope", "converged"}};
  std::size_t converged = 0;
  std::size_t total = 0;
};

CurveRun loglik_curve(const Pmf& p, const Channel& ch, std::size_t points, const ba::BaConfig& cfg,
                      LogBase units) {
  if (points == 0) throw ValidationError("curve: --points must be >= 1");
  const DistortionMatrix d = loglik::loglik_distortion(ch);
  const FeasibleRange range = loglik::feasible_range(p, d);
  const ba::RdCurve curve = ba::rd_curve(p, d, ba::DistortionGrid{linear_grid(range.d_min, range.d_max, points)}, cfg);
  CurveRun run;
  for (const ba::RdPoint& pt : curve.points) {
    run.table.add_row({to_units(pt.distortion, units), to_units(pt.rate, units),
                       to_units(loglik::logloss_rdf(p, pt.distortion), units), pt.slope},
                      {pt.converged ? "true" : "false"});
    run.converged += pt.converged ? 1 : 0;
  }
  run.total = curve.points.size();
  return run;
}

}  // namespace

Bundle cmd_analyze(const ProblemSpec& spec, const RunOptions& opt) {
  const Channel& ch = need_channel(spec, "analyze");
  const LogBase units = units_of(spec, opt);
  const Pmf& p = spec.source;

  loglik::IterationConfig it;
  if (spec.solver.max_iters) it.max_iters = *spec.solver.max_iters;
  const FeasibleRange range = loglik::feasible_range(p, ch);
  const loglik::DminRate dmin = loglik::rate_at_dmin(p, ch, it);
  const loglik::ConsistencyReport cons = loglik::consistency_polytope(p, ch);
  const loglik::MlSets ml = loglik::ml_sets(ch);

  Json j;
  j["meta"] = meta("analyze", spec, opt);
  j["units"] = to_string(units);
  j["H_X"] = entropy(p, units);
  j["d_min"] = to_units(range.d_min, units);
  j["d_max"] = to_units(range.d_max, units);
  j["rate_at_d_min"] = {{"value", to_units(dmin.rate, units)},
                        {"converged", dmin.converged},
                        {"iterations", dmin.iterations},
                        {"output", pmf_json(dmin.q)}};
  Json sets = Json::object();
  for (std::size_t x = 0; x < ml.sets.size(); ++x) {
    Json s = Json::array();
    for (std::size_t u : ml.sets[x]) s.push_back(ch.input_alphabet()[u]);
    sets[p.alphabet()[x]] = std::move(s);
  }
  j["ml_sets"] = std::move(sets);

  Json c;
  c["feasible"] = cons.feasible;
  if (cons.feasible) {
    c["unique"] = cons.unique;
    c["witness_min"] = pmf_json(*cons.witness_min);
    c["witness_max"] = pmf_json(*cons.witness_max);
    c["d_star_min"] = to_units(cons.d_star_min, units);
    c["d_star_max"] = to_units(cons.d_star_max, units);
    if (cons.d_star_max - cons.d_star_min <= 1e-12) c["d_star"] = to_units(cons.d_star_min, units);
  }
  j["consistency"] = std::move(c);
  return {"analyze", sanitize(j), {}, {}};
}

Bundle cmd_curve(const ProblemSpec& spec, const RunOptions& opt) {
  const Channel& ch = need_channel(spec, "curve");
  const LogBase units = units_of(spec, opt);
  const std::size_t points = opt.points.value_or(spec.solver.points.value_or(kDefaultCurvePoints));
  CurveRun run = loglik_curve(spec.source, ch, points, ba_config(spec), units);
  if (run.converged == 0) throw ConvergenceError("curve: no grid point converged");

  Json j;
  j["meta"] = meta("curve", spec, opt);
  j["units"] = to_string(units);
  j["rows"] = run.total;
  j["converged_rows"] = run.converged;
  Bundle b{"curve", sanitize(j), {}, {}};
  b.tables.emplace_back("curve.csv", std::move(run.table));
  return b;
}

Bundle cmd_dual(const ProblemSpec& spec, const RunOptions& opt) {
  const DistortionMatrix& d = need_distortion(spec, "dual");
  const double target = need_value(opt.distortion, "dual", "--distortion");
  const LogBase units = units_of(spec, opt);
  dual::DualConfig cfg;
  if (spec.solver.lambda_grid) cfg.grid = *spec.solver.lambda_grid;
  const dual::DualResult r = dual::dual_rdf(spec.source, d, target, cfg);

  Json j;
  j["meta"] = meta("dual", spec, opt);
  j["units"] = to_string(units);
  j["distortion"] = target;
  j["rate"] = to_units(r.rate, units);
  j["lambda"] = r.lambda;
  j["lambda_units"] = "nats per distortion unit";
  Json mu = Json::array();
  for (Eigen::Index i = 0; i < r.mu.size(); ++i) mu.push_back(r.mu(i));
  j["mu"] = std::move(mu);
  j["connected"] = r.connected;
  if (r.lower_boundary) j["lower_boundary"] = *r.lower_boundary;

  CsvTable samples({"lambda", "feasible"});
  std::size_t feasible = 0;
  for (const dual::TiltSolution& t : r.samples) {
    samples.add_row({t.lambda}, {t.feasible ? "true" : "false"});
    feasible += t.feasible ? 1 : 0;
  }
  j["grid_points"] = r.samples.size();
  j["feasible_points"] = feasible;
  Bundle b{"dual", sanitize(j), {}, {}};
  b.tables.emplace_back("lambda_samples.csv", std::move(samples));
  return b;
}

Bundle cmd_translate(const ProblemSpec& spec, const RunOptions& opt) {
  const DistortionMatrix& d = need_distortion(spec, "translate");
  const double lambda0 = need_value(opt.lambda0, "translate", "--lambda0");
  if (!(lambda0 > 0.0)) throw ValidationError("translate: --lambda0 must be > 0");
  const LogBase units = units_of(spec, opt);
  const Pmf& p = spec.source;
  const dual::Translation tr = dual::translate_to_loglik(p, d, lambda0);

  const ba::BaConfig cfg = ba_config(spec);
  const DistortionMatrix d_ll = loglik::loglik_distortion(tr.channel);
  const FeasibleRange classical = loglik::feasible_range(p, d);
  const FeasibleRange translated = loglik::feasible_range(p, d_ll);
  CsvTable table({"D", "D_translated", "R", "R_loglik", "abs_diff"});
  double worst = 0.0;
  for (double target : linear_grid(classical.d_min, classical.d_max, 10)) {
    const ba::RdPoint a = ba::rd_at_distortion(p, d, target, cfg);
    const double image = std::clamp(tr.map.forward(target), translated.d_min, translated.d_max);
    const ba::RdPoint b = ba::rd_at_distortion(p, d_ll, image, cfg);
    const double diff = std::abs(a.rate - b.rate);
    worst = std::max(worst, diff);
    table.add_row({target, to_units(image, units), to_units(a.rate, units), to_units(b.rate, units),
                   to_units(diff, units)});
  }

  Json j;
  j["meta"] = meta("translate", spec, opt);
  j["units"] = to_string(units);
  j["lambda0"] = lambda0;
  j["offset"] = to_units(tr.map.offset, units);
  j["map"] = "D_translated = lambda0 * D + offset";
  j["channel"] = {{"inputs", tr.channel.input_alphabet()},
                  {"outputs", tr.channel.output_alphabet()},
                  {"matrix", matrix_json(tr.channel.matrix())}};
  j["max_abs_diff"] = to_units(worst, units);
  Bundle b{"translate", sanitize(j), {}, {}};
  b.tables.emplace_back("equivalence.csv", std::move(table));
  return b;
}

Bundle cmd_rdp(const ProblemSpec& spec, const RunOptions& opt) {
  const DistortionMatrix& d = need_distortion(spec, "rdp");
  const double target = need_value(opt.distortion, "rdp", "--distortion");
  const LogBase units = units_of(spec, opt);
  rdp::PipelineConfig cfg;
  if (spec.solver.restarts) cfg.restarts = *spec.solver.restarts;
  if (spec.solver.factor_iters) cfg.iters = *spec.solver.factor_iters;
  cfg.seed = opt.seed.value_or(spec.solver.seed.value_or(0));
  const rdp::PipelineResult r = rdp::run_pipeline(spec.source, d, target, cfg);

  Json j;
  j["meta"] = meta("rdp", spec, opt);
  j["units"] = to_string(units);
  j["distortion_target"] = target;
  j["distortion"] = r.solution.distortion;
  j["lambda"] = r.solution.lambda;
  j["rate"] = to_units(r.solution.rate, units);
  j["coupling"] = matrix_json(r.solution.coupling.matrix());
  Json pot = Json::object();
  for (std::size_t i = 0; i < spec.source.size(); ++i) {
    const double v = r.solution.potential(static_cast<Eigen::Index>(i));
    if (std::isfinite(v)) pot[spec.source.alphabet()[i]] = v;
  }
  j["potentials"] = std::move(pot);
  j["sinkhorn_sweeps"] = r.solution.sweeps;
  j["cp"] = {{"method", rdp::to_string(r.scaled.method)},
             {"rank", r.scaled.b.cols()},
             {"base_residual", r.base.residual},
             {"residual", r.scaled.residual},
             {"factor", matrix_json(r.scaled.b)}};
  j["latent"] = {{"p_z", pmf_json(r.scheme.p_z)},
                 {"x_given_z", matrix_json(r.scheme.x_given_z.matrix())},
                 {"target_distortion", to_units(r.scheme.target_distortion, units)},
                 {"mixture_residual", r.scheme.mixture_residual}};
  Json checks = Json::array();
  for (const rdp::Check& c : r.report.checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"value", c.value},
                      {"expected", c.expected},
                      {"tolerance", c.tolerance}});
  }
  j["checks"] = std::move(checks);
  j["checks_units"] = "nats";
  j["passed"] = r.report.passed();
  return {"rdp", sanitize(j), {}, r.report.first_failure()};
}

Bundle cmd_reproduce(const std::string& figure, const RunOptions& opt) {
  const ProblemSpec spec = builtin_spec(figure);
  const LogBase units = units_of(spec, opt);
  const Pmf& p = spec.source;
  const Channel& ch = *spec.channel;
  const std::size_t points = opt.points.value_or(*spec.solver.points);
  CurveRun run = loglik_curve(p, ch, points, ba_config(spec), units);

  const FeasibleRange range = loglik::feasible_range(p, ch);
  const loglik::ConsistencyReport cons = loglik::consistency_polytope(p, ch);
  Json m;
  m["figure"] = figure;
  m["units"] = to_string(units);
  m["d_min"] = to_units(range.d_min, units);
  m["d_max"] = to_units(range.d_max, units);
  m["H_X"] = entropy(p, units);
  if (figure == "fig2") {
    m["d_star"] = to_units(cons.d_star_min, units);
  } else {
    m["d_star_min"] = to_units(cons.d_star_min, units);
    m["d_star_max"] = to_units(cons.d_star_max, units);
  }
  Bundle b{"reproduce", sanitize(m), {}, {}};
  b.tables.emplace_back(figure + ".csv", std::move(run.table));
  return b;
}

void emit(const Bundle& bundle, const std::optional<std::string>& out_dir, std::ostream& os) {
  if (out_dir) {
    namespace fs = std::filesystem;
    const fs::path dir(*out_dir);
    const std::string json_name = bundle.command == "reproduce" ? "markers.json" : bundle.command + ".json";
    write_atomic((dir / json_name).string(), bundle.json.dump(2) + "\n");
    for (const auto& [name, table] : bundle.tables) write_atomic((dir / name).string(), table.str());
    return;
  }
  if (bundle.command == "curve" && !bundle.tables.empty()) {
    os << bundle.tables.front().second.str();
    return;
  }
  os << bundle.json.dump(2) << "\n";
}

}  // namespace llrd::cli
