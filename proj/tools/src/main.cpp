#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "llrd/cli/commands.hpp"
#include "llrd/errors.hpp"

namespace {

enum Exit { kOk = 0, kOther = 1, kValidation = 2, kConvergence = 3, kInapplicable = 4 };

struct Flags {
  std::string spec;
  std::string units;
  std::string out;
  std::string figure;
  std::optional<std::size_t> points;
  std::optional<double> lambda0;
  std::optional<double> distortion;
  std::optional<std::uint64_t> seed;
};

llrd::cli::RunOptions options(const Flags& f) {
  llrd::cli::RunOptions o;
  if (!f.units.empty()) o.units = llrd::parse_log_base(f.units);
  o.points = f.points;
  o.lambda0 = f.lambda0;
  o.distortion = f.distortion;
  o.seed = f.seed;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"llrd: log-likelihood rate-distortion toolkit"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&](CLI::App* sub, bool needs_spec) {
    auto* spec = sub->add_option("--spec", f.spec, "Problem spec (JSON)")->check(CLI::ExistingFile);
    if (needs_spec) spec->required();
    sub->add_option("--units", f.units, "Reporting units")->check(CLI::IsMember({"bits", "nats"}));
    sub->add_option("--out", f.out, "Output directory");
    sub->add_option("--seed", f.seed, "RNG seed");
  };

  auto* analyze = app.add_subcommand("analyze", "Feasible range, rate at d_min, consistency and D*");
  add_common(analyze, true);
  auto* curve = app.add_subcommand("curve", "Log-likelihood R(D) curve as CSV");
  add_common(curve, true);
  curve->add_option("--points", f.points, "Number of distortion grid points")->check(CLI::PositiveNumber);
  auto* dual = app.add_subcommand("dual", "Single-parameter dual form at one distortion");
  add_common(dual, true);
  dual->add_option("--distortion", f.distortion, "Target distortion")->required();
  auto* translate = app.add_subcommand("translate", "Translate a classical distortion to log-likelihood");
  add_common(translate, true);
  translate->add_option("--lambda0", f.lambda0, "Tilt slope")->required();
  auto* rdp = app.add_subcommand("rdp", "Perfect-perception pipeline and latent scheme");
  add_common(rdp, true);
  rdp->add_option("--distortion", f.distortion, "Target distortion")->required();
  auto* reproduce = app.add_subcommand("reproduce", "Write figure CSV and markers.json");
  add_common(reproduce, false);
  reproduce->add_option("--figure", f.figure, "Figure")->required()->check(CLI::IsMember({"fig2", "fig3"}));
  reproduce->add_option("--points", f.points, "Number of distortion grid points")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  try {
    using namespace llrd::cli;
    const RunOptions opt = options(f);
    std::optional<std::string> out;
    if (!f.out.empty()) out = f.out;
    Bundle b;
    if (reproduce->parsed()) {
      b = cmd_reproduce(f.figure, opt);
      if (!out) out = ".";
    } else {
      const ProblemSpec spec = load_spec(f.spec);
      if (analyze->parsed()) b = cmd_analyze(spec, opt);
      if (curve->parsed()) b = cmd_curve(spec, opt);
      if (dual->parsed()) b = cmd_dual(spec, opt);
      if (translate->parsed()) b = cmd_translate(spec, opt);
      if (rdp->parsed()) b = cmd_rdp(spec, opt);
    }
    emit(b, out, std::cout);
    if (!b.failed_check.empty()) {
      std::cerr << "llrd: verification check '" << b.failed_check << "' failed\n";
      return kConvergence;
    }
    return kOk;
  } catch (const llrd::ValidationError& e) {
    std::cerr << "llrd: invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const llrd::ConvergenceError& e) {
    std::cerr << "llrd: solver did not converge: " << e.what() << "\n";
    return kConvergence;
  } catch (const llrd::InapplicableError& e) {
    std::cerr << "llrd: " << e.what() << "\n";
    return kInapplicable;
  } catch (const std::exception& e) {
    std::cerr << "llrd: " << e.what() << "\n";
    return kOther;
  }
}
