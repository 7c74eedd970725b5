#include "llrd/dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "llrd/errors.hpp"
#include "llrd/lp.hpp"

namespace llrd::dual {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd tilt_kernel(const DistortionMatrix& d, double lambda) {
  Eigen::MatrixXd v(d.values().rows(), d.values().cols());
  for (Eigen::Index x = 0; x < v.rows(); ++x)
    for (Eigen::Index y = 0; y < v.cols(); ++y) {
      const double e = d.values()(x, y);
      v(x, y) = std::isfinite(e) ? std::exp(-lambda * e) : 0.0;
    }
  return v;
}

double binary_entropy(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return -t * std::log(t) - (1.0 - t) * std::log(1.0 - t);
}

std::string interval_text(const Interval& r) {
  std::ostringstream os;
  os.precision(12);
  os << (r.lo_open ? "(" : "[") << r.lo << ", " << r.hi << "]";
  return os.str();
}

}  // namespace

MuSolution solve_mu(const DistortionMatrix& d, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("solve_mu: lambda must be > 0");
  const Eigen::MatrixXd system = tilt_kernel(d, lambda).transpose();  // (y, x)
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(system.rows());

  MuSolution out;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  lu.setThreshold(1e-12);
  if (lu.rank() == system.cols()) {
    out.mu = system.colPivHouseholderQr().solve(ones);
    out.residual = (system * out.mu - ones).cwiseAbs().maxCoeff();
    if (out.residual > kResidualTolerance) {
      out.diagnostic = "normalization system is inconsistent (residual " +
                       std::to_string(out.residual) + ")";
      return out;
    }
    if (out.mu.minCoeff() < -kNegativeSlack) {
      out.diagnostic = "normalizer has a negative component";
      return out;
    }
    out.mu = out.mu.cwiseMax(0.0);
    out.feasible = true;
    return out;
  }

  // Several solutions: look for a nonnegative one.
  out.unique = false;
  LpProblem lp{system, ones, std::nullopt, LpSense::minimize};
  const LpSolution sol = lp_solve(lp);
  if (sol.status != LpStatus::feasible) {
    out.diagnostic = "no nonnegative normalizer";
    return out;
  }
  out.mu = sol.witness;
  out.residual = sol.residual;
  out.feasible = true;
  return out;
}

TiltSolution coupling_feasible(const Pmf& p, const DistortionMatrix& d, double lambda,
                               const Eigen::VectorXd& mu) {
  if (p.alphabet() != d.source_alphabet()) throw ValidationError("coupling_feasible: alphabet mismatch");
  if (static_cast<std::size_t>(mu.size()) != p.size()) {
    throw ValidationError("coupling_feasible: mu has wrong length");
  }
  TiltSolution out;
  out.lambda = lambda;
  out.mu = mu;
  const Eigen::MatrixXd v = tilt_kernel(d, lambda);
  out.normalization_residual = (v.transpose() * mu - Eigen::VectorXd::Ones(v.cols())).cwiseAbs().maxCoeff();
  if (out.normalization_residual > kResidualTolerance || mu.minCoeff() < -kNegativeSlack) {
    out.diagnostic = "mu does not normalize the tilt";
    return out;
  }

  std::vector<Eigen::Index> rows;
  Eigen::VectorXd targets(v.rows());
  for (Eigen::Index x = 0; x < v.rows(); ++x) {
    const double px = p[static_cast<std::size_t>(x)];
    if (mu(x) <= 0.0) {
      if (px > 0.0) {
        out.diagnostic = "mu vanishes on source symbol " + std::to_string(x);
        return out;
      }
      continue;
    }
    rows.push_back(x);
    targets(x) = px / mu(x);
  }

  const auto m = static_cast<Eigen::Index>(rows.size());
  LpProblem lp;
  lp.a.resize(m + 1, v.cols());
  lp.b.resize(m + 1);
  for (Eigen::Index k = 0; k < m; ++k) {
    lp.a.row(k) = v.row(rows[static_cast<std::size_t>(k)]);
    lp.b(k) = targets(rows[static_cast<std::size_t>(k)]);
  }
  lp.a.row(m).setOnes();
  lp.b(m) = 1.0;
  LpSolution sol;
  try {
    sol = lp_solve(lp);
  } catch (const ConvergenceError& e) {
    out.diagnostic = std::string("coupling LP is numerically borderline: ") + e.what();
    return out;
  }
  if (sol.status != LpStatus::feasible) {
    out.diagnostic = "no output marginal reproduces the source";
    return out;
  }

  // Independent re-check of both residual systems.
  double coupling = 0.0;
  for (Eigen::Index x : rows) {
    coupling = std::max(coupling, std::abs(v.row(x).dot(sol.witness) - targets(x)));
  }
  out.coupling_residual = coupling;
  if (coupling > kResidualTolerance) {
    out.diagnostic = "coupling residual too large";
    return out;
  }
  out.q_y = Pmf::normalized(d.recon_alphabet(), sol.witness);
  out.feasible = true;
  return out;
}

TiltSolution tilt_at(const Pmf& p, const DistortionMatrix& d, double lambda) {
  const MuSolution mu = solve_mu(d, lambda);
  if (!mu.feasible) {
    TiltSolution out;
    out.lambda = lambda;
    out.mu = mu.mu;
    out.normalization_residual = mu.residual;
    out.diagnostic = mu.diagnostic;
    return out;
  }
  return coupling_feasible(p, d, lambda, mu.mu);
}

std::vector<TiltSolution> lambda_feasible_set(const Pmf& p, const DistortionMatrix& d,
                                              const std::vector<double>& grid) {
  std::vector<TiltSolution> out;
  out.reserve(grid.size());
  for (double lambda : grid) out.push_back(tilt_at(p, d, lambda));
  return out;
}

std::vector<double> default_lambda_grid(const DistortionMatrix& d, std::size_t n) {
  const double scale = d.max_finite() > 0.0 ? d.max_finite() : 1.0;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    grid[i] = std::pow(10.0, -2.0 + 4.0 * t) / scale;
  }
  return grid;
}

double refine_feasibility_boundary(const Pmf& p, const DistortionMatrix& d, double infeasible,
                                   double feasible, int steps) {
  for (int i = 0; i < steps; ++i) {
    const double mid = 0.5 * (infeasible + feasible);
    if (tilt_at(p, d, mid).feasible) {
      feasible = mid;
    } else {
      infeasible = mid;
    }
  }
  return feasible;
}

double dual_objective(const Pmf& p, const Eigen::VectorXd& mu, double lambda, double distortion) {
  double e_log_mu = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] <= 0.0) continue;
    const double m = mu(static_cast<Eigen::Index>(x));
    if (m <= 0.0) return -kInf;
    e_log_mu += p[x] * std::log(m);
  }
  return entropy(p) + e_log_mu - lambda * distortion;
}

DualResult dual_rdf(const Pmf& p, const DistortionMatrix& d, double distortion,
                    const DualConfig& cfg) {
  const FeasibleRange range = loglik::feasible_range(p, d);
  if (distortion < range.d_min - 1e-12 || distortion > range.d_max + 1e-12) {
    std::ostringstream os;
    os.precision(12);
    os << "dual_rdf: distortion " << distortion << " outside [" << range.d_min << ", "
       << range.d_max << "]";
    throw ValidationError(os.str());
  }
  std::vector<double> grid = cfg.grid.empty() ? default_lambda_grid(d) : cfg.grid;
  std::sort(grid.begin(), grid.end());

  DualResult out;
  out.samples = lambda_feasible_set(p, d, grid);
  std::size_t best = grid.size();
  double best_g = -kInf;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!out.samples[i].feasible) continue;
    const double g = dual_objective(p, out.samples[i].mu, grid[i], distortion);
    if (g > best_g) {
      best_g = g;
      best = i;
    }
  }
  if (best == grid.size()) {
    throw InapplicableError("dual form inapplicable: no feasible tilt slope on the grid");
  }

  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (out.samples[i].feasible && !out.samples[i - 1].feasible) {
      out.lower_boundary = refine_feasibility_boundary(p, d, grid[i - 1], grid[i]);
      break;
    }
  }

  auto bracket_end = [&](std::size_t neighbour) {
    return out.samples[neighbour].feasible
               ? grid[neighbour]
               : refine_feasibility_boundary(p, d, grid[neighbour], grid[best]);
  };
  double left = best > 0 ? bracket_end(best - 1) : grid[best];
  double right = best + 1 < grid.size() ? bracket_end(best + 1) : grid[best];

  double arg = grid[best];
  double value = best_g;
  Eigen::VectorXd arg_mu = out.samples[best].mu;
  auto g_at = [&](double lambda) {
    const TiltSolution t = tilt_at(p, d, lambda);
    if (!t.feasible) {
      out.connected = false;
      return -kInf;
    }
    const double g = dual_objective(p, t.mu, lambda, distortion);
    if (g > value) {
      value = g;
      arg = lambda;
      arg_mu = t.mu;
    }
    return g;
  };

  // Golden-section maximization of the concave objective on [left, right].
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = left;
  double b = right;
  double c = b - inv_phi * (b - a);
  double e = a + inv_phi * (b - a);
  double gc = g_at(c);
  double ge = g_at(e);
  g_at(a);
  g_at(b);
  while (b - a > cfg.relative_width * std::max(std::abs(b), 1e-300)) {
    if (gc >= ge) {
      b = e;
      e = c;
      ge = gc;
      c = b - inv_phi * (b - a);
      gc = g_at(c);
    } else {
      a = c;
      c = e;
      gc = ge;
      e = a + inv_phi * (b - a);
      ge = g_at(e);
    }
  }

  out.rate = std::max(value, 0.0);
  out.lambda = arg;
  out.mu = arg_mu;
  return out;
}

Translation translate_to_loglik(const Pmf& p, const DistortionMatrix& d, double lambda0) {
  Translation out;
  out.tilt = tilt_at(p, d, lambda0);
  if (!out.tilt.feasible) {
    throw InapplicableError("translate_to_loglik: slope " + std::to_string(lambda0) +
                            " admits no coupling (" + out.tilt.diagnostic + ")");
  }
  const Eigen::MatrixXd v = tilt_kernel(d, lambda0);
  Eigen::MatrixXd channel = out.tilt.mu.asDiagonal() * v;  // (x, u)
  out.channel = Channel::normalized(d.recon_alphabet(), d.source_alphabet(), std::move(channel));
  out.map.lambda0 = lambda0;
  double e_log_mu = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] > 0.0) e_log_mu += p[x] * std::log(out.tilt.mu(static_cast<Eigen::Index>(x)));
  }
  out.map.offset = -e_log_mu;
  return out;
}

// ---------------------------------------------------------------------------
// Closed forms

ClosedForm ClosedForm::binary_hamming(double p, std::optional<double> lambda0) {
  if (!(p > 0.0 && p <= 0.5)) throw ValidationError("binary_hamming: p must lie in (0, 1/2]");
  ClosedForm cf{Family::binary_hamming, p, lambda0};
  if (lambda0 && !(*lambda0 >= cf.lambda_lower() - 1e-12 && *lambda0 > 0.0)) {
    throw ValidationError("binary_hamming: lambda0 below log((1-p)/p)");
  }
  return cf;
}

ClosedForm ClosedForm::gaussian_mse(double variance, std::optional<double> lambda0) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw ValidationError("gaussian_mse: variance must be > 0");
  }
  ClosedForm cf{Family::gaussian_mse, variance, lambda0};
  if (lambda0 && !(*lambda0 > cf.lambda_lower())) {
    throw ValidationError("gaussian_mse: lambda0 must exceed 1/(2 sigma^2)");
  }
  return cf;
}

double ClosedForm::lambda_lower() const {
  if (family == Family::binary_hamming) return std::log((1.0 - parameter) / parameter);
  return 1.0 / (2.0 * parameter);
}

Interval closed_form_range(const ClosedForm& cf) {
  if (cf.family == Family::binary_hamming) {
    const double p = cf.parameter;
    if (!cf.lambda0) return {0.0, p, false};
    const double l0 = *cf.lambda0;
    const double shift = std::log1p(std::exp(-l0));
    return {shift, l0 * p + shift, false};
  }
  const double s2 = cf.parameter;
  if (!cf.lambda0) return {0.0, s2, true};
  const double l0 = *cf.lambda0;
  const double shift = 0.5 * std::log(std::numbers::pi / l0);
  return {shift, s2 * l0 + shift, true};
}

double closed_form_eval(const ClosedForm& cf, double distortion, LogBase base) {
  const Interval r = closed_form_range(cf);
  const double slack = 1e-12 * (1.0 + std::abs(r.hi));
  const bool below = r.lo_open ? distortion <= r.lo : distortion < r.lo - slack;
  if (below || distortion > r.hi + slack || std::isnan(distortion)) {
    std::ostringstream os;
    os.precision(12);
    os << "closed_form_eval: distortion " << distortion << " outside " << interval_text(r);
    throw ValidationError(os.str());
  }
  distortion = std::min(distortion, r.hi);

  double rate = 0.0;
  if (cf.family == Family::binary_hamming) {
    const double p = cf.parameter;
    double classical = distortion;
    if (cf.lambda0) classical = (distortion - std::log1p(std::exp(-*cf.lambda0))) / *cf.lambda0;
    classical = std::clamp(classical, 0.0, p);
    rate = binary_entropy(p) - binary_entropy(classical);
  } else {
    const double s2 = cf.parameter;
    if (cf.lambda0) {
      const double l0 = *cf.lambda0;
      rate = 0.5 * std::log(s2 * l0 / (distortion + 0.5 * std::log(l0 / std::numbers::pi)));
    } else {
      rate = 0.5 * std::log(s2 / distortion);
    }
  }
  return to_units(std::max(rate, 0.0), base);
}

}  // namespace llrd::dual
