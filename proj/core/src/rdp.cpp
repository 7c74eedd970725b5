#include "llrd/rdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "llrd/errors.hpp"
#include "llrd/lp.hpp"

namespace llrd::rdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_square_symmetric(const Pmf& p, const DistortionMatrix& d, const char* who) {
  if (d.source_size() != d.recon_size()) {
    throw ValidationError(std::string(who) + ": distortion matrix must be square");
  }
  if (!d.is_symmetric(1e-12)) throw ValidationError(std::string(who) + ": distortion must be symmetric");
  if (p.alphabet() != d.source_alphabet()) {
    throw ValidationError(std::string(who) + ": source alphabet does not match distortion rows");
  }
}

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

PerceptionSolution sinkhorn(const Pmf& p, const DistortionMatrix& d, double lambda,
                            const PerceptionConfig& cfg) {
  require_square_symmetric(p, d, "sinkhorn");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("sinkhorn: lambda must be >= 0");
  const auto n = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd cost(n, n);  // log kernel
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) {
      const double e = d.values()(x, y);
      cost(x, y) = std::isfinite(e) ? -lambda * e : -kInf;
    }
  Eigen::VectorXd log_p(n);
  for (Eigen::Index i = 0; i < n; ++i) log_p(i) = p[static_cast<std::size_t>(i)] > 0.0 ? std::log(p[static_cast<std::size_t>(i)]) : -kInf;

  PerceptionSolution out;
  out.lambda = lambda;
  out.a = Eigen::VectorXd::Zero(n);
  out.b = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(log_p(i))) out.a(i) = out.b(i) = -kInf;
  }

  auto plan = [&]() {
    Eigen::MatrixXd w(n, n);
    for (Eigen::Index x = 0; x < n; ++x)
      for (Eigen::Index y = 0; y < n; ++y) {
        const double l = out.a(x) + out.b(y) + cost(x, y);
        w(x, y) = std::isfinite(l) ? std::exp(l) : 0.0;
      }
    return w;
  };

  Eigen::VectorXd tmp(n);
  double err = kInf;
  std::size_t sweep = 0;
  for (; sweep < cfg.max_sweeps; ++sweep) {
    for (Eigen::Index x = 0; x < n; ++x) {
      if (!std::isfinite(log_p(x))) continue;
      tmp = out.b + cost.row(x).transpose();
      out.a(x) = log_p(x) - log_sum_exp(tmp);
    }
    for (Eigen::Index y = 0; y < n; ++y) {
      if (!std::isfinite(log_p(y))) continue;
      tmp = out.a + cost.col(y);
      out.b(y) = log_p(y) - log_sum_exp(tmp);
    }
    if (!out.a.allFinite() && (out.a.array() == kInf).any()) break;
    // Columns are exact after the b update; rows carry the error.
    err = 0.0;
    for (Eigen::Index x = 0; x < n; ++x) {
      if (!std::isfinite(log_p(x))) continue;
      tmp = out.b + cost.row(x).transpose();
      err = std::max(err, std::abs(std::exp(out.a(x) + log_sum_exp(tmp)) - p[static_cast<std::size_t>(x)]));
    }
    if (err <= cfg.marginal_tol) break;
  }
  out.sweeps = sweep + 1;
  out.marginal_error = err;
  if (!(err <= cfg.marginal_tol)) {
    Eigen::MatrixXd w = plan();
    std::ostringstream os;
    os << "sinkhorn: marginals not reached after " << out.sweeps << " sweeps (max deviation "
       << fmt(err) << ") at lambda " << fmt(lambda) << "; row sums";
    for (Eigen::Index x = 0; x < n; ++x) os << ' ' << fmt(w.row(x).sum());
    os << " vs source";
    for (Eigen::Index x = 0; x < n; ++x) os << ' ' << fmt(p[static_cast<std::size_t>(x)]);
    throw ConvergenceError(os.str());
  }

  // Fix the additive gauge so that a and b agree on average over the support,
  // then symmetrize.
  double shift = 0.0;
  std::size_t support = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(log_p(i))) continue;
    shift += out.a(i) - out.b(i);
    ++support;
  }
  shift /= 2.0 * static_cast<double>(support);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(log_p(i))) continue;
    out.a(i) -= shift;
    out.b(i) += shift;
  }
  out.potential = Eigen::VectorXd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.potential(i) = std::isfinite(log_p(i)) ? 0.5 * (out.a(i) + out.b(i)) : -kInf;
  }

  Eigen::MatrixXd w = plan();
  w /= w.sum();
  out.coupling = Joint(d.source_alphabet(), d.recon_alphabet(), std::move(w));
  out.rate = detail::mutual_information_nats(out.coupling.matrix());
  double dist = 0.0;
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y)
      if (out.coupling.matrix()(x, y) > 0.0) dist += out.coupling.matrix()(x, y) * d.values()(x, y);
  out.distortion = dist;
  return out;
}

double min_coupling_distortion(const Pmf& p, const DistortionMatrix& d) {
  const auto n = static_cast<Eigen::Index>(p.size());
  std::vector<std::pair<Eigen::Index, Eigen::Index>> vars;
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y)
      if (std::isfinite(d.values()(x, y))) vars.emplace_back(x, y);
  LpProblem lp;
  lp.a = Eigen::MatrixXd::Zero(2 * n, static_cast<Eigen::Index>(vars.size()));
  lp.b.resize(2 * n);
  Eigen::VectorXd c(static_cast<Eigen::Index>(vars.size()));
  for (std::size_t k = 0; k < vars.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    lp.a(vars[k].first, col) = 1.0;
    lp.a(n + vars[k].second, col) = 1.0;
    c(col) = d.values()(vars[k].first, vars[k].second);
  }
  lp.b << p.probs(), p.probs();
  lp.objective = c;
  const LpSolution sol = lp_solve(lp);
  if (sol.status != LpStatus::feasible) return kInf;
  return sol.objective;
}

PerceptionSolution solve_perfect_perception(const Pmf& p, const DistortionMatrix& d,
                                            double distortion, const PerceptionConfig& cfg) {
  require_square_symmetric(p, d, "solve_perfect_perception");
  if (!std::isfinite(distortion) || distortion < 0.0) {
    throw ValidationError("solve_perfect_perception: distortion must be finite and >= 0");
  }
  const double floor = min_coupling_distortion(p, d);
  if (!std::isfinite(floor) || distortion < floor - 1e-12) {
    throw ValidationError("solve_perfect_perception: distortion " + fmt(distortion) +
                          " below the smallest achievable " + fmt(floor) +
                          " for couplings with both marginals equal to the source");
  }

  double independent = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x)
    for (std::size_t y = 0; y < p.size(); ++y)
      if (p[x] > 0.0 && p[y] > 0.0) independent += p[x] * p[y] * d(x, y);
  if (distortion >= independent) return sinkhorn(p, d, 0.0, cfg);

  const double scale = d.max_finite() > 0.0 ? d.max_finite() : 1.0;
  double lo = 0.0;
  double hi = 1.0 / scale;
  PerceptionSolution best = sinkhorn(p, d, hi, cfg);
  while (best.distortion > distortion + cfg.distortion_tol) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6 / scale) {
      throw ConvergenceError("solve_perfect_perception: slope search diverged at distortion " +
                             fmt(distortion));
    }
    best = sinkhorn(p, d, hi, cfg);
  }
  for (std::size_t i = 0; i < cfg.max_bisections; ++i) {
    if (std::abs(best.distortion - distortion) <= cfg.distortion_tol) return best;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    PerceptionSolution s = sinkhorn(p, d, mid, cfg);
    if (s.distortion > distortion) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (std::abs(s.distortion - distortion) < std::abs(best.distortion - distortion) ||
        s.distortion <= distortion) {
      best = std::move(s);
    }
  }
  if (std::abs(best.distortion - distortion) > cfg.distortion_tol) {
    throw ConvergenceError("solve_perfect_perception: achieved distortion " + fmt(best.distortion) +
                           " does not meet target " + fmt(distortion));
  }
  return best;
}

std::string to_string(CpMethod m) {
  return m == CpMethod::hamming_explicit ? "hamming_explicit" : "numeric";
}

Eigen::MatrixXd cp_exponential_matrix(const DistortionMatrix& d, double lambda) {
  if (d.source_size() != d.recon_size() || !d.is_symmetric(0.0)) {
    throw ValidationError("cp_exponential_matrix: distortion must be square and symmetric");
  }
  if (!d.values().allFinite()) throw ValidationError("cp_exponential_matrix: distortion must be finite");
  if (!(lambda >= 0.0)) throw ValidationError("cp_exponential_matrix: lambda must be >= 0");
  return (-lambda * d.values().array()).exp().matrix();
}

CpFactorization hamming_cp_factor(std::size_t q, double lambda) {
  if (q < 2) throw ValidationError("hamming_cp_factor: alphabet size must be >= 2");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("hamming_cp_factor: lambda must be > 0");
  }
  const auto n = static_cast<Eigen::Index>(q);
  const double a = std::exp(-lambda);
  CpFactorization out;
  out.method = CpMethod::hamming_explicit;
  out.b = Eigen::MatrixXd::Zero(n, n + 1);
  out.b.col(0).setConstant(std::sqrt(a));
  out.b.rightCols(n).diagonal().setConstant(std::sqrt(1.0 - a));
  Eigen::MatrixXd target = Eigen::MatrixXd::Constant(n, n, a);
  target.diagonal().setOnes();
  out.residual = (out.b * out.b.transpose() - target).cwiseAbs().maxCoeff();
  return out;
}

CpFactorization cp_factor_numeric(const Eigen::MatrixXd& v, std::size_t rank, std::size_t restarts,
                                  std::size_t iters, std::uint64_t seed) {
  if (v.rows() != v.cols() || v.rows() == 0) throw ValidationError("cp_factor_numeric: matrix must be square");
  if (!v.allFinite() || (v.array() < 0.0).any()) {
    throw ValidationError("cp_factor_numeric: matrix must be finite and nonnegative");
  }
  if ((v - v.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ValidationError("cp_factor_numeric: matrix must be symmetric");
  }
  if (rank == 0) throw ValidationError("cp_factor_numeric: rank must be >= 1");
  const Eigen::Index n = v.rows();
  const auto r = static_cast<Eigen::Index>(rank);

  std::mt19937_64 rng(seed);
  const double scale = std::sqrt(std::max(v.mean(), 1e-300) / static_cast<double>(rank));
  std::uniform_real_distribution<double> unif(0.1, 1.0);

  CpFactorization best;
  best.residual = kInf;
  for (std::size_t start = 0; start < std::max<std::size_t>(restarts, 1); ++start) {
    Eigen::MatrixXd b(n, r);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < r; ++j) b(i, j) = scale * unif(rng);
    for (std::size_t it = 0; it < iters; ++it) {
      const Eigen::MatrixXd num = v * b;
      const Eigen::MatrixXd den = b * (b.transpose() * b);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < r; ++j) {
          if (den(i, j) > 0.0) b(i, j) *= 0.5 + 0.5 * num(i, j) / den(i, j);
        }
    }
    const double res = (b * b.transpose() - v).cwiseAbs().maxCoeff();
    if (res < best.residual) {
      best.b = b;
      best.residual = res;
    }
  }
  best.method = CpMethod::numeric;
  return best;
}

CpFactorization scale_factorization_to_coupling(const Eigen::MatrixXd& w,
                                                const CpFactorization& base,
                                                const Eigen::VectorXd& phi) {
  if (w.rows() != w.cols() || w.rows() != base.b.rows() || phi.size() != w.rows()) {
    throw ValidationError("scale_factorization_to_coupling: shape mismatch");
  }
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ValidationError("scale_factorization_to_coupling: coupling is not symmetric");
  }
  if ((phi.array() < 0.0).any() || !phi.allFinite()) {
    throw ValidationError("scale_factorization_to_coupling: scaling must be finite and nonnegative");
  }
  CpFactorization out;
  out.method = base.method;
  out.b = phi.asDiagonal() * base.b;
  out.residual = (out.b * out.b.transpose() - w).cwiseAbs().maxCoeff();
  return out;
}

LatentScheme construct_latent(const CpFactorization& factor) {
  if (!(factor.residual <= kMaxLatentResidual)) {
    throw ValidationError("construct_latent: factorization residual " + fmt(factor.residual) +
                          " exceeds " + fmt(kMaxLatentResidual));
  }
  const Eigen::MatrixXd& b = factor.b;
  if ((b.array() < 0.0).any()) throw ValidationError("construct_latent: factor has negative entries");
  const Eigen::Index n = b.rows();

  LatentScheme out;
  for (Eigen::Index z = 0; z < b.cols(); ++z) {
    if (b.col(z).sum() >= 1e-12) out.kept_columns.push_back(static_cast<std::size_t>(z));
  }
  if (out.kept_columns.empty()) throw ValidationError("construct_latent: factor has no mass");
  const auto k = static_cast<Eigen::Index>(out.kept_columns.size());

  Eigen::VectorXd pz(k);
  Eigen::MatrixXd xz(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto col = b.col(static_cast<Eigen::Index>(out.kept_columns[static_cast<std::size_t>(j)]));
    const double s = col.sum();
    pz(j) = s * s;
    xz.col(j) = col / s;
  }
  Eigen::MatrixXd mixture = xz * pz.asDiagonal() * xz.transpose();
  out.mixture_residual = (mixture - b * b.transpose()).cwiseAbs().maxCoeff();

  Alphabet z_labels;
  for (std::size_t c : out.kept_columns) z_labels.push_back("z" + std::to_string(c));
  const Alphabet x_labels = make_alphabet(static_cast<std::size_t>(n));
  out.p_z = Pmf::normalized(z_labels, pz);
  out.x_given_z = Channel::normalized(z_labels, x_labels, xz);

  const Joint xz_joint = joint_from(out.p_z, out.x_given_z);  // rows X, cols Z
  out.p_x = marginal_row(xz_joint);
  for (std::size_t x = 0; x < out.p_x.size(); ++x) {
    if (out.p_x[x] <= 0.0) {
      throw ValidationError("construct_latent: symbol " + std::to_string(x) + " has zero marginal");
    }
  }
  out.z_given_x = bayes_reverse(xz_joint).channel;
  out.target_distortion = conditional_entropy(transpose(xz_joint));
  return out;
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::string VerifyReport::first_failure() const {
  for (const Check& c : checks)
    if (!c.passed) return c.name;
  return {};
}

VerifyReport verify_scheme(const LatentScheme& scheme, const Pmf& p, const DistortionMatrix& d,
                           double distortion, double rate) {
  if (p.size() != scheme.p_x.size() || d.source_size() != p.size() || d.recon_size() != p.size()) {
    throw ValidationError("verify_scheme: scheme and problem sizes differ");
  }
  const Eigen::MatrixXd& zx = scheme.z_given_x.matrix();  // (z, x)
  const Eigen::MatrixXd& xz = scheme.x_given_z.matrix();  // (y, z)
  const Eigen::MatrixXd induced = p.probs().asDiagonal() * zx.transpose() * xz.transpose();  // (x, y)

  VerifyReport report;
  const Eigen::VectorXd p_y = induced.colwise().sum().transpose();
  report.checks.push_back({"y_marginal", false, (p_y - p.probs()).cwiseAbs().maxCoeff(), 0.0, 1e-6});

  // Compress Z with its own log-likelihood loss; the decoder is P_{X|Z}.
  const Eigen::VectorXd q_z = zx * p.probs();
  const Pmf source_z = Pmf::normalized(scheme.p_z.alphabet(), q_z);
  const DistortionMatrix d_ll = loglik::loglik_distortion(scheme.z_given_x);
  const double achieved = expected_distortion(source_z, scheme.x_given_z, d_ll);
  report.checks.push_back({"loglik_distortion", false, achieved, scheme.target_distortion, 1e-6});

  double e_d = 0.0;
  for (Eigen::Index x = 0; x < induced.rows(); ++x)
    for (Eigen::Index y = 0; y < induced.cols(); ++y)
      if (induced(x, y) > 0.0) e_d += induced(x, y) * d.values()(x, y);
  report.checks.push_back({"distortion_budget", false, e_d, distortion, 1e-6});

  const double mi = detail::mutual_information_nats(induced / induced.sum());
  report.checks.push_back({"rate", false, mi, rate, 1e-4});

  Check& marg = report.checks[0];
  marg.passed = marg.value <= marg.tolerance;
  Check& ll = report.checks[1];
  ll.passed = std::abs(ll.value - ll.expected) <= ll.tolerance;
  Check& budget = report.checks[2];
  budget.passed = budget.value <= budget.expected + budget.tolerance;
  Check& r = report.checks[3];
  r.passed = std::abs(r.value - r.expected) <= r.tolerance;

  report.induced = Joint(d.source_alphabet(), d.recon_alphabet(), induced / induced.sum());
  return report;
}

double hamming_scale(const DistortionMatrix& d) {
  if (d.source_size() != d.recon_size() || d.source_size() < 2) return 0.0;
  const Eigen::MatrixXd& v = d.values();
  const double c = v(0, 1);
  if (!(c > 0.0) || !std::isfinite(c)) return 0.0;
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      const double want = i == j ? 0.0 : c;
      if (v(i, j) != want) return 0.0;
    }
  return c;
}

PipelineResult run_pipeline(const Pmf& p, const DistortionMatrix& d, double distortion,
                            const PipelineConfig& cfg) {
  PipelineResult out;
  auto stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(name) + ": " + e.what());
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(std::string(name) + ": " + e.what());
    }
  };

  out.solution = stage("perception", [&] { return solve_perfect_perception(p, d, distortion, cfg.perception); });
  const double lambda = out.solution.lambda;
  const double c = hamming_scale(d);
  out.base = stage("factorization", [&] {
    if (c > 0.0 && lambda > 0.0) return hamming_cp_factor(p.size(), lambda * c);
    const Eigen::MatrixXd v = cp_exponential_matrix(d, lambda);
    const std::size_t rank = lambda == 0.0 ? 1 : p.size() + 1;
    return cp_factor_numeric(v, rank, cfg.restarts, cfg.iters, cfg.seed);
  });

  Eigen::VectorXd phi(static_cast<Eigen::Index>(p.size()));
  for (Eigen::Index i = 0; i < phi.size(); ++i) phi(i) = std::exp(out.solution.potential(i));
  out.scaled = stage("scaling", [&] {
    return scale_factorization_to_coupling(out.solution.coupling.matrix(), out.base, phi);
  });
  out.scheme = stage("latent", [&] { return construct_latent(out.scaled); });
  out.report = stage("verify", [&] {
    return verify_scheme(out.scheme, p, d, distortion, out.solution.rate);
  });
  return out;
}

}  // namespace llrd::rdp
