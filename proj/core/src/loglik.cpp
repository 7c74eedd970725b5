#include "llrd/loglik.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "llrd/errors.hpp"
#include "llrd/lp.hpp"

namespace llrd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_source(const Pmf& p, const Alphabet& source, const char* what) {
  if (p.alphabet() != source) throw ValidationError(std::string(what) + ": source alphabet mismatch");
}

}  // namespace

DistortionMatrix::DistortionMatrix(Alphabet source, Alphabet recon, Eigen::MatrixXd values)
    : source_(std::move(source)), recon_(std::move(recon)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.rows()) != source_.size() ||
      static_cast<std::size_t>(values_.cols()) != recon_.size()) {
    throw ValidationError("distortion: matrix shape does not match alphabets");
  }
  if (source_.empty() || recon_.empty()) throw ValidationError("distortion: empty alphabet");
  for (Eigen::Index x = 0; x < values_.rows(); ++x) {
    bool any_finite = false;
    for (Eigen::Index y = 0; y < values_.cols(); ++y) {
      const double v = values_(x, y);
      if (std::isnan(v) || v < 0.0) {
        throw ValidationError("distortion: entry (" + std::to_string(x) + ", " +
                              std::to_string(y) + ") is negative or NaN");
      }
      any_finite = any_finite || std::isfinite(v);
    }
    if (!any_finite) {
      throw ValidationError("distortion: source row " + std::to_string(x) +
                            " has no finite entry");
    }
  }
}

DistortionMatrix DistortionMatrix::hamming(std::size_t n, double scale) {
  const auto k = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(k, k, scale);
  m.diagonal().setZero();
  return DistortionMatrix(make_alphabet(n), make_alphabet(n), std::move(m));
}

DistortionMatrix DistortionMatrix::squared_distance(const std::vector<double>& points) {
  const auto k = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd m(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      const double diff = points[static_cast<std::size_t>(i)] - points[static_cast<std::size_t>(j)];
      m(i, j) = diff * diff;
    }
  return DistortionMatrix(make_alphabet(points.size()), make_alphabet(points.size()), std::move(m));
}

DistortionMatrix DistortionMatrix::absolute_distance(const std::vector<double>& points) {
  const auto k = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd m(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      m(i, j) = std::abs(points[static_cast<std::size_t>(i)] - points[static_cast<std::size_t>(j)]);
  return DistortionMatrix(make_alphabet(points.size()), make_alphabet(points.size()), std::move(m));
}

bool DistortionMatrix::is_symmetric(double tol) const {
  if (values_.rows() != values_.cols()) return false;
  for (Eigen::Index i = 0; i < values_.rows(); ++i)
    for (Eigen::Index j = 0; j < i; ++j) {
      const double a = values_(i, j);
      const double b = values_(j, i);
      if (std::isinf(a) || std::isinf(b)) {
        if (a != b) return false;
      } else if (std::abs(a - b) > tol) {
        return false;
      }
    }
  return true;
}

double DistortionMatrix::max_finite() const {
  double m = 0.0;
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    const double v = values_.data()[i];
    if (std::isfinite(v)) m = std::max(m, v);
  }
  return m;
}

double expected_distortion(const Pmf& p, const Channel& test, const DistortionMatrix& d) {
  check_source(p, d.source_alphabet(), "expected_distortion");
  if (test.input_alphabet() != d.source_alphabet() || test.output_alphabet() != d.recon_alphabet()) {
    throw ValidationError("expected_distortion: test channel alphabets do not match distortion");
  }
  double total = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] <= 0.0) continue;
    for (std::size_t y = 0; y < d.recon_size(); ++y) {
      const double w = test(y, x);
      if (w <= 0.0) continue;
      if (std::isinf(d(x, y))) return kInf;
      total += p[x] * w * d(x, y);
    }
  }
  return total;
}

namespace loglik {

DistortionMatrix loglik_distortion(const Channel& ch) {
  const Eigen::MatrixXd& m = ch.matrix();
  Eigen::MatrixXd d(m.rows(), m.cols());
  for (Eigen::Index x = 0; x < m.rows(); ++x)
    for (Eigen::Index u = 0; u < m.cols(); ++u) d(x, u) = m(x, u) > 0.0 ? -std::log(m(x, u)) : kInf;
  return DistortionMatrix(ch.output_alphabet(), ch.input_alphabet(), std::move(d));
}

FeasibleRange feasible_range(const Pmf& p, const DistortionMatrix& d) {
  check_source(p, d.source_alphabet(), "feasible_range");
  FeasibleRange r;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] <= 0.0) continue;
    double best = kInf;
    for (std::size_t y = 0; y < d.recon_size(); ++y) best = std::min(best, d(x, y));
    r.d_min += p[x] * best;
  }
  r.d_max = kInf;
  for (std::size_t y = 0; y < d.recon_size(); ++y) {
    double e = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x) {
      if (p[x] <= 0.0) continue;
      if (std::isinf(d(x, y))) {
        e = kInf;
        break;
      }
      e += p[x] * d(x, y);
    }
    r.d_max = std::min(r.d_max, e);
  }
  return r;
}

FeasibleRange feasible_range(const Pmf& p, const Channel& ch) {
  return feasible_range(p, loglik_distortion(ch));
}

MlSets ml_sets(const Channel& ch, double tie_tol) {
  MlSets out;
  out.sets.resize(ch.output_size());
  for (std::size_t x = 0; x < ch.output_size(); ++x) {
    double best = 0.0;
    for (std::size_t u = 0; u < ch.input_size(); ++u) best = std::max(best, ch(x, u));
    for (std::size_t u = 0; u < ch.input_size(); ++u) {
      if (ch(x, u) >= (1.0 - tie_tol) * best) out.sets[x].push_back(u);
    }
  }
  return out;
}

DminRate rate_at_dmin(const Pmf& p, const Channel& ch, const IterationConfig& cfg) {
  check_source(p, ch.output_alphabet(), "rate_at_dmin");
  const MlSets t = ml_sets(ch);
  const std::size_t nx = p.size();
  const std::size_t nu = ch.input_size();

  // Start uniform over the symbols that appear in some T(x) with p(x) > 0.
  Eigen::VectorXd q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nu));
  for (std::size_t x = 0; x < nx; ++x) {
    if (p[x] <= 0.0) continue;
    for (std::size_t u : t.sets[x]) q(static_cast<Eigen::Index>(u)) = 1.0;
  }
  q /= q.sum();

  auto objective = [&](const Eigen::VectorXd& qv) {
    double f = 0.0;
    for (std::size_t x = 0; x < nx; ++x) {
      if (p[x] <= 0.0) continue;
      double mass = 0.0;
      for (std::size_t u : t.sets[x]) mass += qv(static_cast<Eigen::Index>(u));
      f -= p[x] * std::log(mass);
    }
    return f;
  };

  DminRate out;
  double f = objective(q);
  out.last_gap = kInf;
  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(q.size());
    for (std::size_t x = 0; x < nx; ++x) {
      if (p[x] <= 0.0) continue;
      double mass = 0.0;
      for (std::size_t u : t.sets[x]) mass += q(static_cast<Eigen::Index>(u));
      for (std::size_t u : t.sets[x]) {
        next(static_cast<Eigen::Index>(u)) += p[x] * q(static_cast<Eigen::Index>(u)) / mass;
      }
    }
    next /= next.sum();
    const double f_next = objective(next);
    out.last_gap = std::abs(f - f_next);
    q = std::move(next);
    f = f_next;
    out.iterations = it;
    if (out.last_gap < cfg.tol) {
      out.converged = true;
      break;
    }
  }

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nu), static_cast<Eigen::Index>(nx));
  for (std::size_t x = 0; x < nx; ++x) {
    double mass = 0.0;
    for (std::size_t u : t.sets[x]) mass += q(static_cast<Eigen::Index>(u));
    for (std::size_t u : t.sets[x]) {
      w(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(x)) =
          mass > 0.0 ? q(static_cast<Eigen::Index>(u)) / mass
                     : 1.0 / static_cast<double>(t.sets[x].size());
    }
  }
  out.rate = std::max(f, 0.0);
  out.q = Pmf::normalized(ch.input_alphabet(), q);
  out.randomization = Channel::normalized(p.alphabet(), ch.input_alphabet(), std::move(w));
  return out;
}

ConsistencyReport consistency_polytope(const Pmf& p, const Channel& ch) {
  check_source(p, ch.output_alphabet(), "consistency_polytope");
  const Eigen::Index nx = static_cast<Eigen::Index>(ch.output_size());
  const Eigen::Index nu = static_cast<Eigen::Index>(ch.input_size());

  LpProblem lp;
  lp.a.resize(nx + 1, nu);
  lp.a.topRows(nx) = ch.matrix();
  lp.a.row(nx).setOnes();
  lp.b.resize(nx + 1);
  lp.b.head(nx) = p.probs();
  lp.b(nx) = 1.0;
  Eigen::VectorXd column_entropy(nu);
  for (Eigen::Index u = 0; u < nu; ++u) column_entropy(u) = detail::entropy_nats(ch.matrix().col(u));
  lp.objective = column_entropy;

  ConsistencyReport report;
  lp.sense = LpSense::minimize;
  const LpSolution lo = lp_solve(lp);
  if (lo.status != LpStatus::feasible) return report;
  lp.sense = LpSense::maximize;
  const LpSolution hi = lp_solve(lp);

  report.feasible = true;
  report.witness_min = Pmf::normalized(ch.input_alphabet(), lo.witness);
  report.witness_max = Pmf::normalized(ch.input_alphabet(), hi.witness);
  report.d_star_min = column_entropy.dot(report.witness_min->probs());
  report.d_star_max = std::max(column_entropy.dot(report.witness_max->probs()), report.d_star_min);

  // The polytope is a single point iff every coordinate has zero range.
  report.unique = true;
  for (Eigen::Index u = 0; u < nu && report.unique; ++u) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(nu);
    e(u) = 1.0;
    lp.objective = e;
    lp.sense = LpSense::minimize;
    const double low = lp_solve(lp).objective;
    lp.sense = LpSense::maximize;
    const double high = lp_solve(lp).objective;
    report.unique = high - low <= kLpFeasibilityTolerance;
  }
  return report;
}

double logloss_rdf(const Pmf& p, double distortion) {
  if (distortion < 0.0) throw ValidationError("logloss_rdf: negative distortion");
  return std::max(entropy(p) - distortion, 0.0);
}

Decomposition decomposition_check(const Pmf& p, const Channel& ch_xu, const Channel& test) {
  check_source(p, ch_xu.output_alphabet(), "decomposition_check");
  if (test.input_alphabet() != p.alphabet() || test.output_alphabet() != ch_xu.input_alphabet()) {
    throw ValidationError("decomposition_check: test channel alphabets do not match");
  }
  const Eigen::MatrixXd joint = test.matrix() * p.probs().asDiagonal();  // (y, x)
  Decomposition out;
  bool lhs_inf = false;
  for (Eigen::Index y = 0; y < joint.rows(); ++y)
    for (Eigen::Index x = 0; x < joint.cols(); ++x) {
      const double v = joint(y, x);
      if (v <= 0.0) continue;
      const double lik = ch_xu.matrix()(x, y);
      if (lik <= 0.0) {
        lhs_inf = true;
      } else {
        out.lhs -= v * std::log(lik);
      }
    }

  bool rhs_inf = false;
  for (Eigen::Index y = 0; y < joint.rows(); ++y) {
    const double qy = joint.row(y).sum();
    if (qy <= 0.0) continue;
    const Eigen::VectorXd backward = joint.row(y).transpose() / qy;
    const double kl = detail::kl_nats(backward, ch_xu.matrix().col(y));
    if (std::isinf(kl)) {
      rhs_inf = true;
      continue;
    }
    out.rhs += qy * (detail::entropy_nats(backward) + kl);
  }
  if (lhs_inf) out.lhs = kInf;
  if (rhs_inf) out.rhs = kInf;
  out.gap = (lhs_inf && rhs_inf) ? 0.0 : std::abs(out.lhs - out.rhs);
  return out;
}

}  // namespace loglik
}  // namespace llrd
