#include "llrd/ba.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <sstream>

#include "llrd/errors.hpp"

namespace llrd::ba {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Weight of the uniform component mixed into warm starts so that no output
// symbol is locked at zero by the multiplicative update.
constexpr double kWarmStartMix = 1e-3;
// Relative slope bracket below which a remaining distortion gap is treated
// as a linear piece of the curve.
constexpr double kSlopeBracketWidth = 1e-7;

void validate(const Pmf& p, const DistortionMatrix& d, const BaConfig& cfg) {
  if (p.alphabet() != d.source_alphabet()) throw ValidationError("ba: source alphabet mismatch");
  if (!(cfg.slope >= 0.0) || !std::isfinite(cfg.slope)) {
    throw ValidationError("ba: slope must be finite and >= 0");
  }
  if (!(cfg.tol > 0.0)) throw ValidationError("ba: tol must be > 0");
  if (cfg.max_iters < 1) throw ValidationError("ba: max_iters must be >= 1");
  if (cfg.init_q && cfg.init_q->alphabet() != d.recon_alphabet()) {
    throw ValidationError("ba: init_q alphabet does not match reconstruction alphabet");
  }
}

RdPoint make_point(const Pmf& p, const DistortionMatrix& d, Eigen::MatrixXd w, double slope) {
  RdPoint pt;
  pt.slope = slope;
  pt.channel = Channel::normalized(d.source_alphabet(), d.recon_alphabet(), std::move(w));
  const Eigen::MatrixXd joint = pt.channel.matrix() * p.probs().asDiagonal();  // (y, x)
  pt.output = Pmf::normalized(d.recon_alphabet(), joint.rowwise().sum());
  pt.distortion = expected_distortion(p, pt.channel, d);
  pt.rate = detail::mutual_information_nats(joint);
  return pt;
}

// Zero-slope point: all mass on the reconstruction with the smallest
// expected distortion, so D = d_max and R = 0.
RdPoint zero_slope_point(const Pmf& p, const DistortionMatrix& d) {
  std::size_t best = 0;
  double best_e = kInf;
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
    if (e < best_e) {
      best_e = e;
      best = y;
    }
  }
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.recon_size()),
                                            static_cast<Eigen::Index>(d.source_size()));
  w.row(static_cast<Eigen::Index>(best)).setOnes();
  RdPoint pt = make_point(p, d, std::move(w), 0.0);
  pt.converged = true;
  return pt;
}

Pmf mixed_start(const Pmf& q) {
  const auto n = static_cast<Eigen::Index>(q.size());
  Eigen::VectorXd v = (1.0 - kWarmStartMix) * q.probs() +
                      Eigen::VectorXd::Constant(n, kWarmStartMix / static_cast<double>(n));
  return Pmf::normalized(q.alphabet(), v);
}

void sort_and_dedupe(std::vector<RdPoint>& pts) {
  std::stable_sort(pts.begin(), pts.end(),
                   [](const RdPoint& a, const RdPoint& b) { return a.distortion < b.distortion; });
  std::vector<RdPoint> out;
  for (auto& pt : pts) {
    if (!out.empty() && pt.distortion - out.back().distortion <= 1e-12) continue;
    out.push_back(std::move(pt));
  }
  pts = std::move(out);
}

}  // namespace

bool RdCurve::is_monotone(double slack) const {
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].distortion > points[i - 1].distortion)) return false;
    if (points[i].rate > points[i - 1].rate + slack) return false;
  }
  return true;
}

bool RdCurve::is_convex(double slack) const {
  for (std::size_t i = 1; i + 1 < points.size(); ++i) {
    const RdPoint& a = points[i - 1];
    const RdPoint& b = points[i];
    const RdPoint& c = points[i + 1];
    const double t = (b.distortion - a.distortion) / (c.distortion - a.distortion);
    const double chord = a.rate + t * (c.rate - a.rate);
    if (b.rate > chord + slack) return false;
  }
  return true;
}

RdPoint ba_fixed_slope(const Pmf& p, const DistortionMatrix& d, const BaConfig& cfg) {
  validate(p, d, cfg);
  if (cfg.slope == 0.0) return zero_slope_point(p, d);

  const auto nx = static_cast<Eigen::Index>(d.source_size());
  const auto ny = static_cast<Eigen::Index>(d.recon_size());
  const double lambda = cfg.slope;

  // Kernel exp(-lambda (d(x,y) - min_y d(x,y))); the per-row shift cancels in
  // every update and keeps the largest entry of each row at 1.
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(nx, ny);
  for (Eigen::Index x = 0; x < nx; ++x) {
    const double row_min = d.values().row(x).minCoeff();
    for (Eigen::Index y = 0; y < ny; ++y) {
      const double v = d.values()(x, y);
      if (std::isfinite(v)) kernel(x, y) = std::exp(-lambda * (v - row_min));
    }
  }

  Eigen::VectorXd q = cfg.init_q ? cfg.init_q->probs()
                                 : Eigen::VectorXd::Constant(ny, 1.0 / static_cast<double>(ny));
  const Eigen::VectorXd& px = p.probs();
  Eigen::VectorXd z(nx);
  Eigen::VectorXd c(ny);
  bool reinitialized = false;
  bool converged = false;
  std::size_t it = 0;

  // -sum_x p(x) log z(x), the Lagrangian up to constants; +inf when a source
  // row has no support.
  auto lagrangian = [&](const Eigen::VectorXd& v) {
    z = kernel * v;
    double l = 0.0;
    for (Eigen::Index x = 0; x < nx; ++x) {
      if (px(x) <= 0.0) continue;
      if (z(x) <= 0.0) return kInf;
      l -= px(x) * std::log(z(x));
    }
    return l;
  };

  // One Blahut-Arimoto map v -> v * c(v). Returns false once the certified
  // gap max log c - sum v c log c drops below tol (v is then left as is).
  auto step = [&](Eigen::VectorXd& v) {
    ++it;
    if (!std::isfinite(lagrangian(v))) {
      if (reinitialized) throw ConvergenceError("ba: a source row lost all support twice");
      reinitialized = true;
      v.setConstant(1.0 / static_cast<double>(ny));
      z = kernel * v;
    }
    c.setZero();
    for (Eigen::Index x = 0; x < nx; ++x) {
      if (px(x) <= 0.0) continue;
      c += (px(x) / z(x)) * kernel.row(x).transpose();
    }
    double max_log = -kInf;
    double avg_log = 0.0;
    for (Eigen::Index y = 0; y < ny; ++y) {
      if (c(y) <= 0.0) continue;
      const double lc = std::log(c(y));
      max_log = std::max(max_log, lc);
      avg_log += v(y) * c(y) * lc;
    }
    if (max_log - avg_log < cfg.tol) return false;
    v = v.cwiseProduct(c);
    v /= v.sum();
    return true;
  };

  // Squared extrapolation (SQUAREM) over pairs of plain steps; a candidate
  // is kept only if it does not increase the Lagrangian.
  Eigen::VectorXd q1(ny);
  Eigen::VectorXd q2(ny);
  double accepted = kInf;
  while (it < cfg.max_iters) {
    q1 = q;
    if (!step(q1)) {
      converged = true;
      break;
    }
    q2 = q1;
    if (it >= cfg.max_iters) {
      q = q1;
      break;
    }
    if (!step(q2)) {
      q = q1;
      converged = true;
      break;
    }
    const Eigen::VectorXd r = q1 - q;
    const Eigen::VectorXd v = q2 - 2.0 * q1 + q;
    const double vn = v.norm();
    Eigen::VectorXd next = q2;
    if (vn > 0.0) {
      double alpha = std::min(-r.norm() / vn, -1.0);
      while (alpha < -1.0) {
        Eigen::VectorXd cand = q - 2.0 * alpha * r + alpha * alpha * v;
        bool positive = true;
        for (Eigen::Index y = 0; y < ny; ++y) positive = positive && (q(y) <= 0.0 || cand(y) > 0.0);
        if (positive) {
          cand = cand.cwiseMax(0.0);
          cand /= cand.sum();
          if (lagrangian(cand) <= lagrangian(q2)) next = std::move(cand);
          break;
        }
        alpha = 0.5 * (alpha - 1.0);
        if (alpha > -1.0 - 1e-3) break;
      }
    }
    q = std::move(next);
    const double l = lagrangian(q);
    assert(l <= accepted + 1e-12 * (1.0 + std::abs(l)));
    accepted = l;
  }
  (void)accepted;

  z = kernel * q;
  Eigen::MatrixXd w(ny, nx);
  for (Eigen::Index x = 0; x < nx; ++x) {
    if (z(x) > 0.0) {
      w.col(x) = q.cwiseProduct(kernel.row(x).transpose()) / z(x);
    } else {
      w.col(x).setConstant(1.0 / static_cast<double>(ny));
    }
  }
  RdPoint pt = make_point(p, d, std::move(w), lambda);
  pt.iterations = it;
  pt.converged = converged;
  return pt;
}

RdCurve rd_curve(const Pmf& p, const DistortionMatrix& d, const SlopeGrid& grid,
                 const BaConfig& cfg) {
  if (grid.slopes.empty()) throw ValidationError("rd_curve: empty slope grid");
  std::vector<double> slopes = grid.slopes;
  std::sort(slopes.begin(), slopes.end());

  RdCurve curve;
  std::optional<Pmf> previous;
  for (double s : slopes) {
    BaConfig run = cfg;
    run.slope = s;
    if (cfg.warm_start && previous) run.init_q = mixed_start(*previous);
    RdPoint pt = ba_fixed_slope(p, d, run);
    if (s > 0.0) previous = pt.output;
    curve.points.push_back(std::move(pt));
  }
  sort_and_dedupe(curve.points);
  return curve;
}

RdCurve rd_curve(const Pmf& p, const DistortionMatrix& d, const DistortionGrid& grid,
                 const BaConfig& cfg) {
  if (grid.targets.empty()) throw ValidationError("rd_curve: empty distortion grid");
  std::vector<double> targets = grid.targets;
  std::sort(targets.begin(), targets.end());

  RdCurve curve;
  std::optional<Pmf> previous;
  for (auto it = targets.rbegin(); it != targets.rend(); ++it) {
    BaConfig run = cfg;
    if (cfg.warm_start && previous) run.init_q = *previous;
    RdPoint pt = rd_at_distortion(p, d, *it, run);
    if (pt.slope > 0.0) previous = pt.output;
    curve.points.push_back(std::move(pt));
  }
  sort_and_dedupe(curve.points);
  return curve;
}

RdPoint rd_at_distortion(const Pmf& p, const DistortionMatrix& d, double target,
                         const BaConfig& cfg) {
  validate(p, d, cfg);
  const FeasibleRange range = loglik::feasible_range(p, d);
  if (!std::isfinite(target) || target < range.d_min - 1e-12 || target > range.d_max + 1e-12) {
    std::ostringstream os;
    os.precision(12);
    os << "rd_at_distortion: target " << target << " outside feasible range [" << range.d_min
       << ", " << range.d_max << "]";
    throw ValidationError(os.str());
  }
  if (target >= range.d_max - 1e-12) return zero_slope_point(p, d);

  std::optional<Pmf> hint = cfg.init_q;
  auto evaluate = [&](double slope) {
    BaConfig run = cfg;
    run.slope = slope;
    run.init_q.reset();
    if (hint) run.init_q = mixed_start(*hint);
    RdPoint pt = ba_fixed_slope(p, d, run);
    hint = pt.output;
    return pt;
  };
  auto close_enough = [&](const RdPoint& pt) {
    return std::abs(pt.distortion - target) <= kDistortionMatchTolerance;
  };

  const double scale = d.max_finite() > 0.0 ? d.max_finite() : 1.0;
  double lo = 0.0;
  RdPoint lo_pt = zero_slope_point(p, d);
  double hi = 1.0 / scale;
  RdPoint hi_pt = evaluate(hi);
  while (hi_pt.distortion > target + kDistortionMatchTolerance) {
    lo = hi;
    lo_pt = std::move(hi_pt);
    hi *= 2.0;
    if (hi > 1e9 / scale) {
      throw ConvergenceError("rd_at_distortion: slope search diverged before reaching target");
    }
    hi_pt = evaluate(hi);
  }
  if (close_enough(hi_pt)) return hi_pt;
  if (close_enough(lo_pt)) return lo_pt;

  for (int step = 0; step < 200 && hi - lo > kSlopeBracketWidth * hi; ++step) {
    const double mid = 0.5 * (lo + hi);
    RdPoint mid_pt = evaluate(mid);
    if (close_enough(mid_pt)) return mid_pt;
    if (mid_pt.distortion > target) {
      lo = mid;
      lo_pt = std::move(mid_pt);
    } else {
      hi = mid;
      hi_pt = std::move(mid_pt);
    }
  }

  // Distortion jumps across a vanishing slope interval: time-share.
  const double theta = (target - hi_pt.distortion) / (lo_pt.distortion - hi_pt.distortion);
  Eigen::MatrixXd w = theta * lo_pt.channel.matrix() + (1.0 - theta) * hi_pt.channel.matrix();
  RdPoint pt = make_point(p, d, std::move(w), 0.5 * (lo + hi));
  pt.iterations = lo_pt.iterations + hi_pt.iterations;
  pt.converged = lo_pt.converged && hi_pt.converged;
  return pt;
}

}  // namespace llrd::ba
