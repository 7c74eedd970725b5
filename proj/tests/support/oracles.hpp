#pragma once

// Reference computations used by the tests. They deliberately avoid the
// library's solvers: plain loops, closed forms and exhaustive scans.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double h(const Vec& p) {
  double s = 0.0;
  for (double v : p)
    if (v > 0.0) s -= v * std::log(v);
  return s;
}

inline double hb(double t) { return h({t, 1.0 - t}); }

inline double bits(double nats) { return nats / std::log(2.0); }

// I(X;Y) for a joint given as joint[x][y].
inline double mutual_info(const Mat& joint) {
  Vec px(joint.size(), 0.0);
  Vec py(joint[0].size(), 0.0);
  for (std::size_t x = 0; x < joint.size(); ++x)
    for (std::size_t y = 0; y < joint[x].size(); ++y) {
      px[x] += joint[x][y];
      py[y] += joint[x][y];
    }
  double s = 0.0;
  for (std::size_t x = 0; x < joint.size(); ++x)
    for (std::size_t y = 0; y < joint[x].size(); ++y)
      if (joint[x][y] > 0.0) s += joint[x][y] * std::log(joint[x][y] / (px[x] * py[y]));
  return s;
}

// lik[x][u] = P(x|u).
inline double d_min(const Vec& p, const Mat& lik) {
  double s = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    double best = 0.0;
    for (double v : lik[x]) best = std::max(best, v);
    s -= p[x] * std::log(best);
  }
  return s;
}

inline double d_max(const Vec& p, const Mat& lik) {
  double best = kInf;
  for (std::size_t u = 0; u < lik[0].size(); ++u) {
    double e = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x) {
      if (p[x] == 0.0) continue;
      e += lik[x][u] > 0.0 ? -p[x] * std::log(lik[x][u]) : kInf;
    }
    best = std::min(best, e);
  }
  return best;
}

// Binary source through a 2 x 3 channel: the consistent priors form a
// segment parametrised by q(u1). Scans it and returns {min, max} of
// H(X|U) = sum_u q(u) H(P(.|u)); {nan, nan} when empty.
inline std::pair<double, double> dstar_scan_2x3(const Vec& p, const Mat& lik, int steps = 200000) {
  const double a0 = lik[0][0], a1 = lik[0][1], a2 = lik[0][2];
  std::pair<double, double> out{kInf, -kInf};
  const Vec hu = {hb(a0), hb(a1), hb(a2)};
  for (int i = 0; i <= steps; ++i) {
    const double q1 = static_cast<double>(i) / steps;
    // a0 q0 + a2 q2 = p0 - a1 q1, q0 + q2 = 1 - q1.
    const double rest = 1.0 - q1;
    const double rhs = p[0] - a1 * q1;
    if (a0 == a2) continue;
    const double q0 = (rhs - a2 * rest) / (a0 - a2);
    const double q2 = rest - q0;
    if (q0 < -1e-12 || q2 < -1e-12) continue;
    const double v = q0 * hu[0] + q1 * hu[1] + q2 * hu[2];
    out.first = std::min(out.first, v);
    out.second = std::max(out.second, v);
  }
  if (out.first == kInf) return {std::nan(""), std::nan("")};
  return out;
}

// min over Q on a grid of the 3-simplex-of-size-3 of -sum_x p(x) log Q(T(x)).
inline double dmin_rate_scan_3(const Vec& p, const std::vector<std::vector<int>>& sets, int steps = 1000) {
  double best = kInf;
  for (int i = 0; i <= steps; ++i)
    for (int j = 0; i + j <= steps; ++j) {
      const Vec q = {static_cast<double>(i) / steps, static_cast<double>(j) / steps,
                     static_cast<double>(steps - i - j) / steps};
      double v = 0.0;
      for (std::size_t x = 0; x < p.size(); ++x) {
        double mass = 0.0;
        for (int u : sets[x]) mass += q[static_cast<std::size_t>(u)];
        if (p[x] > 0.0) v += mass > 0.0 ? -p[x] * std::log(mass) : kInf;
      }
      best = std::min(best, v);
    }
  return best;
}

// Binary-source, binary-reconstruction R(D) by scanning test channels
// W(1|0) = s, W(0|1) = t on a grid. d[x][y] finite.
inline double rd_scan_2x2(double p1, const Mat& d, double target, int steps = 2000) {
  double best = kInf;
  const double p0 = 1.0 - p1;
  for (int i = 0; i <= steps; ++i)
    for (int j = 0; j <= steps; ++j) {
      const double s = static_cast<double>(i) / steps;
      const double t = static_cast<double>(j) / steps;
      const Mat joint = {{p0 * (1 - s), p0 * s}, {p1 * t, p1 * (1 - t)}};
      double e = 0.0;
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) e += joint[x][y] * d[x][y];
      if (e <= target) best = std::min(best, mutual_info(joint));
    }
  return best;
}

// Perfect-perception R(D, 0) for a binary source with Hamming distortion:
// couplings with both marginals Ber(p1) are [[1-p1-t, t], [t, p1-t]],
// D = 2t. Minimises I over the admissible t on a grid.
inline double rdp_scan_binary_hamming(double p1, double target, int steps = 200000) {
  const double tmax = std::min(p1, 1.0 - p1);
  double best = kInf;
  for (int i = 0; i <= steps; ++i) {
    const double t = tmax * static_cast<double>(i) / steps;
    if (2.0 * t > target) break;
    const Mat joint = {{1.0 - p1 - t, t}, {t, p1 - t}};
    best = std::min(best, mutual_info(joint));
  }
  return best;
}

// Binary Hamming R(D) = H(p) - H(D) for D < min(p, 1 - p), else 0.
inline double binary_hamming_rd(double p, double dist) {
  if (dist >= std::min(p, 1.0 - p)) return 0.0;
  return hb(p) - hb(dist);
}

}  // namespace oracle
