#pragma once

// Blahut-Arimoto for R(D) over finite alphabets with arbitrary, possibly
// infinite, distortion matrices. One run fixes the Lagrange slope; sweeps and
// distortion-targeted evaluation are built on top.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "llrd/info.hpp"
#include "llrd/loglik.hpp"

namespace llrd::ba {

struct BaConfig {
  double slope = 0.0;  // lambda >= 0
  // Threshold on the certified Lagrangian gap, nats.
  double tol = 1e-10;
  std::size_t max_iters = 100000;
  std::optional<Pmf> init_q;
  // Reuse the previous point's output marginal during sweeps.
  bool warm_start = true;
};

struct RdPoint {
  double distortion = 0.0;  // nats when d is a log-likelihood matrix
  double rate = 0.0;        // nats
  double slope = 0.0;
  Channel channel;  // W(y | x)
  Pmf output;       // Q(y)
  std::size_t iterations = 0;
  bool converged = false;
};

struct RdCurve {
  std::vector<RdPoint> points;  // sorted by strictly increasing distortion
  std::string problem;
  LogBase units = LogBase::natural;

  bool is_monotone(double slack = 1e-9) const;
  // Every middle point of consecutive triples lies on or below the chord.
  bool is_convex(double slack = 1e-6) const;
};

// Throws ValidationError on bad config or alphabet mismatch and
// ConvergenceError when the iteration loses all support twice. A run that
// hits max_iters is returned with converged == false.
RdPoint ba_fixed_slope(const Pmf& p, const DistortionMatrix& d, const BaConfig& cfg);

struct SlopeGrid {
  std::vector<double> slopes;
};
struct DistortionGrid {
  std::vector<double> targets;
};

RdCurve rd_curve(const Pmf& p, const DistortionMatrix& d, const SlopeGrid& grid,
                 const BaConfig& cfg = {});
RdCurve rd_curve(const Pmf& p, const DistortionMatrix& d, const DistortionGrid& grid,
                 const BaConfig& cfg = {});

// Bisects the slope until the achieved distortion is within 1e-6 of the
// target. A jump in distortion across a vanishing slope interval (a linear
// piece of R(D)) is resolved by time-sharing the two bracketing channels.
RdPoint rd_at_distortion(const Pmf& p, const DistortionMatrix& d, double target,
                         const BaConfig& cfg = {});

inline constexpr double kDistortionMatchTolerance = 1e-6;

}  // namespace llrd::ba
