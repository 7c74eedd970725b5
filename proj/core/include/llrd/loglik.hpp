#pragma once

// Log-likelihood distortion d(x, u) = -log P(x | u) and the structural
// quantities of its rate-distortion function: feasible distortion range,
// maximum-likelihood sets, the rate at the minimum distortion, the polytope of
// priors consistent with the source, and the log-loss lower bound.

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "llrd/info.hpp"

namespace llrd {

// Nonnegative source-by-reconstruction matrix; +inf marks pairs that can
// never be used. Every source row keeps at least one finite entry.
class DistortionMatrix {
 public:
  DistortionMatrix() = default;
  DistortionMatrix(Alphabet source, Alphabet recon, Eigen::MatrixXd values);

  // d(x, y) = scale * [x != y] on an n-letter alphabet.
  static DistortionMatrix hamming(std::size_t n, double scale = 1.0);
  // d(i, j) = (points[i] - points[j])^2.
  static DistortionMatrix squared_distance(const std::vector<double>& points);
  // d(i, j) = |points[i] - points[j]|.
  static DistortionMatrix absolute_distance(const std::vector<double>& points);

  const Alphabet& source_alphabet() const { return source_; }
  const Alphabet& recon_alphabet() const { return recon_; }
  const Eigen::MatrixXd& values() const { return values_; }
  std::size_t source_size() const { return source_.size(); }
  std::size_t recon_size() const { return recon_.size(); }
  double operator()(std::size_t x, std::size_t y) const {
    return values_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
  }
  bool is_symmetric(double tol = 0.0) const;
  // Largest finite entry (0 for an all-zero matrix).
  double max_finite() const;

  friend bool operator==(const DistortionMatrix& a, const DistortionMatrix& b) {
    return a.source_ == b.source_ && a.recon_ == b.recon_ && a.values_ == b.values_;
  }

 private:
  Alphabet source_;
  Alphabet recon_;
  Eigen::MatrixXd values_;
};

struct FeasibleRange {
  double d_min = 0.0;
  double d_max = 0.0;
};

// E[d] for the joint p(x) w(y|x) with 0 * inf = 0. Returns +inf if mass sits
// on an infinite entry.
double expected_distortion(const Pmf& p, const Channel& test, const DistortionMatrix& d);

namespace loglik {

// d(x, u) = -log ch(x | u); zero probabilities become +inf. Throws
// ValidationError if some x has zero probability under every u.
DistortionMatrix loglik_distortion(const Channel& ch);

// d_min = E_X[min_y d(X, y)], d_max = min_y E_X[d(X, y)] (nats).
FeasibleRange feasible_range(const Pmf& p, const DistortionMatrix& d);
FeasibleRange feasible_range(const Pmf& p, const Channel& ch);

inline constexpr double kDefaultTieTolerance = 1e-9;

// sets[x] = { u : ch(x|u) >= (1 - tie_tol) max_u' ch(x|u') }.
struct MlSets {
  std::vector<std::vector<std::size_t>> sets;
};
MlSets ml_sets(const Channel& ch, double tie_tol = kDefaultTieTolerance);

struct IterationConfig {
  double tol = 1e-11;
  std::size_t max_iters = 100000;
};

struct DminRate {
  double rate = 0.0;  // nats
  Pmf q;              // optimal output marginal over U
  Channel randomization;  // W(y | x), supported on the ML sets
  std::size_t iterations = 0;
  bool converged = false;
  double last_gap = 0.0;
};

// Minimizes E_X[-log Q(T(X))] over Q by alternating the I-projection
// W(y|x) = Q(y) [y in T(x)] / Q(T(x)) with Q <- output marginal.
DminRate rate_at_dmin(const Pmf& p, const Channel& ch, const IterationConfig& cfg = {});

struct ConsistencyReport {
  bool feasible = false;
  // Priors attaining the smallest / largest H(X|U) over the polytope.
  std::optional<Pmf> witness_min;
  std::optional<Pmf> witness_max;
  double d_star_min = 0.0;  // nats
  double d_star_max = 0.0;  // nats
  // True when the polytope is a single prior.
  bool unique = false;

  const Pmf& witness_prior() const { return *witness_min; }
};

// Priors q >= 0 with ch * q = p. H(X|U) = sum_u q(u) H(ch(.|u)) is linear in
// q, so the special-point interval comes from two LPs.
ConsistencyReport consistency_polytope(const Pmf& p, const Channel& ch);

// max(H(X) - D, 0), D in nats.
double logloss_rdf(const Pmf& p, double distortion);

struct Decomposition {
  double lhs = 0.0;  // E[-log ch(X|Y)]
  double rhs = 0.0;  // H(X|Y) + E_Y[KL(W(.|Y) || ch(.|Y))]
  double gap = 0.0;
};

// Cross-entropy decomposition of the expected log-likelihood loss for the
// test channel W_{Y|X} (Y ranges over the channel's input alphabet).
Decomposition decomposition_check(const Pmf& p, const Channel& ch_xu, const Channel& test);

}  // namespace loglik
}  // namespace llrd
