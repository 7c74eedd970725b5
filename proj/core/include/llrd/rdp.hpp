#pragma once

// Rate-distortion with perfect perception (reconstruction marginal equal to
// the source) and the latent-variable scheme that achieves it through a
// log-likelihood compression step when the optimal coupling is completely
// positive.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "llrd/info.hpp"
#include "llrd/loglik.hpp"

namespace llrd::rdp {

struct PerceptionConfig {
  double marginal_tol = 1e-12;
  std::size_t max_sweeps = 100000;
  double distortion_tol = 1e-8;
  std::size_t max_bisections = 200;
};

struct PerceptionSolution {
  Joint coupling;  // rows X, cols Y; both marginals equal p
  double lambda = 0.0;
  // Log-domain scalings, log W(x, y) = a(x) + b(y) - lambda d(x, y) on the
  // support. Symbols with zero probability carry -inf.
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  // (a + b) / 2, the symmetric potentials with W = Phi V Phi.
  Eigen::VectorXd potential;
  double rate = 0.0;  // I(X;Y), nats
  double distortion = 0.0;
  double marginal_error = 0.0;
  std::size_t sweeps = 0;
};

// Scales exp(-lambda d) to both marginals p. Throws ConvergenceError naming
// the stuck marginals when the kernel support cannot carry p.
PerceptionSolution sinkhorn(const Pmf& p, const DistortionMatrix& d, double lambda,
                            const PerceptionConfig& cfg = {});

// Minimum of E[d] over couplings with both marginals p.
double min_coupling_distortion(const Pmf& p, const DistortionMatrix& d);

// Throws ValidationError when d is not square and symmetric or D lies below
// min_coupling_distortion.
PerceptionSolution solve_perfect_perception(const Pmf& p, const DistortionMatrix& d,
                                            double distortion, const PerceptionConfig& cfg = {});

enum class CpMethod { hamming_explicit, numeric };
std::string to_string(CpMethod m);

struct CpFactorization {
  Eigen::MatrixXd b;  // n x r, entrywise >= 0
  double residual = 0.0;  // max |B B^T - target|
  CpMethod method = CpMethod::numeric;
};

// exp(-lambda d) entrywise; d must be symmetric and finite.
Eigen::MatrixXd cp_exponential_matrix(const DistortionMatrix& d, double lambda);

// Exact factor of (1 - a) I + a J with a = exp(-lambda): first column
// sqrt(a), then sqrt(1 - a) I.
CpFactorization hamming_cp_factor(std::size_t q, double lambda);

// Symmetric nonnegative factorization by multiplicative updates, best of
// `restarts` seeded initializations. A large residual only means that no
// certificate was found.
CpFactorization cp_factor_numeric(const Eigen::MatrixXd& v, std::size_t rank,
                                  std::size_t restarts = 20, std::size_t iters = 5000,
                                  std::uint64_t seed = 0);

// B' = diag(phi) B, residual measured against w.
CpFactorization scale_factorization_to_coupling(const Eigen::MatrixXd& w,
                                                const CpFactorization& base,
                                                const Eigen::VectorXd& phi);

struct LatentScheme {
  Pmf p_z;
  Channel x_given_z;  // P_{X|Z}, also the decoder W_{Y|Z}
  Channel z_given_x;  // Bayes reversal against the induced P_X
  Pmf p_x;            // sum_z P_Z(z) P_{X|Z}(x|z)
  double target_distortion = 0.0;  // H(Z|X), nats
  // max |sum_z P_Z P(x|z) P(y|z) - (B B^T)(x, y)|
  double mixture_residual = 0.0;
  std::vector<std::size_t> kept_columns;
};

inline constexpr double kMaxLatentResidual = 1e-6;

LatentScheme construct_latent(const CpFactorization& factor);

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
};

struct VerifyReport {
  std::vector<Check> checks;
  Joint induced;  // [W_{XZY}]_{XY}

  bool passed() const;
  // Name of the first failing check, empty if none.
  std::string first_failure() const;
};

// Runs the X -> Z -> Y scheme with P_{Y|Z} = P_{X|Z} and checks
//   y_marginal           P_Y = P_X                      (1e-6)
//   loglik_distortion    E[-log P_{Z|X}(Z|Y)] = H(Z|X)  (1e-6)
//   distortion_budget    E[d(X, Y)] <= D                (1e-6)
//   rate                 I(X;Y) = R                     (1e-4)
VerifyReport verify_scheme(const LatentScheme& scheme, const Pmf& p, const DistortionMatrix& d,
                           double distortion, double rate);

struct PipelineConfig {
  PerceptionConfig perception;
  std::size_t restarts = 20;
  std::size_t iters = 5000;
  std::uint64_t seed = 0;
};

struct PipelineResult {
  PerceptionSolution solution;
  CpFactorization base;    // factor of exp(-lambda d)
  CpFactorization scaled;  // factor of the coupling
  LatentScheme scheme;
  VerifyReport report;
};

// Full chain: perception solution, CP factor (explicit for Hamming-shaped d,
// numeric otherwise), scaling, latent construction, verification. Errors
// carry the failing stage as a prefix.
PipelineResult run_pipeline(const Pmf& p, const DistortionMatrix& d, double distortion,
                            const PipelineConfig& cfg = {});

// Returns c > 0 if d = c * [x != y], otherwise 0.
double hamming_scale(const DistortionMatrix& d);

}  // namespace llrd::rdp
