#pragma once

// Single-parameter dual form of R(D) for distortions that admit an
// exponential tilt P(x|y) = mu(x) exp(-lambda d(x, y)) together with an
// output marginal reproducing the source, plus the affine translation of such
// problems into log-likelihood problems and the closed-form example catalog.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "llrd/info.hpp"
#include "llrd/loglik.hpp"

namespace llrd::dual {

inline constexpr double kResidualTolerance = 1e-9;
inline constexpr double kNegativeSlack = 1e-12;

struct MuSolution {
  bool feasible = false;
  // false when the normalization system has more than one solution; mu is
  // then a nonnegative vertex of the solution set.
  bool unique = true;
  Eigen::VectorXd mu;
  double residual = 0.0;
  std::string diagnostic;
};

// Solves sum_x mu(x) exp(-lambda d(x, y)) = 1 for all y. Infinite entries
// contribute exact zeros.
MuSolution solve_mu(const DistortionMatrix& d, double lambda);

struct TiltSolution {
  double lambda = 0.0;
  bool feasible = false;
  Eigen::VectorXd mu;
  std::optional<Pmf> q_y;
  double normalization_residual = 0.0;
  double coupling_residual = 0.0;
  std::string diagnostic;
};

// LP for q >= 0, sum q = 1, sum_y q(y) exp(-lambda d(x, y)) = p(x) / mu(x).
TiltSolution coupling_feasible(const Pmf& p, const DistortionMatrix& d, double lambda,
                               const Eigen::VectorXd& mu);

// solve_mu followed by coupling_feasible.
TiltSolution tilt_at(const Pmf& p, const DistortionMatrix& d, double lambda);

std::vector<TiltSolution> lambda_feasible_set(const Pmf& p, const DistortionMatrix& d,
                                              const std::vector<double>& grid);

// n log-spaced points over [1e-2, 1e2] / max finite entry of d.
std::vector<double> default_lambda_grid(const DistortionMatrix& d, std::size_t n = 60);

// Bisects between an infeasible and a feasible slope; returns the feasible
// end of the final bracket.
double refine_feasibility_boundary(const Pmf& p, const DistortionMatrix& d, double infeasible,
                                   double feasible, int steps = 60);

// H(X) + E[log mu(X)] - lambda D, nats.
double dual_objective(const Pmf& p, const Eigen::VectorXd& mu, double lambda, double distortion);

struct DualConfig {
  std::vector<double> grid;  // empty: default_lambda_grid
  double relative_width = 1e-8;
};

struct DualResult {
  double rate = 0.0;  // nats
  double lambda = 0.0;
  Eigen::VectorXd mu;
  std::vector<TiltSolution> samples;
  // false if the refinement met an infeasible slope inside the bracket.
  bool connected = true;
  // Refined lower end of the feasible set when the grid starts infeasible.
  std::optional<double> lower_boundary;
};

// Throws InapplicableError when no grid slope is feasible.
DualResult dual_rdf(const Pmf& p, const DistortionMatrix& d, double distortion,
                    const DualConfig& cfg = {});

struct AffineMap {
  double lambda0 = 1.0;
  double offset = 0.0;  // -E[log mu(X, lambda0)]

  double forward(double distortion) const { return lambda0 * distortion + offset; }
  double inverse(double translated) const { return (translated - offset) / lambda0; }
};

struct Translation {
  Channel channel;  // P(x | u) = mu(x) exp(-lambda0 d(x, u)), u over the recon alphabet
  AffineMap map;
  TiltSolution tilt;
};

// Throws InapplicableError if lambda0 admits no coupling.
Translation translate_to_loglik(const Pmf& p, const DistortionMatrix& d, double lambda0);

enum class Family { binary_hamming, gaussian_mse };

struct ClosedForm {
  Family family = Family::binary_hamming;
  double parameter = 0.5;  // p for binary_hamming, sigma^2 for gaussian_mse
  // Set for the translated log-likelihood variant.
  std::optional<double> lambda0;

  static ClosedForm binary_hamming(double p, std::optional<double> lambda0 = std::nullopt);
  static ClosedForm gaussian_mse(double variance, std::optional<double> lambda0 = std::nullopt);

  // Infimum of the feasible slope set (closed for binary, open for Gaussian).
  double lambda_lower() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_open = false;
};

Interval closed_form_range(const ClosedForm& cf);
// Classical R(D), or R_ll(D~) when lambda0 is set. ValidationError names the
// valid interval when the argument falls outside it.
double closed_form_eval(const ClosedForm& cf, double distortion, LogBase base = LogBase::natural);

}  // namespace llrd::dual
