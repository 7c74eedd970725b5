#include <cmath>

#include "doctest.h"
#include "llrd/ba.hpp"
#include "llrd/errors.hpp"
#include "oracles.hpp"
#include "random_instances.hpp"

using namespace llrd;
using namespace llrd::ba;

TEST_CASE("zero slope gives the rate-zero corner") {
  const Pmf p = Pmf::bernoulli(0.25);
  const DistortionMatrix d = DistortionMatrix::hamming(2);
  BaConfig cfg;
  cfg.slope = 0.0;
  const RdPoint pt = ba_fixed_slope(p, d, cfg);
  CHECK(pt.rate == 0.0);
  CHECK(pt.distortion == doctest::Approx(0.25));
  CHECK(pt.converged);
}

TEST_CASE("binary hamming matches the closed form") {
  for (double p1 : {0.1, 0.25, 0.4, 0.5}) {
    const Pmf p = Pmf::bernoulli(p1);
    for (double target : {0.01, 0.05, 0.09}) {
      const RdPoint pt = rd_at_distortion(p, DistortionMatrix::hamming(2), target);
      CHECK(pt.converged);
      CHECK(std::abs(pt.distortion - target) <= kDistortionMatchTolerance);
      CHECK(pt.rate == doctest::Approx(oracle::binary_hamming_rd(p1, pt.distortion)).epsilon(1e-7));
    }
  }
}

TEST_CASE("asymmetric 2x2 distortion against the channel scan") {
  oracle::Mat dm = {{0.0, 1.0}, {2.5, 0.3}};
  Eigen::MatrixXd m(2, 2);
  m << 0.0, 1.0, 2.5, 0.3;
  const DistortionMatrix d(make_alphabet(2), make_alphabet(2), m);
  const Pmf p = Pmf::bernoulli(0.4);
  for (double target : {0.3, 0.45}) {
    const RdPoint pt = rd_at_distortion(p, d, target);
    const double scan = oracle::rd_scan_2x2(0.4, dm, pt.distortion + 1e-9, 1500);
    CHECK(pt.rate <= scan + 1e-9);
    CHECK(pt.rate >= scan - 2e-3);
  }
}

TEST_CASE("infinite entries are never used") {
  Eigen::MatrixXd m(2, 3);
  const double inf = std::numeric_limits<double>::infinity();
  m << 0.0, inf, 1.0, inf, 0.0, 1.0;
  const DistortionMatrix d(make_alphabet(2), make_alphabet(3), m);
  BaConfig cfg;
  cfg.slope = 2.0;
  const RdPoint pt = ba_fixed_slope(Pmf::bernoulli(0.3), d, cfg);
  CHECK(pt.channel(1, 0) == 0.0);
  CHECK(pt.channel(0, 1) == 0.0);
  CHECK(std::isfinite(pt.distortion));
}

TEST_CASE("distortion targets outside the range are rejected") {
  const Pmf p = Pmf::bernoulli(0.25);
  CHECK_THROWS_AS(rd_at_distortion(p, DistortionMatrix::hamming(2), 0.3), ValidationError);
  CHECK_THROWS_AS(rd_at_distortion(p, DistortionMatrix::hamming(2), -0.1), ValidationError);
  BaConfig bad;
  bad.slope = -1.0;
  CHECK_THROWS_AS(ba_fixed_slope(p, DistortionMatrix::hamming(2), bad), ValidationError);
}

TEST_CASE("linear piece is resolved by time sharing") {
  Eigen::MatrixXd m(2, 3);
  m << 0.8, 0.4, 0.2, 0.2, 0.6, 0.8;
  const Channel ch(make_alphabet(3), make_alphabet(2), m);
  const Pmf p = Pmf::bernoulli(0.35);
  const DistortionMatrix d = loglik::loglik_distortion(ch);
  const loglik::ConsistencyReport c = loglik::consistency_polytope(p, ch);
  const double mid = 0.5 * (c.d_star_min + c.d_star_max);
  const RdPoint pt = rd_at_distortion(p, d, mid);
  CHECK(pt.converged);
  CHECK(std::abs(pt.distortion - mid) <= kDistortionMatchTolerance);
  CHECK(pt.rate == doctest::Approx(entropy(p) - pt.distortion).epsilon(1e-6));
}

TEST_CASE("property: curves are monotone, convex and above the log-loss line") {
  gen::Rng rng(31);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t nx = rng.index(2, 4), nu = rng.index(2, 4);
    const Pmf p = rng.full_pmf(nx);
    const Channel ch = rng.channel(nu, nx);
    const DistortionMatrix d = loglik::loglik_distortion(ch);
    SlopeGrid grid;
    for (int i = 0; i < 25; ++i) grid.slopes.push_back(0.05 * std::pow(1.3, i));
    const RdCurve curve = rd_curve(p, d, grid);
    CHECK(curve.is_monotone());
    CHECK(curve.is_convex());
    for (const RdPoint& pt : curve.points) {
      CHECK(pt.rate >= loglik::logloss_rdf(p, pt.distortion) - 1e-9);
      const loglik::Decomposition dec = loglik::decomposition_check(p, ch, pt.channel);
      CHECK(std::abs(dec.lhs - dec.rhs) <= 1e-8);
    }
  }
}

TEST_CASE("property: no random channel beats a BA point at its distortion") {
  gen::Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t nx = rng.index(2, 4), ny = rng.index(2, 4);
    const Pmf p = rng.full_pmf(nx);
    const DistortionMatrix d = rng.distortion(nx, ny);
    BaConfig cfg;
    cfg.slope = rng.uniform(0.2, 4.0);
    const RdPoint pt = ba_fixed_slope(p, d, cfg);
    REQUIRE(pt.converged);
    for (int k = 0; k < 300; ++k) {
      const Channel w = rng.channel(nx, ny);
      if (expected_distortion(p, w, d) > pt.distortion) continue;
      CHECK(mutual_information(joint_from(p, w)) >= pt.rate - 1e-9);
    }
  }
}
