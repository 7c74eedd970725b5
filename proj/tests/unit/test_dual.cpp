#include <cmath>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "llrd/ba.hpp"
#include "llrd/dual.hpp"
#include "llrd/errors.hpp"
#include "oracles.hpp"
#include "random_instances.hpp"

using namespace llrd;
using namespace llrd::dual;

TEST_CASE("hamming normalizer and coupling") {
  const DistortionMatrix d = DistortionMatrix::hamming(2);
  const double lambda = std::log(9.0);
  const MuSolution mu = solve_mu(d, lambda);
  REQUIRE(mu.feasible);
  CHECK(mu.unique);
  CHECK(mu.mu(0) == doctest::Approx(1.0 / (1.0 + std::exp(-lambda))));
  const TiltSolution t = tilt_at(Pmf::bernoulli(0.25), d, lambda);
  REQUIRE(t.feasible);
  const double e = std::exp(lambda);
  CHECK((*t.q_y)[1] == doctest::Approx((0.25 * (1.0 + e) - 1.0) / (e - 1.0)).epsilon(1e-9));
}

TEST_CASE("feasible set of binary hamming starts at log((1-p)/p)") {
  const Pmf p = Pmf::bernoulli(0.25);
  const DistortionMatrix d = DistortionMatrix::hamming(2);
  CHECK_FALSE(tilt_at(p, d, std::log(3.0) - 1e-3).feasible);
  CHECK(tilt_at(p, d, std::log(3.0) + 1e-3).feasible);
  const double edge = refine_feasibility_boundary(p, d, 0.5, 2.0);
  CHECK(edge == doctest::Approx(std::log(3.0)).epsilon(1e-9));
}

TEST_CASE("all-zero distortion has no usable normalizer") {
  const DistortionMatrix d(make_alphabet(2), make_alphabet(2), Eigen::Matrix2d::Zero());
  const MuSolution mu = solve_mu(d, 1.0);
  CHECK_FALSE(mu.unique);
  const TiltSolution t = tilt_at(Pmf::bernoulli(0.3), d, 1.0);
  CHECK_FALSE(t.feasible);
  CHECK_FALSE(t.diagnostic.empty());
}

TEST_CASE("dual form reproduces binary hamming") {
  for (double p1 : {0.25, 0.4}) {
    const Pmf p = Pmf::bernoulli(p1);
    for (double target : {0.05, 0.1, 0.2}) {
      if (target >= p1) continue;
      const DualResult r = dual_rdf(p, DistortionMatrix::hamming(2), target);
      CHECK(std::abs(r.rate - oracle::binary_hamming_rd(p1, target)) <= 1e-6);
      CHECK(std::abs(r.lambda - std::log((1.0 - target) / target)) <= 1e-6);
      REQUIRE(r.lower_boundary);
      CHECK(*r.lower_boundary == doctest::Approx(std::log((1.0 - p1) / p1)).epsilon(1e-8));
      CHECK(r.connected);
    }
  }
}

TEST_CASE("dual form rejects out-of-range distortion and empty feasible sets") {
  const Pmf p = Pmf::bernoulli(0.25);
  CHECK_THROWS_AS(dual_rdf(p, DistortionMatrix::hamming(2), 0.5), ValidationError);
  DualConfig cfg;
  cfg.grid = {0.1, 0.2, 0.5};  // all below log 3
  CHECK_THROWS_AS(dual_rdf(p, DistortionMatrix::hamming(2), 0.1, cfg), InapplicableError);
}

TEST_CASE("discretised gaussian with absolute error has no feasible grid slope") {
  std::vector<double> pts;
  Eigen::VectorXd w(21);
  for (int i = 0; i < 21; ++i) {
    pts.push_back(i - 10.0);
    w(i) = std::exp(-0.5 * pts.back() * pts.back());
  }
  const Pmf p = Pmf::normalized(make_alphabet(21), w);
  const DistortionMatrix d = DistortionMatrix::absolute_distance(pts);
  CHECK_THROWS_AS(dual_rdf(p, d, 0.5), InapplicableError);
}

TEST_CASE("translation at log 9 turns hamming into BSC(0.1)") {
  const Pmf p = Pmf::bernoulli(0.25);
  const Translation tr = translate_to_loglik(p, DistortionMatrix::hamming(2), std::log(9.0));
  CHECK((tr.channel.matrix() - Channel::bsc(0.1).matrix()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(tr.map.offset == doctest::Approx(-std::log(0.9)).epsilon(1e-12));
  CHECK(tr.map.inverse(tr.map.forward(0.07)) == doctest::Approx(0.07));
  CHECK_THROWS_AS(translate_to_loglik(p, DistortionMatrix::hamming(2), 0.5), InapplicableError);
}

TEST_CASE("translated curve is the affine image of the classical curve") {
  const Pmf p = Pmf::bernoulli(0.3);
  const DistortionMatrix d = DistortionMatrix::hamming(2);
  const Translation tr = translate_to_loglik(p, d, 2.5);
  const DistortionMatrix d_ll = loglik::loglik_distortion(tr.channel);
  for (double target : {0.02, 0.1, 0.2}) {
    const ba::RdPoint a = ba::rd_at_distortion(p, d, target);
    const ba::RdPoint b = ba::rd_at_distortion(p, d_ll, tr.map.forward(target));
    CHECK(std::abs(a.rate - b.rate) <= 1e-5);
  }
}

TEST_CASE("closed forms") {
  const ClosedForm bin = ClosedForm::binary_hamming(0.25);
  CHECK(closed_form_eval(bin, 0.1, LogBase::bits) ==
        doctest::Approx(oracle::bits(oracle::hb(0.25) - oracle::hb(0.1))));
  CHECK_THROWS_AS(closed_form_eval(bin, 0.3), ValidationError);
  CHECK_THROWS_AS(ClosedForm::binary_hamming(0.25, 1.0), ValidationError);

  const ClosedForm g = ClosedForm::gaussian_mse(2.0);
  CHECK(closed_form_eval(g, 0.5) == doctest::Approx(0.5 * std::log(4.0)));
  CHECK_THROWS_AS(closed_form_eval(g, 0.0), ValidationError);
  CHECK_THROWS_AS(closed_form_eval(g, 2.5), ValidationError);
  CHECK(g.lambda_lower() == doctest::Approx(0.25));
  CHECK_THROWS_AS(ClosedForm::gaussian_mse(2.0, 0.25), ValidationError);
}

TEST_CASE("property: gaussian translated form is the classical form behind the affine map") {
  gen::Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const double s2 = rng.uniform(0.1, 10.0);
    const double l0 = (1.0 / (2.0 * s2)) * rng.uniform(1.01, 20.0);
    const double dist = s2 * rng.uniform(0.01, 1.0);
    // Normalizer of exp(-l0 (x - y)^2) over the real line is sqrt(l0 / pi).
    const double translated = l0 * dist + 0.5 * std::log(std::numbers::pi / l0);
    const double classical = closed_form_eval(ClosedForm::gaussian_mse(s2), dist);
    const double via_map = closed_form_eval(ClosedForm::gaussian_mse(s2, l0), translated);
    CHECK(via_map == doctest::Approx(classical).epsilon(1e-10));
    CHECK(classical == doctest::Approx(0.5 * std::log(s2 / dist)).epsilon(1e-12));
  }
}

TEST_CASE("property: every feasible slope gives a lower bound on R(D)") {
  gen::Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t q = rng.index(2, 4);
    const Pmf p = rng.full_pmf(q);
    const DistortionMatrix d = DistortionMatrix::hamming(q);
    const double target = rng.uniform(0.01, 0.9) * loglik::feasible_range(p, d).d_max;
    const ba::RdPoint pt = ba::rd_at_distortion(p, d, target);
    for (double lambda : default_lambda_grid(d, 30)) {
      const MuSolution mu = solve_mu(d, lambda);
      if (!mu.feasible) continue;
      CHECK(dual_objective(p, mu.mu, lambda, pt.distortion) <= pt.rate + 1e-7);
    }
  }
}
