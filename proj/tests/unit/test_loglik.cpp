#include <cmath>

#include "doctest.h"
#include "llrd/ba.hpp"
#include "llrd/errors.hpp"
#include "llrd/loglik.hpp"
#include "oracles.hpp"
#include "random_instances.hpp"

using namespace llrd;
using namespace llrd::loglik;

namespace {

Channel fig3_channel() {
  Eigen::MatrixXd m(2, 3);
  m << 0.8, 0.4, 0.2, 0.2, 0.6, 0.8;
  return Channel(make_alphabet(3), make_alphabet(2), m);
}

oracle::Mat lik_rows(const Channel& ch) {
  oracle::Mat out(ch.output_size(), oracle::Vec(ch.input_size()));
  for (std::size_t x = 0; x < ch.output_size(); ++x)
    for (std::size_t u = 0; u < ch.input_size(); ++u) out[x][u] = ch(x, u);
  return out;
}

oracle::Vec vec(const Pmf& p) { return {p.probs().data(), p.probs().data() + p.size()}; }

}  // namespace

TEST_CASE("loglik distortion entries") {
  const DistortionMatrix d = loglik_distortion(Channel::bsc(0.1));
  CHECK(d(0, 0) == doctest::Approx(-std::log(0.9)));
  CHECK(d(1, 0) == doctest::Approx(-std::log(0.1)));
  Eigen::MatrixXd m(2, 2);
  m << 1, 0.5, 0, 0.5;
  const DistortionMatrix z = loglik_distortion(Channel(make_alphabet(2), make_alphabet(2), m));
  CHECK(std::isinf(z(1, 0)));
  Eigen::MatrixXd dead(2, 2);
  dead << 1, 1, 0, 0;
  CHECK_THROWS_AS(loglik_distortion(Channel(make_alphabet(2), make_alphabet(2), dead)), ValidationError);
}

TEST_CASE("feasible range for the figure examples") {
  const FeasibleRange f2 = feasible_range(Pmf::bernoulli(0.25), Channel::bsc(0.1));
  CHECK(to_units(f2.d_min, LogBase::bits) == doctest::Approx(0.152).epsilon(0.001 / 0.152));
  CHECK(to_units(f2.d_max, LogBase::bits) == doctest::Approx(0.9445).epsilon(0.0005));
  const FeasibleRange f3 = feasible_range(Pmf::bernoulli(0.35), fig3_channel());
  CHECK(to_units(f3.d_min, LogBase::bits) == doctest::Approx(0.3219).epsilon(1e-4));
  CHECK(to_units(f3.d_max, LogBase::bits) == doctest::Approx(1.0219).epsilon(1e-4));
}

TEST_CASE("identity channel: zero minimum distortion and consistent at the source") {
  const Pmf p = Pmf::normalized(make_alphabet(3), Eigen::Vector3d(0.5, 0.3, 0.2));
  const Channel id = Channel::identity(3);
  CHECK(feasible_range(p, id).d_min == 0.0);
  const ConsistencyReport r = consistency_polytope(p, id);
  REQUIRE(r.feasible);
  CHECK(r.unique);
  CHECK((r.witness_prior().probs() - p.probs()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(rate_at_dmin(p, id).rate == doctest::Approx(entropy(p)).epsilon(1e-9));
}

TEST_CASE("ml sets with ties") {
  Eigen::MatrixXd m(2, 2);
  m << 0.5, 0.5, 0.5, 0.5;
  const MlSets s = ml_sets(Channel(make_alphabet(2), make_alphabet(2), m));
  CHECK(s.sets[0].size() == 2);
  CHECK(s.sets[1].size() == 2);
}

TEST_CASE("rate at d_min with overlapping ml sets") {
  // Columns a=(.5,.25,.25), b=(.5,.5,0), c=(.1,.5,.4): T(x1)={a,b},
  // T(x2)={b,c}, T(x3)={c}. The optimum puts 3/7 on b and 4/7 on c.
  Eigen::MatrixXd m(3, 3);
  m << 0.5, 0.5, 0.1, 0.25, 0.5, 0.5, 0.25, 0.0, 0.4;
  const Channel ch(make_alphabet(3), make_alphabet(3), m);
  const Pmf p = Pmf::normalized(make_alphabet(3), Eigen::Vector3d(0.3, 0.3, 0.4));
  const MlSets sets = ml_sets(ch);
  CHECK(sets.sets[0] == std::vector<std::size_t>{0, 1});
  CHECK(sets.sets[1] == std::vector<std::size_t>{1, 2});
  CHECK(sets.sets[2] == std::vector<std::size_t>{2});
  const DminRate r = rate_at_dmin(p, ch);
  CHECK(r.converged);
  const double exact = -0.3 * std::log(3.0 / 7.0) - 0.4 * std::log(4.0 / 7.0);
  CHECK(r.rate == doctest::Approx(exact).epsilon(1e-8));
  const double scan = oracle::dmin_rate_scan_3(vec(p), {{0, 1}, {1, 2}, {2}});
  CHECK(std::abs(r.rate - scan) < 1e-3);
  CHECK(r.rate <= scan + 1e-12);
}

TEST_CASE("fig2 consistency: unique prior and tangency point") {
  const ConsistencyReport r = consistency_polytope(Pmf::bernoulli(0.25), Channel::bsc(0.1));
  REQUIRE(r.feasible);
  CHECK(r.unique);
  CHECK(r.witness_prior()[1] == doctest::Approx(0.1875).epsilon(1e-9));
  CHECK(r.d_star_min == doctest::Approx(oracle::hb(0.1)).epsilon(1e-12));
}

TEST_CASE("fig3 consistency interval matches the segment scan") {
  const Pmf p = Pmf::bernoulli(0.35);
  const Channel ch = fig3_channel();
  const ConsistencyReport r = consistency_polytope(p, ch);
  REQUIRE(r.feasible);
  CHECK_FALSE(r.unique);
  const auto [lo, hi] = oracle::dstar_scan_2x3(vec(p), lik_rows(ch));
  CHECK(r.d_star_min == doctest::Approx(lo).epsilon(1e-8));
  CHECK(r.d_star_max == doctest::Approx(hi).epsilon(1e-8));
  CHECK(to_units(r.d_star_min, LogBase::bits) == doctest::Approx(0.7219).epsilon(1e-4));
  CHECK(to_units(r.d_star_max, LogBase::bits) == doctest::Approx(0.8153).epsilon(1e-4));
}

TEST_CASE("inconsistent source") {
  // Every column puts at least 0.6 on symbol 0, so P(1) = 0.9 is unreachable.
  Eigen::MatrixXd m(2, 2);
  m << 0.6, 0.9, 0.4, 0.1;
  const ConsistencyReport r = consistency_polytope(Pmf::bernoulli(0.9), Channel(make_alphabet(2), make_alphabet(2), m));
  CHECK_FALSE(r.feasible);
}

TEST_CASE("logloss bound") {
  const Pmf p = Pmf::bernoulli(0.25);
  CHECK(logloss_rdf(p, 0.0) == doctest::Approx(entropy(p)));
  CHECK(logloss_rdf(p, 10.0) == 0.0);
  CHECK_THROWS_AS(logloss_rdf(p, -1.0), ValidationError);
}

TEST_CASE("property: structural quantities on random problems") {
  gen::Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t nx = rng.index(2, 5), nu = rng.index(1, 5);
    const Pmf p = rng.pmf(nx, true);
    const Channel ch = rng.channel(nu, nx);
    const FeasibleRange f = feasible_range(p, ch);
    CHECK(f.d_min <= f.d_max + 1e-12);
    CHECK(f.d_min == doctest::Approx(oracle::d_min(vec(p), lik_rows(ch))).epsilon(1e-12));
    CHECK(f.d_max == doctest::Approx(oracle::d_max(vec(p), lik_rows(ch))).epsilon(1e-12));
    const DminRate r = rate_at_dmin(p, ch);
    CHECK(r.rate <= entropy(p) + 1e-9);
    CHECK(r.rate >= -1e-12);
    const ConsistencyReport c = consistency_polytope(p, ch);
    if (c.feasible) {
      const Eigen::VectorXd mixed = ch.matrix() * c.witness_prior().probs();
      CHECK((mixed - p.probs()).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(c.d_star_min >= f.d_min - 1e-9);
      CHECK(c.d_star_max <= f.d_max + 1e-9);
    }
  }
}

TEST_CASE("property: decomposition identity on random triples") {
  gen::Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t nx = rng.index(2, 8), nu = rng.index(2, 8);
    const Pmf p = rng.pmf(nx, true);
    const Channel ch = rng.channel(nu, nx);
    const Channel test = rng.channel(nx, nu);
    const Decomposition dec = decomposition_check(p, ch, test);
    CHECK(std::abs(dec.lhs - dec.rhs) <= 1e-9);
    CHECK(dec.lhs == doctest::Approx(expected_distortion(p, test, loglik_distortion(ch))).epsilon(1e-12));
  }
}

TEST_CASE("property: D* tangency with the log-loss line") {
  gen::Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = rng.index(2, 4);
    const Channel ch = rng.channel(n, n);
    // A source built from a prior is consistent by construction.
    const Pmf prior = rng.full_pmf(n);
    const Pmf p = Pmf::normalized(make_alphabet(n), ch.matrix() * prior.probs());
    const ConsistencyReport c = consistency_polytope(p, ch);
    REQUIRE(c.feasible);
    const DistortionMatrix d = loglik_distortion(ch);
    const ba::RdPoint pt = ba::rd_at_distortion(p, d, c.d_star_min);
    CHECK(pt.rate == doctest::Approx(entropy(p) - pt.distortion).epsilon(1e-5));
  }
}
