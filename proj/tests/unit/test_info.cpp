#include <cmath>

#include "doctest.h"
#include "llrd/errors.hpp"
#include "llrd/info.hpp"
#include "llrd/lp.hpp"
#include "oracles.hpp"
#include "random_instances.hpp"

using namespace llrd;

namespace {

oracle::Mat to_rows(const Eigen::MatrixXd& m) {
  oracle::Mat out(static_cast<std::size_t>(m.rows()), oracle::Vec(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  return out;
}

}  // namespace

TEST_CASE("pmf validation") {
  CHECK_THROWS_AS(Pmf(make_alphabet(2), Eigen::Vector2d(0.6, 0.6)), ValidationError);
  CHECK_THROWS_AS(Pmf(make_alphabet(2), Eigen::Vector2d(1.1, -0.1)), ValidationError);
  CHECK_THROWS_AS(Pmf({"a", "a"}, Eigen::Vector2d(0.5, 0.5)), ValidationError);
  CHECK_NOTHROW(Pmf(make_alphabet(2), Eigen::Vector2d(0.25, 0.75)));
  CHECK(Pmf::bernoulli(0.25)[1] == doctest::Approx(0.25));
  CHECK(Pmf::uniform(4)[3] == doctest::Approx(0.25));
}

TEST_CASE("channel validation and normalization") {
  Eigen::MatrixXd bad(2, 2);
  bad << 0.5, 0.2, 0.4, 0.8;
  CHECK_THROWS_AS(Channel(make_alphabet(2), make_alphabet(2), bad), ValidationError);
  Eigen::MatrixXd w(2, 2);
  w << 2, 0, 2, 0;
  const Channel c = Channel::normalized(make_alphabet(2), make_alphabet(2), w);
  CHECK(c(0, 0) == doctest::Approx(0.5));
  CHECK(c(1, 1) == doctest::Approx(0.5));
  const Channel b = Channel::bsc(0.1);
  CHECK(b(1, 0) == doctest::Approx(0.1));
  CHECK(b(1, 1) == doctest::Approx(0.9));
}

TEST_CASE("entropy values") {
  CHECK(entropy(Pmf::uniform(8), LogBase::bits) == doctest::Approx(3.0));
  CHECK(entropy(Pmf::point_mass(5, 2)) == 0.0);
  CHECK(entropy(Pmf::bernoulli(0.25), LogBase::bits) == doctest::Approx(0.8112781244591328).epsilon(1e-12));
}

TEST_CASE("kl saturates on support violation") {
  const Pmf p = Pmf::bernoulli(0.5);
  const Pmf q = Pmf::point_mass(2, 0);
  CHECK(std::isinf(kl_divergence(p, q)));
  CHECK(kl_divergence(q, p) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("bayes reversal flags zero-mass rows") {
  Eigen::MatrixXd m(3, 2);
  m << 0.3, 0.2, 0.0, 0.0, 0.1, 0.4;
  const Joint j(make_alphabet(3), make_alphabet(2), m);
  const Reversal r = bayes_reverse(j);
  REQUIRE(r.undefined_inputs.size() == 1);
  CHECK(r.undefined_inputs[0] == 1);
  CHECK(r.channel(0, 0) == doctest::Approx(0.6));
  CHECK(r.channel(1, 2) == doctest::Approx(0.8));
}

TEST_CASE("property: information identities on random joints") {
  gen::Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t nr = rng.index(1, 6), nc = rng.index(1, 6);
    const Eigen::VectorXd flat = rng.weights(nr * nc, true);
    Eigen::MatrixXd m = Eigen::Map<const Eigen::MatrixXd>(flat.data(), static_cast<Eigen::Index>(nr),
                                                          static_cast<Eigen::Index>(nc));
    m /= m.sum();
    const Joint j(make_alphabet(nr), make_alphabet(nc), m);
    const double mi = mutual_information(j);
    CHECK(mi >= -1e-12);
    CHECK(mi == doctest::Approx(oracle::mutual_info(to_rows(m))).epsilon(1e-9));
    CHECK(mi == doctest::Approx(mutual_information(transpose(j))).epsilon(1e-9));
    CHECK(mi == doctest::Approx(entropy(marginal_row(j)) - conditional_entropy(j)).epsilon(1e-9));
    CHECK(entropy(marginal_row(j)) <= std::log(static_cast<double>(nr)) + 1e-12);
    const Pmf p = rng.pmf(nc), q = rng.full_pmf(nc);
    CHECK(kl_divergence(p, q) >= -1e-12);
    CHECK(cross_entropy(p, q) == doctest::Approx(entropy(p) + kl_divergence(p, q)).epsilon(1e-9));
  }
}

TEST_CASE("lp: small known optimum") {
  // min -x - y s.t. x + 2y + s1 = 4, 3x + y + s2 = 6.
  LpProblem lp;
  lp.a.resize(2, 4);
  lp.a << 1, 2, 1, 0, 3, 1, 0, 1;
  lp.b = Eigen::Vector2d(4, 6);
  lp.objective = Eigen::Vector4d(-1, -1, 0, 0);
  const LpSolution s = lp_solve(lp);
  REQUIRE(s.status == LpStatus::feasible);
  CHECK(s.objective == doctest::Approx(-2.8));
  CHECK(s.witness(0) == doctest::Approx(1.6));
  CHECK(s.witness(1) == doctest::Approx(1.2));
}

TEST_CASE("lp: infeasible and unbounded") {
  LpProblem inf;
  inf.a.resize(2, 2);
  inf.a << 1, 1, 1, 1;
  inf.b = Eigen::Vector2d(1, 2);
  CHECK(lp_solve(inf).status == LpStatus::infeasible);

  LpProblem unb;
  unb.a.resize(1, 2);
  unb.a << 1, -1;
  unb.b = Eigen::VectorXd::Constant(1, 1.0);
  unb.objective = Eigen::Vector2d(-1, 0);
  CHECK(lp_solve(unb).status == LpStatus::unbounded);
}

TEST_CASE("lp: redundant rows are tolerated") {
  LpProblem lp;
  lp.a.resize(3, 2);
  lp.a << 1, 1, 2, 2, 1, 0;
  lp.b = Eigen::Vector3d(1, 2, 0.3);
  const LpSolution s = lp_solve(lp);
  REQUIRE(s.status == LpStatus::feasible);
  CHECK(s.witness(1) == doctest::Approx(0.7));
}

TEST_CASE("property: lp feasible instances built from a planted point") {
  gen::Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = static_cast<Eigen::Index>(rng.index(1, 5));
    const auto n = static_cast<Eigen::Index>(rng.index(1, 8));
    LpProblem lp;
    lp.a.resize(m, n);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index k = 0; k < n; ++k) lp.a(i, k) = rng.uniform(-1.0, 2.0);
    Eigen::VectorXd x0(n);
    for (Eigen::Index k = 0; k < n; ++k) x0(k) = rng.coin(0.3) ? 0.0 : rng.uniform();
    lp.b = lp.a * x0;
    Eigen::VectorXd c(n);
    for (Eigen::Index k = 0; k < n; ++k) c(k) = rng.uniform(0.0, 1.0);  // bounded below by 0
    lp.objective = c;
    const LpSolution s = lp_solve(lp);
    REQUIRE(s.status == LpStatus::feasible);
    CHECK(s.residual <= 1e-9 * (1.0 + lp.b.cwiseAbs().maxCoeff()));
    CHECK(s.witness.minCoeff() >= 0.0);
    CHECK(s.objective <= c.dot(x0) + 1e-9);
  }
}
