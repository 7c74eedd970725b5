#include <benchmark/benchmark.h>

#include <cmath>

#include "llrd/ba.hpp"
#include "llrd/loglik.hpp"
#include "llrd/lp.hpp"
#include "llrd/rdp.hpp"

using namespace llrd;

namespace {

Pmf geometric_source(std::size_t n) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = std::pow(0.8, static_cast<double>(i));
  return Pmf::normalized(make_alphabet(n), w);
}

std::vector<double> grid_points(std::size_t n) {
  std::vector<double> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = static_cast<double>(i) / static_cast<double>(n);
  return pts;
}

}  // namespace

static void BM_BlahutArimoto(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Pmf p = geometric_source(n);
  const DistortionMatrix d = DistortionMatrix::squared_distance(grid_points(n));
  ba::BaConfig cfg;
  cfg.slope = 20.0;
  for (auto _ : state) benchmark::DoNotOptimize(ba::ba_fixed_slope(p, d, cfg).rate);
}
BENCHMARK(BM_BlahutArimoto)->Arg(4)->Arg(16)->Arg(64);

static void BM_RdAtDistortion(benchmark::State& state) {
  const Pmf p = Pmf::bernoulli(0.25);
  const DistortionMatrix d = DistortionMatrix::hamming(2);
  for (auto _ : state) benchmark::DoNotOptimize(ba::rd_at_distortion(p, d, 0.1).rate);
}
BENCHMARK(BM_RdAtDistortion);

static void BM_Sinkhorn(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Pmf p = geometric_source(n);
  const DistortionMatrix d = DistortionMatrix::squared_distance(grid_points(n));
  for (auto _ : state) benchmark::DoNotOptimize(rdp::sinkhorn(p, d, 5.0).rate);
}
BENCHMARK(BM_Sinkhorn)->Arg(4)->Arg(16)->Arg(64);

static void BM_ConsistencyLp(benchmark::State& state) {
  Eigen::MatrixXd m(2, 3);
  m << 0.8, 0.4, 0.2, 0.2, 0.6, 0.8;
  const Channel ch(make_alphabet(3), make_alphabet(2), m);
  const Pmf p = Pmf::bernoulli(0.35);
  for (auto _ : state) benchmark::DoNotOptimize(loglik::consistency_polytope(p, ch).d_star_min);
}
BENCHMARK(BM_ConsistencyLp);

static void BM_LpSimplex(benchmark::State& state) {
  const auto n = state.range(0);
  LpProblem lp;
  lp.a = Eigen::MatrixXd::Ones(2, n);
  lp.a.row(1) = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0).transpose();
  lp.b = Eigen::Vector2d(1.0, 0.3);
  lp.objective = Eigen::VectorXd::LinSpaced(n, 1.0, 2.0).array().square().matrix();
  for (auto _ : state) benchmark::DoNotOptimize(lp_solve(lp).objective);
}
BENCHMARK(BM_LpSimplex)->Arg(8)->Arg(32)->Arg(128);

static void BM_HammingCpFactor(benchmark::State& state) {
  const auto q = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rdp::hamming_cp_factor(q, 1.0).b.sum());
}
BENCHMARK(BM_HammingCpFactor)->Arg(4)->Arg(64);

static void BM_NumericCpFactor(benchmark::State& state) {
  const Eigen::MatrixXd v =
      rdp::cp_exponential_matrix(DistortionMatrix::squared_distance({0.0, 1.0, 2.0}), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(rdp::cp_factor_numeric(v, 4, 2, 1000).residual);
}
BENCHMARK(BM_NumericCpFactor);

BENCHMARK_MAIN();
