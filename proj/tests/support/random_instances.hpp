#pragma once

// Seeded generators for property tests.

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "llrd/info.hpp"
#include "llrd/loglik.hpp"

namespace gen {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  std::size_t index(std::size_t lo, std::size_t hi) {  // inclusive
    return std::uniform_int_distribution<std::size_t>(lo, hi)(eng_);
  }
  bool coin(double p = 0.5) { return uniform() < p; }

  // Dirichlet(1)-like weights; with sparse = true some entries are zeroed
  // (never all of them).
  Eigen::VectorXd weights(std::size_t n, bool sparse = false) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = -std::log(uniform(1e-12, 1.0));
    if (sparse) {
      for (Eigen::Index i = 0; i < w.size(); ++i)
        if (coin(0.25)) w(i) = 0.0;
      if (w.sum() == 0.0) w(static_cast<Eigen::Index>(index(0, n - 1))) = 1.0;
    }
    return w / w.sum();
  }

  llrd::Pmf pmf(std::size_t n, bool sparse = false) {
    return llrd::Pmf::normalized(llrd::make_alphabet(n), weights(n, sparse));
  }

  llrd::Pmf full_pmf(std::size_t n) {
    Eigen::VectorXd w = weights(n) + Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 0.02);
    return llrd::Pmf::normalized(llrd::make_alphabet(n), w);
  }

  // Channel with `in` inputs and `out` outputs, strictly positive entries.
  llrd::Channel channel(std::size_t in, std::size_t out) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m.col(c) = weights(out) + Eigen::VectorXd::Constant(m.rows(), 0.01);
    }
    return llrd::Channel::normalized(llrd::make_alphabet(in), llrd::make_alphabet(out), m);
  }

  llrd::DistortionMatrix distortion(std::size_t nx, std::size_t ny) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(ny));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = uniform(0.0, 3.0);
    return llrd::DistortionMatrix(llrd::make_alphabet(nx), llrd::make_alphabet(ny), m);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace gen
