#pragma once

// Finite probability primitives: pmfs, channels, joints and the Shannon
// information measures over them. Everything is computed in nats; LogBase
// only matters at reporting boundaries (to_units / from_units).

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace llrd {

using Alphabet = std::vector<std::string>;

enum class LogBase { natural, bits };

// Labels "0", "1", ..., "n-1".
Alphabet make_alphabet(std::size_t n);

double to_units(double nats, LogBase base);
double from_units(double value, LogBase base);
std::string to_string(LogBase base);
LogBase parse_log_base(const std::string& name);

inline constexpr double kSumTolerance = 1e-12;

class Pmf {
 public:
  Pmf() = default;
  // Throws ValidationError unless probs is nonnegative, sums to one within
  // kSumTolerance and labels are unique.
  Pmf(Alphabet alphabet, Eigen::VectorXd probs);

  // Divides nonnegative weights by their sum.
  static Pmf normalized(Alphabet alphabet, const Eigen::VectorXd& weights);
  // Alphabet {"0","1"} with P(1) = p.
  static Pmf bernoulli(double p);
  static Pmf uniform(std::size_t n);
  static Pmf point_mass(std::size_t n, std::size_t index);

  const Alphabet& alphabet() const { return alphabet_; }
  const Eigen::VectorXd& probs() const { return probs_; }
  std::size_t size() const { return static_cast<std::size_t>(probs_.size()); }
  double operator[](std::size_t i) const { return probs_(static_cast<Eigen::Index>(i)); }

  friend bool operator==(const Pmf& a, const Pmf& b) {
    return a.alphabet_ == b.alphabet_ && a.probs_ == b.probs_;
  }

 private:
  Alphabet alphabet_;
  Eigen::VectorXd probs_;
};

// Conditional distribution stored column-stochastic: matrix(out, in) =
// P(out | in).
class Channel {
 public:
  Channel() = default;
  Channel(Alphabet input, Alphabet output, Eigen::MatrixXd matrix);

  // Divides each column by its sum; all-zero columns become uniform.
  static Channel normalized(Alphabet input, Alphabet output, Eigen::MatrixXd weights);
  // Binary symmetric channel with crossover probability eps.
  static Channel bsc(double eps);
  static Channel identity(std::size_t n);

  const Alphabet& input_alphabet() const { return input_; }
  const Alphabet& output_alphabet() const { return output_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  std::size_t input_size() const { return input_.size(); }
  std::size_t output_size() const { return output_.size(); }
  double operator()(std::size_t out, std::size_t in) const {
    return matrix_(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
  }
  Pmf column(std::size_t in) const;

  friend bool operator==(const Channel& a, const Channel& b) {
    return a.input_ == b.input_ && a.output_ == b.output_ && a.matrix_ == b.matrix_;
  }

 private:
  Alphabet input_;
  Alphabet output_;
  Eigen::MatrixXd matrix_;
};

class Joint {
 public:
  Joint() = default;
  Joint(Alphabet rows, Alphabet cols, Eigen::MatrixXd matrix);

  const Alphabet& row_alphabet() const { return rows_; }
  const Alphabet& col_alphabet() const { return cols_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  double operator()(std::size_t r, std::size_t c) const {
    return matrix_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }

 private:
  Alphabet rows_;
  Alphabet cols_;
  Eigen::MatrixXd matrix_;
};

// joint(out, in) = ch(out | in) * p_in(in).
Joint joint_from(const Pmf& p_in, const Channel& ch);
Pmf marginal_row(const Joint& j);
Pmf marginal_col(const Joint& j);
Joint transpose(const Joint& j);

struct Reversal {
  // Channel from the joint's row alphabet to its column alphabet.
  Channel channel;
  // Row symbols with zero marginal; their columns are set to uniform.
  std::vector<std::size_t> undefined_inputs;
};

// Bayes reversal of the row-given-column channel encoded by j:
// result(c | r) = j(r, c) / row_marginal(r).
Reversal bayes_reverse(const Joint& j);

// All measures skip zero-probability terms (0 log 0 = 0) and saturate to
// +inf instead of throwing when absolute continuity fails.
double entropy(const Pmf& p, LogBase base = LogBase::natural);
double kl_divergence(const Pmf& p, const Pmf& q, LogBase base = LogBase::natural);
double cross_entropy(const Pmf& p, const Pmf& q, LogBase base = LogBase::natural);
double mutual_information(const Joint& j, LogBase base = LogBase::natural);
// H(row | col).
double conditional_entropy(const Joint& j, LogBase base = LogBase::natural);

namespace detail {
// Raw-vector kernels in nats; inputs are assumed to be valid.
double entropy_nats(const Eigen::Ref<const Eigen::VectorXd>& p);
double kl_nats(const Eigen::Ref<const Eigen::VectorXd>& p,
               const Eigen::Ref<const Eigen::VectorXd>& q);
double mutual_information_nats(const Eigen::Ref<const Eigen::MatrixXd>& joint);
}  // namespace detail

}  // namespace llrd
