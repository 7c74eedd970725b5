#include "llrd/info.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "llrd/errors.hpp"

namespace llrd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_unique(const Alphabet& alphabet, const char* what) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    if (!seen.insert(alphabet[i]).second) {
      std::ostringstream os;
      os << what << ": duplicate label '" << alphabet[i] << "' at index " << i;
      throw ValidationError(os.str());
    }
  }
}

void check_same(const Alphabet& a, const Alphabet& b, const char* what) {
  if (a != b) throw ValidationError(std::string(what) + ": alphabet mismatch");
}

}  // namespace

Alphabet make_alphabet(std::size_t n) {
  Alphabet out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i));
  return out;
}

double to_units(double nats, LogBase base) {
  return base == LogBase::bits ? nats / std::numbers::ln2 : nats;
}

double from_units(double value, LogBase base) {
  return base == LogBase::bits ? value * std::numbers::ln2 : value;
}

std::string to_string(LogBase base) { return base == LogBase::bits ? "bits" : "nats"; }

LogBase parse_log_base(const std::string& name) {
  if (name == "bits") return LogBase::bits;
  if (name == "nats") return LogBase::natural;
  throw ValidationError("units: expected 'bits' or 'nats', got '" + name + "'");
}

// ---------------------------------------------------------------------------
// Pmf

Pmf::Pmf(Alphabet alphabet, Eigen::VectorXd probs)
    : alphabet_(std::move(alphabet)), probs_(std::move(probs)) {
  if (alphabet_.size() != static_cast<std::size_t>(probs_.size())) {
    throw ValidationError("pmf: alphabet has " + std::to_string(alphabet_.size()) +
                          " labels but " + std::to_string(probs_.size()) + " probabilities");
  }
  if (alphabet_.empty()) throw ValidationError("pmf: empty alphabet");
  check_unique(alphabet_, "pmf");
  for (Eigen::Index i = 0; i < probs_.size(); ++i) {
    if (!(probs_(i) >= 0.0) || !std::isfinite(probs_(i))) {
      throw ValidationError("pmf: probability at index " + std::to_string(i) +
                            " is negative or not finite");
    }
  }
  if (std::abs(probs_.sum() - 1.0) > kSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "pmf: probabilities sum to " << probs_.sum() << ", not 1";
    throw ValidationError(os.str());
  }
}

Pmf Pmf::normalized(Alphabet alphabet, const Eigen::VectorXd& weights) {
  const double total = weights.sum();
  if (!(total > 0.0)) throw ValidationError("pmf: weights have no positive mass");
  return Pmf(std::move(alphabet), weights / total);
}

Pmf Pmf::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("bernoulli: p outside [0, 1]");
  Eigen::VectorXd v(2);
  v << 1.0 - p, p;
  return Pmf(make_alphabet(2), v);
}

Pmf Pmf::uniform(std::size_t n) {
  return Pmf(make_alphabet(n), Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / n));
}

Pmf Pmf::point_mass(std::size_t n, std::size_t index) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return Pmf(make_alphabet(n), v);
}

// ---------------------------------------------------------------------------
// Channel

Channel::Channel(Alphabet input, Alphabet output, Eigen::MatrixXd matrix)
    : input_(std::move(input)), output_(std::move(output)), matrix_(std::move(matrix)) {
  if (static_cast<std::size_t>(matrix_.rows()) != output_.size() ||
      static_cast<std::size_t>(matrix_.cols()) != input_.size()) {
    throw ValidationError("channel: matrix is " + std::to_string(matrix_.rows()) + "x" +
                          std::to_string(matrix_.cols()) + " but alphabets are " +
                          std::to_string(output_.size()) + " (out) x " +
                          std::to_string(input_.size()) + " (in)");
  }
  if (input_.empty() || output_.empty()) throw ValidationError("channel: empty alphabet");
  check_unique(input_, "channel input");
  check_unique(output_, "channel output");
  for (Eigen::Index c = 0; c < matrix_.cols(); ++c) {
    for (Eigen::Index r = 0; r < matrix_.rows(); ++r) {
      if (!(matrix_(r, c) >= 0.0) || !std::isfinite(matrix_(r, c))) {
        throw ValidationError("channel: entry (" + std::to_string(r) + ", " +
                              std::to_string(c) + ") is negative or not finite");
      }
    }
    if (std::abs(matrix_.col(c).sum() - 1.0) > kSumTolerance) {
      throw ValidationError("channel: column " + std::to_string(c) + " does not sum to 1");
    }
  }
}

Channel Channel::normalized(Alphabet input, Alphabet output, Eigen::MatrixXd weights) {
  for (Eigen::Index c = 0; c < weights.cols(); ++c) {
    const double s = weights.col(c).sum();
    if (s > 0.0) {
      weights.col(c) /= s;
    } else {
      weights.col(c).setConstant(1.0 / static_cast<double>(weights.rows()));
    }
  }
  return Channel(std::move(input), std::move(output), std::move(weights));
}

Channel Channel::bsc(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw ValidationError("bsc: crossover outside [0, 1]");
  Eigen::MatrixXd m(2, 2);
  m << 1.0 - eps, eps, eps, 1.0 - eps;
  return Channel(make_alphabet(2), make_alphabet(2), m);
}

Channel Channel::identity(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return Channel(make_alphabet(n), make_alphabet(n), Eigen::MatrixXd::Identity(k, k));
}

Pmf Channel::column(std::size_t in) const {
  return Pmf(output_, matrix_.col(static_cast<Eigen::Index>(in)));
}

// ---------------------------------------------------------------------------
// Joint

Joint::Joint(Alphabet rows, Alphabet cols, Eigen::MatrixXd matrix)
    : rows_(std::move(rows)), cols_(std::move(cols)), matrix_(std::move(matrix)) {
  if (static_cast<std::size_t>(matrix_.rows()) != rows_.size() ||
      static_cast<std::size_t>(matrix_.cols()) != cols_.size()) {
    throw ValidationError("joint: matrix shape does not match alphabets");
  }
  check_unique(rows_, "joint rows");
  check_unique(cols_, "joint cols");
  if ((matrix_.array() < 0.0).any() || !matrix_.allFinite()) {
    throw ValidationError("joint: entries must be finite and nonnegative");
  }
  if (std::abs(matrix_.sum() - 1.0) > kSumTolerance) {
    throw ValidationError("joint: total mass is not 1");
  }
}

Joint joint_from(const Pmf& p_in, const Channel& ch) {
  check_same(p_in.alphabet(), ch.input_alphabet(), "joint_from");
  Eigen::MatrixXd m = ch.matrix() * p_in.probs().asDiagonal();
  return Joint(ch.output_alphabet(), ch.input_alphabet(), std::move(m));
}

Pmf marginal_row(const Joint& j) {
  return Pmf::normalized(j.row_alphabet(), j.matrix().rowwise().sum());
}

Pmf marginal_col(const Joint& j) {
  return Pmf::normalized(j.col_alphabet(), j.matrix().colwise().sum().transpose());
}

Joint transpose(const Joint& j) {
  return Joint(j.col_alphabet(), j.row_alphabet(), j.matrix().transpose());
}

Reversal bayes_reverse(const Joint& j) {
  const Eigen::MatrixXd& m = j.matrix();
  Eigen::MatrixXd rev(m.cols(), m.rows());
  Reversal out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double mass = m.row(r).sum();
    if (mass > 0.0) {
      rev.col(r) = m.row(r).transpose() / mass;
    } else {
      rev.col(r).setConstant(1.0 / static_cast<double>(m.cols()));
      out.undefined_inputs.push_back(static_cast<std::size_t>(r));
    }
  }
  out.channel = Channel::normalized(j.row_alphabet(), j.col_alphabet(), std::move(rev));
  return out;
}

// ---------------------------------------------------------------------------
// Information measures

namespace detail {

double entropy_nats(const Eigen::Ref<const Eigen::VectorXd>& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > 0.0) h -= p(i) * std::log(p(i));
  }
  return h;
}

double kl_nats(const Eigen::Ref<const Eigen::VectorXd>& p,
               const Eigen::Ref<const Eigen::VectorXd>& q) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) <= 0.0) continue;
    if (q(i) <= 0.0) return kInf;
    d += p(i) * std::log(p(i) / q(i));
  }
  return d < 0.0 ? 0.0 : d;
}

double mutual_information_nats(const Eigen::Ref<const Eigen::MatrixXd>& joint) {
  const Eigen::VectorXd rows = joint.rowwise().sum();
  const Eigen::VectorXd cols = joint.colwise().sum().transpose();
  double mi = 0.0;
  for (Eigen::Index c = 0; c < joint.cols(); ++c) {
    for (Eigen::Index r = 0; r < joint.rows(); ++r) {
      const double v = joint(r, c);
      if (v > 0.0) mi += v * std::log(v / (rows(r) * cols(c)));
    }
  }
  return mi < 0.0 ? 0.0 : mi;
}

}  // namespace detail

double entropy(const Pmf& p, LogBase base) {
  return to_units(detail::entropy_nats(p.probs()), base);
}

double kl_divergence(const Pmf& p, const Pmf& q, LogBase base) {
  check_same(p.alphabet(), q.alphabet(), "kl_divergence");
  return to_units(detail::kl_nats(p.probs(), q.probs()), base);
}

double cross_entropy(const Pmf& p, const Pmf& q, LogBase base) {
  check_same(p.alphabet(), q.alphabet(), "cross_entropy");
  const double kl = detail::kl_nats(p.probs(), q.probs());
  if (std::isinf(kl)) return kInf;
  return to_units(detail::entropy_nats(p.probs()) + kl, base);
}

double mutual_information(const Joint& j, LogBase base) {
  return to_units(detail::mutual_information_nats(j.matrix()), base);
}

double conditional_entropy(const Joint& j, LogBase base) {
  const Eigen::MatrixXd& m = j.matrix();
  double h = 0.0;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double mass = m.col(c).sum();
    if (mass <= 0.0) continue;
    h += mass * detail::entropy_nats(m.col(c) / mass);
  }
  return to_units(h, base);
}

}  // namespace llrd
