#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qsched {

// Point on the probability simplex. Construction renormalizes sums that are
// within 1e-9 of one and rejects anything worse, so downstream code can rely
// on an exact unit sum.
class ProbabilityVector {
 public:
  static constexpr double kSumTolerance = 1e-9;

  explicit ProbabilityVector(Eigen::VectorXd weights) : w_(std::move(weights)) {
    if (w_.size() < 1) throw std::invalid_argument("ProbabilityVector: need at least one weight");
    if (!w_.allFinite()) throw std::invalid_argument("ProbabilityVector: non-finite weight");
    if ((w_.array() < 0.0).any()) throw std::invalid_argument("ProbabilityVector: negative weight");
    const double sum = w_.sum();
    if (std::abs(sum - 1.0) > kSumTolerance)
      throw std::invalid_argument("ProbabilityVector: weights sum to " + std::to_string(sum));
    w_ /= sum;
  }

  ProbabilityVector(std::initializer_list<double> weights)
      : ProbabilityVector(Eigen::Map<const Eigen::VectorXd>(
            std::data(weights), static_cast<Eigen::Index>(weights.size()))) {}

  static ProbabilityVector uniform(int n) {
    if (n < 1) throw std::invalid_argument("ProbabilityVector::uniform: n must be positive");
    return ProbabilityVector(Eigen::VectorXd::Constant(n, 1.0 / n));
  }

  static ProbabilityVector unit(int n, int arm) {
    if (n < 1) throw std::invalid_argument("ProbabilityVector::unit: n must be positive");
    if (arm < 0 || arm >= n) throw std::invalid_argument("ProbabilityVector::unit: arm out of range");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    w(arm) = 1.0;
    return ProbabilityVector(std::move(w));
  }

  const Eigen::VectorXd& weights() const { return w_; }
  int size() const { return static_cast<int>(w_.size()); }
  double operator[](int i) const { return w_(i); }

 private:
  Eigen::VectorXd w_;
};

// Euclidean projection onto the simplex in sort-based threshold form:
// w_i = max(v_i - theta, 0) with theta chosen so the result sums to one.
template <typename Derived>
ProbabilityVector project_to_simplex(const Eigen::MatrixBase<Derived>& v_in) {
  Eigen::VectorXd v = v_in;
  if (v.size() < 1) throw std::invalid_argument("project_to_simplex: empty input");
  if (!v.allFinite()) throw std::invalid_argument("project_to_simplex: non-finite input");

  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());

  // The feasibility condition u_j > (cum_j - 1)/j holds on a prefix of the
  // descending sort; theta is the threshold at the last feasible rank.
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }
  return ProbabilityVector((v.array() - theta).cwiseMax(0.0).matrix());
}

// Inverse-CDF draw over the weights in index order. Cells are half-open
// [c_{i-1}, c_i), so the lowest index whose cell contains u wins and
// zero-weight arms are never selected.
inline int sample_arm(const ProbabilityVector& p, double u) {
  if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("sample_arm: u must lie in [0,1)");
  const Eigen::VectorXd& w = p.weights();
  double cumulative = 0.0;
  for (int i = 0; i + 1 < p.size(); ++i) {
    cumulative += w(i);
    if (u < cumulative) return i;
  }
  return p.size() - 1;
}

// (1 - gamma) p + gamma/N: every component ends up at least gamma/N.
inline ProbabilityVector mix_with_uniform(const ProbabilityVector& p, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("mix_with_uniform: gamma outside [0,1]");
  const int n = p.size();
  return ProbabilityVector(((1.0 - gamma) * p.weights().array() + gamma / n).matrix());
}

}  // namespace qsched
