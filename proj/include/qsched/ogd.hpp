#pragma once

#include "qsched/simplex.hpp"

#include <Eigen/Core>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace qsched {

// Step size sqrt(2) / (G sqrt(T)) for gain sequences with ||g_t||_2 <= G.
inline double recommended_step_size(double gain_bound, long horizon) {
  if (!(gain_bound > 0.0))
    throw std::invalid_argument("recommended_step_size: gain_bound must be positive");
  if (horizon < 1) throw std::invalid_argument("recommended_step_size: horizon must be positive");
  return std::sqrt(2.0) / (gain_bound * std::sqrt(static_cast<double>(horizon)));
}

// Projected gradient ascent over the simplex for the full-information expert
// problem: p <- Proj(p + eta g). With the recommended step size the regret on
// every contiguous time window stays below gain_bound * sqrt(2 T).
class OgdLearner {
 public:
  OgdLearner(int n_arms, double eta, double gain_bound,
             std::optional<ProbabilityVector> p0 = std::nullopt)
      : p_(p0 ? std::move(*p0) : ProbabilityVector::uniform(n_arms)),
        eta_(eta),
        gain_bound_(gain_bound) {
    if (n_arms < 1) throw std::invalid_argument("OgdLearner: n_arms must be positive");
    if (p_.size() != n_arms) throw std::invalid_argument("OgdLearner: p0 dimension mismatch");
    if (!(eta_ > 0.0)) throw std::invalid_argument("OgdLearner: eta must be positive");
    if (!(gain_bound_ > 0.0)) throw std::invalid_argument("OgdLearner: gain_bound must be positive");
  }

  // Gains must be nonnegative with ||g||_2 <= gain_bound; the window regret
  // guarantee is conditioned on that, so violations are rejected outright.
  void update(const Eigen::Ref<const Eigen::VectorXd>& gains) {
    if (gains.size() != p_.size()) throw std::invalid_argument("OgdLearner::update: dimension mismatch");
    if (!gains.allFinite() || (gains.array() < 0.0).any())
      throw std::invalid_argument("OgdLearner::update: gains must be finite and nonnegative");
    const double norm = gains.norm();
    if (norm > gain_bound_ * (1.0 + 1e-12) + 1e-12)
      throw std::logic_error("OgdLearner::update: gain norm " + std::to_string(norm) +
                             " exceeds bound " + std::to_string(gain_bound_) + " at round " +
                             std::to_string(round_));
    p_ = project_to_simplex(p_.weights() + eta_ * gains);
    ++round_;
  }

  const ProbabilityVector& distribution() const { return p_; }
  double eta() const { return eta_; }
  double gain_bound() const { return gain_bound_; }
  long round() const { return round_; }

 private:
  ProbabilityVector p_;
  double eta_;
  double gain_bound_;
  long round_ = 0;
};

}  // namespace qsched
