#pragma once

#include "qsched/ogd.hpp"
#include "qsched/policy.hpp"

#include <Eigen/Core>

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace qsched {

// gamma = min(1, sqrt(N) T^{-1/4}).
inline double exploration_probability(int n_arms, long horizon) {
  if (n_arms < 1) throw std::invalid_argument("exploration_probability: n_arms must be positive");
  if (horizon < 1) throw std::invalid_argument("exploration_probability: horizon must be positive");
  return std::min(1.0, std::sqrt(static_cast<double>(n_arms)) *
                           std::pow(static_cast<double>(horizon), -0.25));
}

// One-sample inverse-probability estimate: observed / P(arm) at the chosen
// arm, zero elsewhere. Unbiased when arms are drawn from play_distribution.
inline Eigen::VectorXd estimate_gain(double observed, int arm,
                                     const ProbabilityVector& play_distribution) {
  if (!(observed >= 0.0 && observed <= 1.0))
    throw std::invalid_argument("estimate_gain: observed outside [0,1]");
  if (arm < 0 || arm >= play_distribution.size())
    throw std::invalid_argument("estimate_gain: arm out of range");
  const double prob = play_distribution[arm];
  if (!(prob > 0.0)) throw std::logic_error("estimate_gain: zero probability at chosen arm");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(play_distribution.size());
  g(arm) = observed / prob;
  return g;
}

// Bandit scheduler: with probability gamma the arm is drawn uniformly,
// otherwise from an internal projected-gradient expert learner. Gains are
// estimated against the mixed law (1-gamma) p_t + gamma/N regardless of the
// branch taken, which keeps the estimate norm at most N/gamma.
class WamabPolicy final : public Policy {
 public:
  WamabPolicy(int n_arms, long horizon)
      : gamma_(exploration_probability(n_arms, horizon)),
        learner_(n_arms,
                 std::sqrt(2.0) * gamma_ /
                     (static_cast<double>(n_arms) * std::sqrt(static_cast<double>(horizon))),
                 static_cast<double>(n_arms) / gamma_),
        uniform_(ProbabilityVector::uniform(n_arms)),
        mixed_(ProbabilityVector::uniform(n_arms)),
        horizon_below_square_(horizon < static_cast<long>(n_arms) * n_arms) {
    if (horizon_below_square_)
      std::cerr << "warning: wamab horizon " << horizon << " is below n_arms^2 = "
                << static_cast<long>(n_arms) * n_arms << "; the regret guarantee assumes T >= N^2\n";
  }

  double gamma() const { return gamma_; }
  const OgdLearner& learner() const { return learner_; }
  long round() const { return learner_.round(); }
  bool horizon_below_square() const { return horizon_below_square_; }

  std::string name() const override { return "wamab"; }
  const ProbabilityVector* play_distribution() const override { return &mixed_; }

 protected:
  int do_select(double u_branch, double u_arm) override {
    mixed_ = mix_with_uniform(learner_.distribution(), gamma_);
    return u_branch < gamma_ ? sample_arm(uniform_, u_arm)
                             : sample_arm(learner_.distribution(), u_arm);
  }

  void do_feed(int arm, double observed) override {
    learner_.update(estimate_gain(observed, arm, mixed_));
  }

 private:
  double gamma_;
  OgdLearner learner_;
  ProbabilityVector uniform_;
  ProbabilityVector mixed_;
  bool horizon_below_square_;
};

}  // namespace qsched
