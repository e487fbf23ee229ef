#pragma once

#include "qsched/policy.hpp"

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

namespace qsched {

// Multiplicative-weights baseline with importance-weighted gain updates.
// The play distribution is softmax(log_weights), optionally mixed with the
// uniform distribution at rate `mix`.
class Exp3Policy final : public Policy {
 public:
  Exp3Policy(int n_arms, double eta, double mix = 0.0)
      : log_weights_(Eigen::VectorXd::Zero(n_arms)),
        eta_(eta),
        mix_(mix),
        dist_(ProbabilityVector::uniform(n_arms)) {
    if (n_arms < 1) throw std::invalid_argument("Exp3Policy: n_arms must be positive");
    if (!(eta >= 0.0)) throw std::invalid_argument("Exp3Policy: eta must be nonnegative");
    if (!(mix >= 0.0 && mix < 1.0)) throw std::invalid_argument("Exp3Policy: mix outside [0,1)");
  }

  // Full-horizon tuning for gains in [0,1]: sqrt(2 ln N / (N T)).
  static double default_eta(int n_arms, long horizon) {
    if (n_arms < 1) throw std::invalid_argument("Exp3Policy::default_eta: n_arms must be positive");
    if (horizon < 1) throw std::invalid_argument("Exp3Policy::default_eta: horizon must be positive");
    return std::sqrt(2.0 * std::log(static_cast<double>(n_arms)) /
                     (static_cast<double>(n_arms) * static_cast<double>(horizon)));
  }

  ProbabilityVector distribution() const {
    const Eigen::ArrayXd shifted = (log_weights_.array() - log_weights_.maxCoeff()).exp();
    const int n = static_cast<int>(log_weights_.size());
    return ProbabilityVector(((1.0 - mix_) * shifted / shifted.sum() + mix_ / n).matrix());
  }

  const Eigen::VectorXd& log_weights() const { return log_weights_; }
  double eta() const { return eta_; }
  double mix() const { return mix_; }

  std::string name() const override { return "exp3"; }
  const ProbabilityVector* play_distribution() const override { return &dist_; }

 protected:
  int do_select(double, double u_arm) override {
    dist_ = distribution();
    return sample_arm(dist_, u_arm);
  }

  // dist_ still holds the law the arm was drawn from.
  void do_feed(int arm, double observed) override {
    log_weights_(arm) += eta_ * observed / dist_[arm];
  }

 private:
  Eigen::VectorXd log_weights_;
  double eta_;
  double mix_;
  ProbabilityVector dist_;
};

}  // namespace qsched
