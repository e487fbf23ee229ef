#pragma once

#include "qsched/rng.hpp"
#include "qsched/simplex.hpp"

#include <memory>
#include <stdexcept>
#include <string>

namespace qsched {

// Bandit-feedback protocol shared by every policy: select and feed strictly
// alternate, feed only accepts the arm select returned, and observed gains
// must lie in [0,1]. Every select consumes exactly two uniform draws
// (branch draw, arm draw) so swapping policies keeps streams aligned.
class Policy {
 public:
  virtual ~Policy() = default;

  int select(RngStream& rng) {
    const double u_branch = rng.next_double();
    const double u_arm = rng.next_double();
    return select_with(u_branch, u_arm);
  }

  // Deterministic variant with explicit uniforms; used by tests and by
  // select(rng) above.
  int select_with(double u_branch, double u_arm) {
    if (awaiting_feed_) throw std::logic_error(name() + ": select called twice without feed");
    last_arm_ = do_select(u_branch, u_arm);
    awaiting_feed_ = true;
    return last_arm_;
  }

  void feed(int arm, double observed) {
    if (!awaiting_feed_) throw std::logic_error(name() + ": feed called before select");
    if (arm != last_arm_) throw std::logic_error(name() + ": feed arm does not match selected arm");
    if (!(observed >= 0.0 && observed <= 1.0))
      throw std::invalid_argument(name() + ": observed gain outside [0,1]");
    do_feed(arm, observed);
    awaiting_feed_ = false;
  }

  virtual std::string name() const = 0;

  // Distribution the last select was drawn from, when the policy keeps one.
  virtual const ProbabilityVector* play_distribution() const { return nullptr; }

 protected:
  virtual int do_select(double u_branch, double u_arm) = 0;
  virtual void do_feed(int arm, double observed) = 0;

 private:
  bool awaiting_feed_ = false;
  int last_arm_ = -1;
};

class FixedArmPolicy final : public Policy {
 public:
  FixedArmPolicy(int n_arms, int arm) : arm_(arm), dist_(ProbabilityVector::unit(n_arms, arm)) {}

  std::string name() const override { return "fixed:" + std::to_string(arm_); }
  const ProbabilityVector* play_distribution() const override { return &dist_; }

 protected:
  int do_select(double, double) override { return arm_; }
  void do_feed(int, double) override {}

 private:
  int arm_;
  ProbabilityVector dist_;
};

class UniformPolicy final : public Policy {
 public:
  explicit UniformPolicy(int n_arms) : dist_(ProbabilityVector::uniform(n_arms)) {}

  std::string name() const override { return "uniform"; }
  const ProbabilityVector* play_distribution() const override { return &dist_; }

 protected:
  int do_select(double, double u_arm) override { return sample_arm(dist_, u_arm); }
  void do_feed(int, double) override {}

 private:
  ProbabilityVector dist_;
};

class RoundRobinPolicy final : public Policy {
 public:
  explicit RoundRobinPolicy(int n_arms) : n_arms_(n_arms) {
    if (n_arms < 1) throw std::invalid_argument("RoundRobinPolicy: n_arms must be positive");
  }

  std::string name() const override { return "round_robin"; }

 protected:
  int do_select(double, double) override { return static_cast<int>(round_ % n_arms_); }
  void do_feed(int, double) override { ++round_; }

 private:
  int n_arms_;
  long round_ = 0;
};

// Accepts "wamab", "exp3", "fixed:<i>", "uniform", "round_robin".
void validate_policy_id(const std::string& id, int n_arms);
std::unique_ptr<Policy> make_policy(const std::string& id, int n_arms, long horizon);

}  // namespace qsched
