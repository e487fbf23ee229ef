#include "qsched/policy.hpp"

#include "qsched/exp3.hpp"
#include "qsched/wamab.hpp"

#include <charconv>
#include <optional>
#include <string_view>

namespace qsched {

namespace {

std::optional<int> parse_fixed_arm(const std::string& id) {
  constexpr std::string_view prefix = "fixed:";
  if (id.size() <= prefix.size() || std::string_view(id).substr(0, prefix.size()) != prefix)
    return std::nullopt;
  const char* begin = id.data() + prefix.size();
  const char* end = id.data() + id.size();
  int arm = 0;
  const auto [ptr, ec] = std::from_chars(begin, end, arm);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return arm;
}

}  // namespace

void validate_policy_id(const std::string& id, int n_arms) {
  if (id == "wamab" || id == "exp3" || id == "uniform" || id == "round_robin") return;
  if (const std::optional<int> arm = parse_fixed_arm(id)) {
    if (*arm >= 0 && *arm < n_arms) return;
    throw std::invalid_argument("policy '" + id + "': arm outside [0," +
                                std::to_string(n_arms - 1) + "]");
  }
  throw std::invalid_argument("unknown policy identifier '" + id + "'");
}

std::unique_ptr<Policy> make_policy(const std::string& id, int n_arms, long horizon) {
  validate_policy_id(id, n_arms);
  if (id == "wamab") return std::make_unique<WamabPolicy>(n_arms, horizon);
  if (id == "exp3")
    return std::make_unique<Exp3Policy>(n_arms, Exp3Policy::default_eta(n_arms, horizon));
  if (id == "uniform") return std::make_unique<UniformPolicy>(n_arms);
  if (id == "round_robin") return std::make_unique<RoundRobinPolicy>(n_arms);
  return std::make_unique<FixedArmPolicy>(n_arms, *parse_fixed_arm(id));
}

}  // namespace qsched
