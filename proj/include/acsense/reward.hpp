#pragma once

#include <acsense/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>

namespace acsense {

struct RewardConfig {
  double lambda = 0.0;              // cost per probed process
  double gamma = 0.9;               // discount
  double belief_clamp_eps = 1e-9;   // keeps the log-odds finite at 0 and 1

  friend bool operator==(const RewardConfig&, const RewardConfig&) = default;

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      throw InvalidArgument("lambda must be a finite non-negative number");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) {
      throw InvalidArgument("gamma must be in (0,1), got " + std::to_string(gamma));
    }
    if (!(belief_clamp_eps > 0.0 && belief_clamp_eps < 1e-3)) {
      throw InvalidArgument("belief_clamp_eps must be in (0, 1e-3)");
    }
  }
};

struct StepOutcome {
  double reward = 0.0;
  double event_belief_before = 0.0;
  double event_belief_after = 0.0;
  std::size_t probes_used = 0;
};

// Log-odds of x after clamping into [eps, 1-eps].
inline double log_likelihood(double x, double eps) {
  const double c = std::clamp(x, eps, 1.0 - eps);
  return std::log(c / (1.0 - c));
}

inline double instantaneous_reward(double eb_now, double eb_prev,
                                   std::size_t probes, const RewardConfig& cfg) {
  return log_likelihood(eb_now, cfg.belief_clamp_eps) -
         log_likelihood(eb_prev, cfg.belief_clamp_eps) -
         cfg.lambda * static_cast<double>(probes);
}

inline double discounted_return(std::span<const double> rewards, double gamma) {
  if (rewards.empty()) throw InvalidArgument("discounted_return of an empty sequence");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw InvalidArgument("gamma must be in (0,1)");
  }
  // Horner from the tail.
  double total = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) total = rewards[i] + gamma * total;
  return total;
}

// Temporal-difference residual. A terminal step bootstraps from zero.
inline double td_error(double reward, double v_next, double v_prev, double gamma,
                       bool terminal = false) {
  return reward + (terminal ? 0.0 : gamma * v_next) - v_prev;
}

}  // namespace acsense
