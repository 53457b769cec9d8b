#pragma once

// Exact forward filtering over joint states and the belief-threshold
// stopping rule.

#include <acsense/errors.hpp>
#include <acsense/process_model.hpp>

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace acsense {

class BeliefVector {
 public:
  // Throws InvalidArgument unless probs has 2^N entries in [0,1] summing to
  // 1 within 1e-9.
  BeliefVector(unsigned n_processes, std::vector<double> probs)
      : n_processes_(n_processes), probs_(std::move(probs)) {
    if (probs_.size() != state_count(n_processes_)) {
      throw InvalidArgument("belief has " + std::to_string(probs_.size()) +
                            " entries, expected " +
                            std::to_string(state_count(n_processes_)));
    }
    double sum = 0.0;
    for (double v : probs_) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InvalidArgument("belief entry outside [0,1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw InvalidArgument("belief sums to " + std::to_string(sum));
    }
  }

  // Point mass on one joint state.
  static BeliefVector certain(StateIndex state) {
    std::vector<double> probs(state_count(state.n_processes()), 0.0);
    probs[state.value()] = 1.0;
    return BeliefVector(state.n_processes(), std::move(probs));
  }

  static BeliefVector uniform(unsigned n_processes) {
    const std::size_t m = state_count(n_processes);
    return BeliefVector(n_processes,
                        std::vector<double>(m, 1.0 / static_cast<double>(m)));
  }

  unsigned n_processes() const noexcept { return n_processes_; }
  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

 private:
  unsigned n_processes_;
  std::vector<double> probs_;
};

// eta[i] = P(observed bits | joint state i).
struct LikelihoodVector {
  std::vector<double> values;
};

inline LikelihoodVector likelihood_vector(const Observation& obs,
                                          const ChannelParams& channel,
                                          unsigned n_processes) {
  obs.validate(n_processes);
  const std::size_t m = state_count(n_processes);
  const double p = channel.flip_prob();
  LikelihoodVector eta{std::vector<double>(m, 1.0)};
  for (std::size_t a = 0; a < obs.probed.size(); ++a) {
    const unsigned k = obs.probed[a];
    const bool reading = obs.bits[a] != 0;
    for (std::uint32_t i = 0; i < m; ++i) {
      eta.values[i] *= (process_bit(i, n_processes, k) == reading) ? 1.0 - p : p;
    }
  }
  return eta;
}

namespace detail {

// predicted[j] = sum_i prev[i] * P[i][j]
inline std::vector<double> predict(const BeliefVector& prev,
                                   const TransitionMatrix& P) {
  if (P.size() != prev.size()) {
    throw InvalidArgument("belief and transition matrix dimensions differ");
  }
  std::vector<double> predicted(prev.size(), 0.0);
  for (std::size_t i = 0; i < prev.size(); ++i) {
    const double w = prev[i];
    if (w == 0.0) continue;
    for (const auto& e : P.row(i)) predicted[e.column] += w * e.prob;
  }
  return predicted;
}

inline BeliefVector normalize(unsigned n_processes, std::vector<double> mass) {
  const double denom = std::accumulate(mass.begin(), mass.end(), 0.0);
  if (!(denom > 0.0)) {
    throw DegenerateEvidence(
        "observation has zero probability under the predicted belief");
  }
  double check = 0.0;
  for (double& v : mass) {
    v /= denom;
    check += v;
  }
  if (std::abs(check - 1.0) > 1e-6) {
    throw InternalConsistency("posterior lost unit mass: sum = " +
                              std::to_string(check));
  }
  return BeliefVector(n_processes, std::move(mass));
}

}  // namespace detail

// pi[t]_i = (pi[t-1]^T P_i) eta_i / (pi[t-1]^T P eta)
inline BeliefVector update_posterior(const BeliefVector& prev,
                                     const TransitionMatrix& P,
                                     const LikelihoodVector& eta) {
  if (eta.values.size() != prev.size()) {
    throw InvalidArgument("likelihood and belief dimensions differ");
  }
  auto mass = detail::predict(prev, P);
  for (std::size_t i = 0; i < mass.size(); ++i) mass[i] *= eta.values[i];
  return detail::normalize(prev.n_processes(), std::move(mass));
}

// Time update only; the step carries no probe.
inline BeliefVector predict_only(const BeliefVector& prev,
                                 const TransitionMatrix& P) {
  return detail::normalize(prev.n_processes(), detail::predict(prev, P));
}

struct EventBelief {
  double value = 0.0;
  unsigned threshold_count = 1;
};

inline EventBelief event_belief(const BeliefVector& belief, unsigned n_thres) {
  if (n_thres < 1 || n_thres > belief.n_processes()) {
    throw InvalidArgument("anomaly threshold must be in [1, N], got " +
                          std::to_string(n_thres));
  }
  double mass = 0.0;
  for (std::uint32_t i = 0; i < belief.size(); ++i) {
    if (anomaly_count(i) >= n_thres) mass += belief[i];
  }
  return {std::min(mass, 1.0), n_thres};
}

struct StoppingConfig {
  double pi_upper = 0.9;
  std::size_t max_horizon = 500;

  friend bool operator==(const StoppingConfig&, const StoppingConfig&) = default;

  void validate() const {
    if (!(pi_upper > 0.0 && pi_upper < 1.0)) {
      throw InvalidArgument("pi_upper must be in (0,1), got " +
                            std::to_string(pi_upper));
    }
    if (max_horizon < 1) throw InvalidArgument("max_horizon must be >= 1");
  }
};

// Strict: a belief equal to pi_upper keeps sensing.
inline bool should_stop(const EventBelief& eb, const StoppingConfig& cfg) {
  return eb.value > cfg.pi_upper;
}

}  // namespace acsense
