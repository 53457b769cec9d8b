#pragma once

// Problem definition and the shared sense-filter-stop loop used by both the
// learned policy and the ranking baseline.

#include <acsense/belief.hpp>
#include <acsense/errors.hpp>
#include <acsense/process_model.hpp>
#include <acsense/reward.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace acsense {

struct ProblemConfig {
  unsigned n_processes = 5;
  unsigned n_thres = 3;
  double flip_prob = 0.2;   // p
  double change_prob = 0.1; // q
  StoppingConfig stopping{};
  RewardConfig reward{};
  // Test hook; episodes start from the all-normal state otherwise.
  std::optional<std::uint32_t> initial_state;

  friend bool operator==(const ProblemConfig&, const ProblemConfig&) = default;

  void validate() const {
    check_process_count(n_processes);
    if (n_thres < 1 || n_thres > n_processes) {
      throw InvalidArgument("n_thres must be in [1, N], got " + std::to_string(n_thres));
    }
    (void)ChannelParams(flip_prob);
    if (!(change_prob >= 0.0 && change_prob < 1.0)) {
      throw InvalidArgument("q must be in [0,1), got " + std::to_string(change_prob));
    }
    stopping.validate();
    reward.validate();
    if (initial_state) (void)StateIndex(*initial_state, n_processes);
  }
};

// Validated config plus the derived transition matrix.
class Problem {
 public:
  explicit Problem(ProblemConfig cfg)
      : cfg_((cfg.validate(), std::move(cfg))),
        transitions_(build_transition_matrix(cfg_.n_processes, cfg_.change_prob)),
        channel_(cfg_.flip_prob) {}

  Problem(ProblemConfig cfg, TransitionMatrix transitions)
      : cfg_((cfg.validate(), std::move(cfg))),
        transitions_(std::move(transitions)),
        channel_(cfg_.flip_prob) {
    if (transitions_.n_processes() != cfg_.n_processes) {
      throw InvalidArgument("transition matrix built for a different N");
    }
  }

  const ProblemConfig& config() const noexcept { return cfg_; }
  const TransitionMatrix& transitions() const noexcept { return transitions_; }
  const ChannelParams& channel() const noexcept { return channel_; }
  unsigned n_processes() const noexcept { return cfg_.n_processes; }
  std::size_t action_count() const noexcept { return state_count(cfg_.n_processes); }

  StateIndex initial_state() const {
    return StateIndex(cfg_.initial_state.value_or(0), cfg_.n_processes);
  }
  // The decision-maker's prior is the all-normal point mass.
  BeliefVector initial_belief() const {
    return BeliefVector::certain(StateIndex(0, cfg_.n_processes));
  }

 private:
  ProblemConfig cfg_;
  TransitionMatrix transitions_;
  ChannelParams channel_;
};

struct EpisodeRecord {
  std::size_t t_stop = 0;
  std::optional<std::size_t> t_change;  // first t with count >= n_thres
  std::vector<std::size_t> probes_per_step;
  std::vector<ProbeMask> actions;
  std::vector<double> rewards;
  std::vector<double> event_beliefs;  // P_E[1..t_stop]
  double initial_event_belief = 0.0;  // P_E[0]
  std::uint32_t final_state = 0;
  bool truncated = false;

  std::size_t total_probes() const {
    std::size_t n = 0;
    for (auto p : probes_per_step) n += p;
    return n;
  }
  double total_reward() const {
    double r = 0.0;
    for (double v : rewards) r += v;
    return r;
  }

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

// Everything a learner needs to update after one time step.
struct StepContext {
  std::size_t t = 0;
  const BeliefVector& belief_prev;
  const BeliefVector& belief_now;
  ProbeMask action = 0;
  double reward = 0.0;
  bool stopped = false;    // stopping rule fired at this step
  bool truncated = false;  // horizon reached without stopping
};

using ActionSelector = std::function<ProbeMask(const BeliefVector&, Rng&)>;
using StepObserver = std::function<void(const StepContext&)>;

// Runs one episode: at each t the state moves first, then the action chosen
// from the previous belief probes the new state.
inline EpisodeRecord run_episode(const Problem& problem, const ActionSelector& select,
                                 Rng& rng, const StepObserver& on_step = {}) {
  const auto& cfg = problem.config();
  const unsigned n = cfg.n_processes;

  EpisodeRecord rec;
  StateIndex state = problem.initial_state();
  BeliefVector belief = problem.initial_belief();
  if (anomaly_count(state) >= cfg.n_thres) rec.t_change = 0;

  double eb_prev = event_belief(belief, cfg.n_thres).value;
  rec.initial_event_belief = eb_prev;

  for (std::size_t t = 1; t <= cfg.stopping.max_horizon; ++t) {
    const ProbeMask action = select(belief, rng);
    if (action >= problem.action_count()) {
      throw InvalidArgument("selected probe mask out of range");
    }
    state = step_state(state, problem.transitions(), rng);
    if (!rec.t_change && anomaly_count(state) >= cfg.n_thres) rec.t_change = t;

    const auto probed = probes_from_mask(action, n);
    const Observation obs = observe(state, probed, problem.channel(), rng, t);
    const auto eta = likelihood_vector(obs, problem.channel(), n);
    BeliefVector next = update_posterior(belief, problem.transitions(), eta);
    const double eb_now = event_belief(next, cfg.n_thres).value;
    const double reward = instantaneous_reward(eb_now, eb_prev, probed.size(), cfg.reward);

    const bool stopped = should_stop({eb_now, cfg.n_thres}, cfg.stopping);
    const bool truncated = !stopped && t == cfg.stopping.max_horizon;

    rec.actions.push_back(action);
    rec.probes_per_step.push_back(probed.size());
    rec.rewards.push_back(reward);
    rec.event_beliefs.push_back(eb_now);
    rec.t_stop = t;

    if (on_step) on_step({t, belief, next, action, reward, stopped, truncated});

    belief = std::move(next);
    eb_prev = eb_now;
    if (stopped) break;
    rec.truncated = truncated;
  }
  rec.final_state = state.value();
  return rec;
}

inline bool is_false_alarm(const EpisodeRecord& rec, unsigned n_thres) {
  return !rec.truncated && anomaly_count(rec.final_state) < n_thres;
}

}  // namespace acsense
