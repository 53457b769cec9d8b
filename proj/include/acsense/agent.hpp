#pragma once

// Online actor-critic over belief states.

#include <acsense/belief.hpp>
#include <acsense/episode.hpp>
#include <acsense/mlp.hpp>
#include <acsense/reward.hpp>

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace acsense {

struct NetworkConfig {
  std::vector<std::size_t> hidden{64, 32};
  double actor_lr = 0.001;
  double critic_lr = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;

  void validate() const {
    for (auto h : hidden) {
      if (h == 0) throw InvalidArgument("hidden layer widths must be positive");
    }
    if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) {
      throw InvalidArgument("learning rates must be positive");
    }
  }
};

struct TrainConfig {
  ProblemConfig problem{};
  NetworkConfig network{};
  std::size_t episodes = 5000;
  std::uint64_t seed = 1;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;

  void validate() const {
    problem.validate();
    network.validate();
  }
};

struct ActorCritic {
  MlpParams actor;
  MlpParams critic;
  AdamState actor_adam;
  AdamState critic_adam;

  // Fresh networks: belief (2^N) -> hidden... -> 2^N logits, and -> 1 value.
  static ActorCritic create(unsigned n_processes, const NetworkConfig& net, Rng& rng) {
    net.validate();
    const std::size_t m = state_count(n_processes);
    std::vector<std::size_t> actor_dims{m};
    actor_dims.insert(actor_dims.end(), net.hidden.begin(), net.hidden.end());
    std::vector<std::size_t> critic_dims = actor_dims;
    actor_dims.push_back(m);
    critic_dims.push_back(1);

    ActorCritic ac;
    ac.actor = init_mlp(actor_dims, rng);
    ac.critic = init_mlp(critic_dims, rng);
    ac.actor_adam = AdamState(ac.actor, net.actor_lr, net.beta1, net.beta2, net.epsilon);
    ac.critic_adam = AdamState(ac.critic, net.critic_lr, net.beta1, net.beta2, net.epsilon);
    return ac;
  }

  friend bool operator==(const ActorCritic&, const ActorCritic&) = default;
};

inline ProbeMask sample_action(const PolicyDistribution& dist, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng);
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t a = 0; a < dist.probs.size(); ++a) {
    if (dist.probs[a] <= 0.0) continue;
    cumulative += dist.probs[a];
    last_positive = a;
    if (u < cumulative) return static_cast<ProbeMask>(a);
  }
  return static_cast<ProbeMask>(last_positive);
}

enum class ActionMode { stochastic, argmax };

// Evaluation-time action. Argmax ties go to the lowest mask.
inline ProbeMask act_greedy(const ActorCritic& nets, const BeliefVector& belief, Rng& rng,
                            ActionMode mode = ActionMode::stochastic) {
  const auto dist = actor_forward(belief, nets.actor);
  if (mode == ActionMode::stochastic) return sample_action(dist, rng);
  std::size_t best = 0;
  for (std::size_t a = 1; a < dist.probs.size(); ++a) {
    if (dist.probs[a] > dist.probs[best]) best = a;
  }
  return static_cast<ProbeMask>(best);
}

inline ActionSelector policy_selector(const ActorCritic& nets,
                                      ActionMode mode = ActionMode::stochastic) {
  return [&nets, mode](const BeliefVector& belief, Rng& rng) {
    return act_greedy(nets, belief, rng, mode);
  };
}

// One episode with an actor and a critic update after every step.
inline EpisodeRecord run_training_episode(ActorCritic& nets, const Problem& problem, Rng& rng) {
  const double gamma = problem.config().reward.gamma;
  auto select = [&nets](const BeliefVector& belief, Rng& r) {
    return sample_action(actor_forward(belief, nets.actor), r);
  };
  auto update = [&](const StepContext& step) {
    const double v_prev = critic_forward(step.belief_prev, nets.critic);
    const double v_next = step.stopped ? 0.0 : critic_forward(step.belief_now, nets.critic);
    const double delta = td_error(step.reward, v_next, v_prev, gamma, step.stopped);
    const auto grad_log = actor_grad_log_prob(step.belief_prev, step.action, nets.actor);
    actor_step(nets.actor, nets.actor_adam, delta, grad_log);
    critic_step(nets.critic, nets.critic_adam, delta, step.belief_prev);
  };
  return run_episode(problem, select, rng, update);
}

struct TrainingCurveRow {
  std::size_t episode = 0;
  std::size_t t_stop = 0;
  std::size_t total_probes = 0;
  double total_reward = 0.0;
  bool false_alarm = false;
  bool truncated = false;

  double probes_per_step() const {
    return t_stop == 0 ? 0.0 : static_cast<double>(total_probes) / static_cast<double>(t_stop);
  }
};

struct TrainResult {
  ActorCritic nets;
  std::vector<TrainingCurveRow> curve;
};

// Networks are initialised from cfg.seed; episodes draw from a separate
// stream derived from the same seed.
inline TrainResult train(const TrainConfig& cfg) {
  cfg.validate();
  const Problem problem(cfg.problem);
  Rng init_rng(cfg.seed);
  TrainResult result{ActorCritic::create(cfg.problem.n_processes, cfg.network, init_rng), {}};
  Rng episode_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  result.curve.reserve(cfg.episodes);
  for (std::size_t e = 0; e < cfg.episodes; ++e) {
    const auto rec = run_training_episode(result.nets, problem, episode_rng);
    result.curve.push_back({e + 1, rec.t_stop, rec.total_probes(), rec.total_reward(),
                            is_false_alarm(rec, cfg.problem.n_thres), rec.truncated});
  }
  return result;
}

// Mean probes per step over the last `window` curve rows.
inline double tail_probes_per_step(const std::vector<TrainingCurveRow>& curve,
                                   std::size_t window) {
  if (curve.empty()) return 0.0;
  const std::size_t begin = curve.size() > window ? curve.size() - window : 0;
  double sum = 0.0;
  for (std::size_t i = begin; i < curve.size(); ++i) sum += curve[i].probes_per_step();
  return sum / static_cast<double>(curve.size() - begin);
}

}  // namespace acsense
