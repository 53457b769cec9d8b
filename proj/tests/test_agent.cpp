#include <acsense/agent.hpp>
#include <acsense/episode.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace acsense;

namespace {

ProblemConfig small_problem() {
  ProblemConfig cfg;
  cfg.n_processes = 3;
  cfg.n_thres = 2;
  cfg.stopping.max_horizon = 200;
  return cfg;
}

NetworkConfig small_net() {
  NetworkConfig net;
  net.hidden = {8, 4};
  return net;
}

}  // namespace

TEST(SampleAction, OneHotIsDeterministic) {
  Rng rng(1);
  PolicyDistribution dist{{0, 0, 0, 0, 0, 1, 0, 0}};
  for (int i = 0; i < 1000; ++i) {
    const auto mask = sample_action(dist, rng);
    ASSERT_EQ(mask, 5u);
    ASSERT_EQ(probes_from_mask(mask, 3), (std::vector<unsigned>{1, 3}));
  }
}

TEST(SampleAction, UniformFrequencies) {
  Rng rng(2);
  PolicyDistribution dist{{0.25, 0.25, 0.25, 0.25}};
  std::vector<int> counts(4, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[sample_action(dist, rng)];
  for (int c : counts) EXPECT_NEAR(c / double(draws), 0.25, 0.02);
}

TEST(ActGreedy, ArgmaxTiesGoToLowestMask) {
  Rng rng(3);
  auto nets = ActorCritic::create(2, small_net(), rng);
  for (auto& l : nets.actor.layers) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
    std::fill(l.biases.begin(), l.biases.end(), 0.0);
  }
  nets.actor.layers.back().biases = {0.0, 2.0, 2.0, 1.0};
  EXPECT_EQ(act_greedy(nets, BeliefVector::uniform(2), rng, ActionMode::argmax), 1u);
  nets.actor.layers.back().biases = {3.0, 3.0, 3.0, 3.0};
  EXPECT_EQ(act_greedy(nets, BeliefVector::uniform(2), rng, ActionMode::argmax), 0u);
}

TEST(ActGreedy, StochasticModeReproducibleFromSeed) {
  Rng init(4);
  const auto nets = ActorCritic::create(3, small_net(), init);
  Rng a(9), b(9);
  const auto belief = BeliefVector::uniform(3);
  for (int i = 0; i < 200; ++i) ASSERT_EQ(act_greedy(nets, belief, a), act_greedy(nets, belief, b));
}

// One process changes per step, so from all-normal the all-anomalous state
// first carries mass at t = N.
TEST(RunEpisode, TinyThresholdStopsOnceEventIsReachable) {
  for (unsigned n = 1; n <= 4; ++n) {
    ProblemConfig cfg;
    cfg.n_processes = n;
    cfg.n_thres = n;
    cfg.stopping.pi_upper = 1e-6;
    const Problem problem(cfg);
    Rng rng(5);
    for (ProbeMask mask : {ProbeMask{0}, static_cast<ProbeMask>((1u << n) - 1)}) {
      const auto rec = run_episode(problem, [mask](const BeliefVector&, Rng&) { return mask; }, rng);
      EXPECT_EQ(rec.t_stop, n);
      EXPECT_FALSE(rec.truncated);
    }
  }
}

TEST(RunEpisode, FrozenStateTruncatesAtHorizon) {
  ProblemConfig cfg = small_problem();
  cfg.change_prob = 0.0;
  cfg.n_thres = 1;
  cfg.stopping = {0.5, 60};
  const Problem problem(cfg);
  Rng rng(6);
  const auto rec = run_episode(problem, [](const BeliefVector&, Rng&) { return ProbeMask{7}; }, rng);
  EXPECT_TRUE(rec.truncated);
  EXPECT_EQ(rec.t_stop, 60u);
  EXPECT_FALSE(rec.t_change.has_value());
  for (double eb : rec.event_beliefs) EXPECT_LE(eb, 0.5);
  EXPECT_FALSE(is_false_alarm(rec, 1));
}

TEST(RunEpisode, DeterministicForSeed) {
  const Problem problem(small_problem());
  Rng init(7);
  const auto nets = ActorCritic::create(3, small_net(), init);
  Rng a(100), b(100);
  const auto ra = run_episode(problem, policy_selector(nets), a);
  const auto rb = run_episode(problem, policy_selector(nets), b);
  EXPECT_EQ(ra, rb);
}

TEST(RunEpisode, TelescopingRewardAndFirstPassage) {
  Rng init(8);
  const auto nets = ActorCritic::create(3, small_net(), init);
  for (double lambda : {0.0, 0.03, 0.5}) {
    ProblemConfig cfg = small_problem();
    cfg.reward.lambda = lambda;
    const Problem problem(cfg);
    Rng rng(9);
    for (int e = 0; e < 300; ++e) {
      const auto rec = run_episode(problem, policy_selector(nets), rng);
      const double eps = cfg.reward.belief_clamp_eps;
      const double lhs = rec.total_reward() + lambda * static_cast<double>(rec.total_probes());
      const double rhs = log_likelihood(rec.event_beliefs.back(), eps) -
                         log_likelihood(rec.initial_event_belief, eps);
      ASSERT_NEAR(lhs, rhs, 1e-9);
      if (rec.truncated) continue;
      ASSERT_GT(rec.event_beliefs.back(), cfg.stopping.pi_upper);
      for (std::size_t t = 0; t + 1 < rec.event_beliefs.size(); ++t) {
        ASSERT_LE(rec.event_beliefs[t], cfg.stopping.pi_upper);
      }
    }
  }
}

TEST(RunEpisode, ChangeTimeMatchesFinalState) {
  const Problem problem(small_problem());
  Rng rng(10);
  for (int e = 0; e < 300; ++e) {
    const auto rec = run_episode(problem, [](const BeliefVector&, Rng&) { return ProbeMask{7}; }, rng);
    if (anomaly_count(rec.final_state) >= 2) {
      ASSERT_TRUE(rec.t_change.has_value());
      ASSERT_LE(*rec.t_change, rec.t_stop);
    } else {
      ASSERT_FALSE(rec.t_change.has_value());
      if (!rec.truncated) {
        ASSERT_TRUE(is_false_alarm(rec, 2));
      }
    }
  }
}

TEST(RunEpisode, RejectsOutOfRangeAction) {
  const Problem problem(small_problem());
  Rng rng(11);
  EXPECT_THROW(run_episode(problem, [](const BeliefVector&, Rng&) { return ProbeMask{8}; }, rng),
               InvalidArgument);
}

TEST(Train, ZeroEpisodesReturnsInitialNetworks) {
  TrainConfig cfg;
  cfg.problem = small_problem();
  cfg.network = small_net();
  cfg.episodes = 0;
  cfg.seed = 12;
  const auto result = train(cfg);
  Rng init(12);
  EXPECT_EQ(result.nets, ActorCritic::create(3, small_net(), init));
  EXPECT_TRUE(result.curve.empty());
}

TEST(Train, DeterministicAndUpdatesParameters) {
  TrainConfig cfg;
  cfg.problem = small_problem();
  cfg.network = small_net();
  cfg.episodes = 20;
  cfg.seed = 13;
  const auto a = train(cfg);
  const auto b = train(cfg);
  EXPECT_EQ(a.nets, b.nets);
  ASSERT_EQ(a.curve.size(), 20u);
  Rng init(13);
  const auto fresh = ActorCritic::create(3, small_net(), init);
  EXPECT_NE(a.nets.actor, fresh.actor);
  EXPECT_NE(a.nets.critic, fresh.critic);
  std::size_t steps = 0;
  for (const auto& row : a.curve) steps += row.t_stop;
  EXPECT_EQ(a.nets.actor_adam.step_count, steps);
  EXPECT_EQ(a.nets.critic_adam.step_count, steps);
}

TEST(Train, CurveRowsDescribeEpisodes) {
  TrainConfig cfg;
  cfg.problem = small_problem();
  cfg.network = small_net();
  cfg.episodes = 10;
  const auto result = train(cfg);
  for (std::size_t i = 0; i < result.curve.size(); ++i) {
    const auto& row = result.curve[i];
    EXPECT_EQ(row.episode, i + 1);
    EXPECT_GE(row.t_stop, 1u);
    EXPECT_LE(row.total_probes, 3 * row.t_stop);
    EXPECT_TRUE(std::isfinite(row.total_reward));
  }
}

TEST(TailProbesPerStep, AveragesLastWindow) {
  std::vector<TrainingCurveRow> curve{{1, 2, 2}, {2, 4, 4}, {3, 5, 10}};
  EXPECT_DOUBLE_EQ(tail_probes_per_step(curve, 2), 1.5);
  EXPECT_DOUBLE_EQ(tail_probes_per_step(curve, 10), (1.0 + 1.0 + 2.0) / 3.0);
  EXPECT_DOUBLE_EQ(tail_probes_per_step({}, 5), 0.0);
}

TEST(NetworkConfig, Validation) {
  NetworkConfig net;
  EXPECT_NO_THROW(net.validate());
  net.hidden = {16, 0};
  EXPECT_THROW(net.validate(), InvalidArgument);
  net = {};
  net.actor_lr = 0.0;
  EXPECT_THROW(net.validate(), InvalidArgument);
}
