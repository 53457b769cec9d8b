// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any hard criterion fails. Criterion 7 is advisory.

#include <acsense.hpp>

#include "support/oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace acsense;
using acsense::testing::brute_force_posterior;
using acsense::testing::finite_difference;
using acsense::testing::flatten;
using acsense::testing::ProbeStep;
using acsense::testing::random_simplex;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

int hard_failures = 0;

void report(int id, const char* name, const Outcome& o, bool soft = false) {
  const char* verdict = o.pass ? "PASS" : (soft ? "SOFT-FAIL" : "FAIL");
  std::printf("[%s] criterion %d: %s -- %s\n", verdict, id, name, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass && !soft) ++hard_failures;
}

// Reference setting: N=5, N_thres=3, p=0.2, q=0.1.
TrainConfig base_config(double pi_upper, double lambda) {
  TrainConfig cfg;
  cfg.problem.stopping.pi_upper = pi_upper;
  cfg.problem.reward.lambda = lambda;
  cfg.episodes = 5000;
  cfg.seed = 1;
  return cfg;
}

// Trained networks are reused across criteria, keyed by (pi_upper, lambda).
std::map<std::pair<double, double>, TrainResult> trained_cache;

const TrainResult& trained(double pi_upper, double lambda) {
  const auto key = std::make_pair(pi_upper, lambda);
  auto it = trained_cache.find(key);
  if (it == trained_cache.end()) {
    const auto start = Clock::now();
    it = trained_cache.emplace(key, train(base_config(pi_upper, lambda))).first;
    std::printf("  trained pi_upper=%g lambda=%g in %.0f s\n", pi_upper, lambda,
                seconds_since(start));
    std::fflush(stdout);
  }
  return it->second;
}

constexpr std::size_t kEvalEpisodes = 4000;
constexpr std::uint64_t kEvalSeed = 20240601;

Outcome filter_equivalence() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> bit(0, 1);
  double worst = 0.0;
  std::size_t cases = 0;
  for (unsigned n = 1; n <= 3; ++n) {
    const std::uint32_t m = 1u << n;
    for (double p : {0.1, 0.2, 0.4}) {
      for (double q : {0.1, 0.5}) {
        const auto P = build_transition_matrix(n, q);
        const auto dense = P.to_dense();
        for (int trial = 0; trial < 20; ++trial) {
          const bool probe_all = trial % 2 == 0;
          std::vector<double> prior(m, 0.0);
          if (trial < 10) {
            prior[0] = 1.0;
          } else {
            prior = random_simplex(m, rng);
          }
          BeliefVector belief(n, prior);
          std::vector<ProbeStep> steps;
          for (int t = 1; t <= 4; ++t) {
            const ProbeMask mask = probe_all ? m - 1 : static_cast<ProbeMask>(rng() % m);
            const auto probed = probes_from_mask(mask, n);
            std::vector<std::uint8_t> bits;
            for (std::size_t k = 0; k < probed.size(); ++k) bits.push_back(bit(rng));
            steps.push_back({probed, bits});
            const Observation obs{probed, bits, static_cast<std::size_t>(t)};
            belief = update_posterior(belief, P, likelihood_vector(obs, ChannelParams(p), n));
            const auto oracle = brute_force_posterior(n, prior, dense, steps, p);
            for (std::uint32_t i = 0; i < m; ++i) worst = std::max(worst, std::abs(belief[i] - oracle[i]));
            ++cases;
          }
        }
      }
    }
  }
  const double elapsed = seconds_since(start);
  std::ostringstream d;
  d << cases << " cases, max abs error " << worst << ", " << elapsed << " s";
  return {worst <= 1e-10 && elapsed < 10.0, d.str()};
}

Outcome false_alarm_guarantee() {
  bool ok = true;
  std::ostringstream d;
  for (double pi : {0.9, 0.95, 0.99}) {
    const Problem problem(base_config(pi, 0.0).problem);
    const auto& nets = trained(pi, 0.0).nets;
    const auto learned = evaluate(problem, policy_selector(nets), kEvalEpisodes, kEvalSeed);
    const double bound = 1.0 - pi;
    auto check = [&](const char* label, const MetricsSummary& s) {
      const double fa = s.false_alarm_rate.value_or(1.0);
      ok = ok && s.false_alarm_rate && fa < bound;
      d << label << "@" << pi << "=" << fa << (fa < bound ? "" : "(!)") << " ";
    };
    check("learned", learned);
    for (unsigned n : {3u, 5u}) {
      const auto s = evaluate(problem, ranking_selector(RankingConfig{n}), kEvalEpisodes, kEvalSeed);
      check(n == 3 ? "rank3" : "rank5", s);
    }
  }
  return {ok, d.str()};
}

const std::vector<double> kLambdaGrid{0.0, 0.01, 0.02, 0.04, 0.05};

Outcome table_one() {
  std::vector<double> rates;
  std::ostringstream d;
  for (double lambda : kLambdaGrid) {
    rates.push_back(tail_probes_per_step(trained(0.9, lambda).curve, 500));
    d << "lambda=" << lambda << ":" << rates.back() << " ";
  }
  bool monotone = true;
  for (std::size_t i = 1; i < rates.size(); ++i) monotone = monotone && rates[i] <= rates[i - 1];
  const bool low_end = rates.front() >= 3.8 && rates.front() <= 5.0;
  const bool high_end = rates.back() >= 1.0 && rates.back() <= 2.0;
  d << "(non-increasing " << (monotone ? "yes" : "no") << ", lambda=0 in [3.8,5.0] "
    << (low_end ? "yes" : "no") << ", lambda=0.05 in [1.0,2.0] " << (high_end ? "yes" : "no")
    << ")";
  return {monotone && low_end && high_end, d.str()};
}

Outcome ranking_monotone_in_threshold() {
  double prev_delay = -1.0, prev_cost = -1.0;
  bool ok = true;
  std::ostringstream d;
  for (double pi : {0.8, 0.9, 0.95, 0.99}) {
    const Problem problem(base_config(pi, 0.0).problem);
    const auto s = evaluate(problem, ranking_selector(RankingConfig{3}), kEvalEpisodes, kEvalSeed);
    const double delay = s.mean_delay.value_or(NAN), cost = s.mean_sensing_cost.value_or(NAN);
    ok = ok && delay >= prev_delay && cost >= prev_cost;
    prev_delay = delay;
    prev_cost = cost;
    d << "pi=" << pi << " delay " << delay << " cost " << cost << "; ";
  }
  return {ok, d.str()};
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(a) + std::abs(b));
}

Outcome gradient_checks() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  auto random_net = [&](std::vector<std::size_t> dims) {
    auto net = init_mlp(std::move(dims), rng);
    for (auto& l : net.layers) {
      for (double& b : l.biases) b = u(rng);
    }
    return net;
  };
  double worst = 0.0;
  const int nets = 25;
  for (int trial = 0; trial < nets; ++trial) {
    const auto actor = random_net({8, 12, 6, 8});
    const auto critic = random_net({8, 12, 6, 1});
    const BeliefVector b(3, random_simplex(8, rng));
    const std::size_t action = rng() % 8;
    const auto ga = flatten(actor_grad_log_prob(b, action, actor));
    const auto fa = finite_difference(actor, [&](const MlpParams& p) {
      return std::log(actor_forward(b, p).probs[action]);
    });
    const auto gc = flatten(critic_grad_value(b, critic));
    const auto fc = finite_difference(critic, [&](const MlpParams& p) { return critic_forward(b, p); });
    for (std::size_t i = 0; i < ga.size(); ++i) worst = std::max(worst, rel_err(ga[i], fa[i]));
    for (std::size_t i = 0; i < gc.size(); ++i) worst = std::max(worst, rel_err(gc[i], fc[i]));
  }
  std::ostringstream d;
  d << nets << " actor and " << nets << " critic nets, max relative error " << worst;
  return {worst < 1e-4, d.str()};
}

Outcome property_suites() {
  constexpr int trials = 10000;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> bit(0, 1);
  int telescoping = 0, normalized = 0, zero_mean = 0, trapped = 0;

  // Reward identity over whole episodes with random policies and settings.
  for (int trial = 0; trial < trials; ++trial) {
    ProblemConfig cfg;
    cfg.n_processes = 1 + trial % 4;
    cfg.n_thres = 1 + (trial / 4) % cfg.n_processes;
    cfg.flip_prob = 0.05 + 0.4 * unit(rng);
    cfg.change_prob = 0.05 + 0.5 * unit(rng);
    cfg.stopping = {0.5 + 0.49 * unit(rng), 200};
    cfg.reward.lambda = 0.1 * unit(rng);
    const Problem problem(cfg);
    const std::uint32_t m = 1u << cfg.n_processes;
    Rng ep_rng(rng());
    const auto rec = run_episode(problem, [m](const BeliefVector&, Rng& r) {
      return static_cast<ProbeMask>(r() % m);
    }, ep_rng);
    const double eps = cfg.reward.belief_clamp_eps;
    const double lhs = rec.total_reward() + cfg.reward.lambda * static_cast<double>(rec.total_probes());
    const double rhs = log_likelihood(rec.event_beliefs.back(), eps) -
                       log_likelihood(rec.initial_event_belief, eps);
    telescoping += std::abs(lhs - rhs) <= 1e-9;
  }

  // Posterior stays on the simplex.
  for (int trial = 0; trial < trials; ++trial) {
    const unsigned n = 1 + trial % 5;
    const std::uint32_t m = 1u << n;
    const BeliefVector prev(n, random_simplex(m, rng));
    const auto P = build_transition_matrix(n, 0.99 * unit(rng));
    const auto probed = probes_from_mask(static_cast<ProbeMask>(rng() % m), n);
    std::vector<std::uint8_t> bits;
    for (std::size_t k = 0; k < probed.size(); ++k) bits.push_back(bit(rng));
    const auto next = update_posterior(prev, P, likelihood_vector({probed, bits, 1}, ChannelParams(0.45 * unit(rng)), n));
    double sum = 0.0;
    bool nonneg = true;
    for (double v : next.probs()) {
      sum += v;
      nonneg = nonneg && v >= 0.0;
    }
    normalized += nonneg && std::abs(sum - 1.0) <= 1e-9;
  }

  // E_mu[grad log mu] = 0.
  for (int trial = 0; trial < trials; ++trial) {
    auto actor = init_mlp({4, 6, 4}, rng);
    const BeliefVector b(2, random_simplex(4, rng));
    const auto dist = actor_forward(b, actor);
    std::vector<double> expected(actor.parameter_count(), 0.0);
    for (std::size_t a = 0; a < 4; ++a) {
      const auto g = flatten(actor_grad_log_prob(b, a, actor));
      for (std::size_t i = 0; i < g.size(); ++i) expected[i] += dist.probs[a] * g[i];
    }
    double worst = 0.0;
    for (double v : expected) worst = std::max(worst, std::abs(v));
    zero_mean += worst <= 1e-9;
  }

  // Mass on qualifying states never leaves.
  for (int trial = 0; trial < trials; ++trial) {
    const unsigned n = 2 + trial % 3;
    const unsigned n_thres = 1 + trial % n;
    const std::uint32_t m = 1u << n;
    auto w = random_simplex(m, rng);
    double total = 0.0;
    for (std::uint32_t i = 0; i < m; ++i) {
      if (anomaly_count(i) < n_thres) w[i] = 0.0;
      total += w[i];
    }
    for (double& v : w) v /= total;
    const auto P = acsense::testing::random_absorbing_matrix(n, rng);
    const auto probed = probes_from_mask(static_cast<ProbeMask>(rng() % m), n);
    std::vector<std::uint8_t> bits;
    for (std::size_t k = 0; k < probed.size(); ++k) bits.push_back(bit(rng));
    const auto next = update_posterior(BeliefVector(n, w), P,
                                       likelihood_vector({probed, bits, 1}, ChannelParams(0.3), n));
    trapped += std::abs(event_belief(next, n_thres).value - 1.0) <= 1e-12;
  }

  std::ostringstream d;
  d << "telescoping " << telescoping << "/" << trials << ", normalization " << normalized << "/"
    << trials << ", score zero-mean " << zero_mean << "/" << trials << ", absorbing trap "
    << trapped << "/" << trials;
  return {telescoping == trials && normalized == trials && zero_mean == trials && trapped == trials,
          d.str()};
}

Outcome superiority() {
  // The grid policy whose probe rate is nearest 3 stands in for a tuned lambda.
  double best_lambda = kLambdaGrid.front(), best_gap = INFINITY;
  for (double lambda : kLambdaGrid) {
    const double gap = std::abs(tail_probes_per_step(trained(0.9, lambda).curve, 500) - 3.0);
    if (gap < best_gap) {
      best_gap = gap;
      best_lambda = lambda;
    }
  }
  const Problem problem(base_config(0.9, best_lambda).problem);
  const auto learned = evaluate(problem, policy_selector(trained(0.9, best_lambda).nets),
                                kEvalEpisodes, kEvalSeed);
  const auto ranking = evaluate(problem, ranking_selector(RankingConfig{3}), kEvalEpisodes, kEvalSeed);
  const double ld = learned.mean_delay.value_or(INFINITY), rd = ranking.mean_delay.value_or(INFINITY);
  const double lc = learned.mean_sensing_cost.value_or(INFINITY), rc = ranking.mean_sensing_cost.value_or(INFINITY);
  std::ostringstream d;
  d << "lambda=" << best_lambda << " learned delay " << ld << " cost " << lc << " (rate "
    << learned.probes_per_unit_time.value_or(NAN) << "); ranking n=3 delay " << rd << " cost " << rc;
  return {ld <= 1.25 * rd && lc <= 1.1 * rc, d.str()};
}

}  // namespace

int main() {
  const auto start = Clock::now();
  report(1, "forward filter matches path enumeration", filter_equivalence());
  report(5, "actor and critic gradients match finite differences", gradient_checks());
  report(6, "property suites over 1e4 randomized trials", property_suites());
  report(4, "ranking baseline delay and cost non-decreasing in pi_upper", ranking_monotone_in_threshold());
  report(3, "probe rate versus lambda after 5000 training episodes", table_one());
  report(2, "false-alarm rate below 1 - pi_upper", false_alarm_guarantee());
  report(7, "learned policy versus n=3 ranking (advisory)", superiority(), /*soft=*/true);
  std::printf("acceptance finished in %.0f s, %d hard failure(s)\n", seconds_since(start), hard_failures);
  return hard_failures == 0 ? 0 : 1;
}
