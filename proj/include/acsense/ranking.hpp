#pragma once

// Model-based comparator: probe the n processes most likely to be anomalous.

#include <acsense/belief.hpp>
#include <acsense/episode.hpp>

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace acsense {

struct RankingConfig {
  unsigned n_probe = 1;

  void validate(unsigned n_processes) const {
    if (n_probe < 1 || n_probe > n_processes) {
      throw InvalidArgument("n_probe must be in [1, N], got " + std::to_string(n_probe));
    }
  }
};

// sigma[k-1] = P(process k anomalous | observations).
inline std::vector<double> marginal_anomaly_probs(const BeliefVector& belief) {
  const unsigned n = belief.n_processes();
  std::vector<double> sigma(n, 0.0);
  for (std::uint32_t i = 0; i < belief.size(); ++i) {
    const double w = belief[i];
    if (w == 0.0) continue;
    for (unsigned k = 1; k <= n; ++k) {
      if (process_bit(i, n, k)) sigma[k - 1] += w;
    }
  }
  for (double& s : sigma) s = std::min(s, 1.0);
  return sigma;
}

// 1-based indices of the n largest marginals, ascending; ties favour the
// lower index.
inline std::vector<unsigned> ranking_select(const std::vector<double>& sigma, unsigned n) {
  if (n < 1 || n > sigma.size()) {
    throw InvalidArgument("ranking_select needs 1 <= n <= N");
  }
  std::vector<unsigned> order(sigma.size());
  std::iota(order.begin(), order.end(), 1u);
  std::stable_sort(order.begin(), order.end(),
                   [&](unsigned a, unsigned b) { return sigma[a - 1] > sigma[b - 1]; });
  order.resize(n);
  std::sort(order.begin(), order.end());
  return order;
}

inline ActionSelector ranking_selector(RankingConfig cfg) {
  return [cfg](const BeliefVector& belief, Rng&) {
    const auto chosen = ranking_select(marginal_anomaly_probs(belief), cfg.n_probe);
    return mask_from_probes(chosen);
  };
}

inline EpisodeRecord run_ranking_episode(const Problem& problem, const RankingConfig& cfg,
                                         Rng& rng) {
  cfg.validate(problem.n_processes());
  return run_episode(problem, ranking_selector(cfg), rng);
}

}  // namespace acsense
