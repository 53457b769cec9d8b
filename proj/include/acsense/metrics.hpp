#pragma once

// Evaluation metrics and reproducible multi-episode evaluation.

#include <acsense/episode.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <string_view>
#include <thread>
#include <vector>

namespace acsense {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632be59bd9b4e019ull));
}

// FNV-1a; stable across platforms and runs.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view key) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return derive_seed(master, h);
}

// Absent metrics (no qualifying episodes) are nullopt, never 0.
struct MetricsSummary {
  std::size_t episodes = 0;
  std::size_t stopped_episodes = 0;
  std::size_t false_alarms = 0;
  std::size_t truncated_episodes = 0;
  std::size_t delay_episodes = 0;
  std::optional<double> false_alarm_rate;
  std::optional<double> mean_delay;
  std::optional<double> mean_sensing_cost;
  std::optional<double> mean_anomalies_at_stop;
  std::optional<double> probes_per_unit_time;
  double truncation_rate = 0.0;

  friend bool operator==(const MetricsSummary&, const MetricsSummary&) = default;
};

// Delay uses stopped episodes whose change happened no later than the stop.
// Cost, anomaly count, and probe rate use every stopped episode.
inline MetricsSummary summarize(const std::vector<EpisodeRecord>& records, unsigned n_thres) {
  MetricsSummary s;
  s.episodes = records.size();
  double delay_sum = 0.0, cost_sum = 0.0, count_sum = 0.0, rate_sum = 0.0;
  for (const auto& rec : records) {
    if (rec.truncated) {
      ++s.truncated_episodes;
      continue;
    }
    ++s.stopped_episodes;
    if (anomaly_count(rec.final_state) < n_thres) ++s.false_alarms;
    if (rec.t_change && *rec.t_change <= rec.t_stop) {
      ++s.delay_episodes;
      delay_sum += static_cast<double>(rec.t_stop - *rec.t_change);
    }
    const auto probes = static_cast<double>(rec.total_probes());
    cost_sum += probes;
    count_sum += static_cast<double>(anomaly_count(rec.final_state));
    rate_sum += probes / static_cast<double>(rec.t_stop);
  }
  if (s.episodes > 0) {
    s.truncation_rate =
        static_cast<double>(s.truncated_episodes) / static_cast<double>(s.episodes);
  }
  if (s.stopped_episodes > 0) {
    const auto n = static_cast<double>(s.stopped_episodes);
    s.false_alarm_rate = static_cast<double>(s.false_alarms) / n;
    s.mean_sensing_cost = cost_sum / n;
    s.mean_anomalies_at_stop = count_sum / n;
    s.probes_per_unit_time = rate_sum / n;
  }
  if (s.delay_episodes > 0) {
    s.mean_delay = delay_sum / static_cast<double>(s.delay_episodes);
  }
  return s;
}

// Episode i draws from its own stream derive_seed(seed, i), so the records
// do not depend on the thread count. `select` must be safe to call
// concurrently.
inline std::vector<EpisodeRecord> evaluate_records(const Problem& problem,
                                                   const ActionSelector& select,
                                                   std::size_t episodes, std::uint64_t seed,
                                                   unsigned threads = 1) {
  if (episodes < 1) throw InvalidArgument("evaluation needs at least one episode");
  std::vector<EpisodeRecord> records(episodes);
  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
      records[i] = run_episode(problem, select, rng);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(episodes)));
  if (threads == 1) {
    run_range(0, episodes);
    return records;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (episodes + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(episodes, begin + chunk);
    pool.emplace_back([&, w, begin, end] {
      try {
        run_range(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return records;
}

inline MetricsSummary evaluate(const Problem& problem, const ActionSelector& select,
                               std::size_t episodes, std::uint64_t seed,
                               unsigned threads = 1) {
  return summarize(evaluate_records(problem, select, episodes, seed, threads),
                   problem.config().n_thres);
}

}  // namespace acsense
