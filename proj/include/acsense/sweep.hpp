#pragma once

// Parameter sweeps over pi_upper x lambda (learned policy) and
// pi_upper x n (ranking baseline).

#include <acsense/agent.hpp>
#include <acsense/checkpoint.hpp>
#include <acsense/metrics.hpp>
#include <acsense/metrics_io.hpp>
#include <acsense/ranking.hpp>

#include <cstdint>
#include <exception>
#include <functional>
#include <string>
#include <vector>

namespace acsense {

struct SweepSpec {
  std::vector<double> pi_upper_grid{0.9};
  std::vector<double> lambda_grid;
  std::vector<unsigned> n_grid;
  std::size_t episodes_per_cell = 2000;
  std::uint64_t seed = 1;

  void validate() const {
    if (pi_upper_grid.empty()) throw InvalidArgument("pi_upper grid is empty");
    if (lambda_grid.empty() && n_grid.empty()) {
      throw InvalidArgument("sweep needs a lambda grid or an n grid");
    }
    if (episodes_per_cell < 1) throw InvalidArgument("episodes_per_cell must be >= 1");
  }
};

struct SweepCell {
  std::string policy;
  double pi_upper = 0.0;
  std::optional<double> lambda;
  std::optional<unsigned> n_probe;

  // Stable identity used for per-cell seeding.
  std::string key() const {
    std::string k = policy + "|pi=" + detail::format_double(pi_upper);
    if (lambda) k += "|lambda=" + detail::format_double(*lambda);
    if (n_probe) k += "|n=" + std::to_string(*n_probe);
    return k;
  }
};

inline std::vector<SweepCell> sweep_cells(const SweepSpec& spec) {
  std::vector<SweepCell> cells;
  for (double lambda : spec.lambda_grid) {
    for (double pi : spec.pi_upper_grid) cells.push_back({"learning", pi, lambda, std::nullopt});
  }
  for (unsigned n : spec.n_grid) {
    for (double pi : spec.pi_upper_grid) cells.push_back({"ranking", pi, std::nullopt, n});
  }
  return cells;
}

// Trains (learning cells, base.episodes training episodes) or configures
// (ranking cells), then evaluates. Seeds come from (spec.seed, cell key), so
// a cell's row does not depend on which other cells run or in what order.
inline MetricsRow run_sweep_cell(const SweepCell& cell, const SweepSpec& spec,
                                 const TrainConfig& base, unsigned threads = 1) {
  MetricsRow row;
  row.policy = cell.policy;
  row.pi_upper = cell.pi_upper;
  row.lambda = cell.lambda;
  row.n_probe = cell.n_probe;
  row.seed = derive_seed(spec.seed, cell.key());
  try {
    TrainConfig cfg = base;
    cfg.problem.stopping.pi_upper = cell.pi_upper;
    if (cell.lambda) cfg.problem.reward.lambda = *cell.lambda;
    cfg.seed = derive_seed(row.seed, std::string_view("train"));
    const std::uint64_t eval_seed = derive_seed(row.seed, std::string_view("eval"));
    const Problem problem(cfg.problem);
    if (cell.policy == "learning") {
      const auto trained = train(cfg);
      row.metrics = evaluate(problem, policy_selector(trained.nets), spec.episodes_per_cell,
                             eval_seed, threads);
    } else {
      RankingConfig rc{*cell.n_probe};
      rc.validate(problem.n_processes());
      row.metrics = evaluate(problem, ranking_selector(rc), spec.episodes_per_cell, eval_seed,
                             threads);
    }
  } catch (const std::exception& e) {
    row.status = std::string("error: ") + e.what();
  }
  return row;
}

inline MetricsTable sweep(const SweepSpec& spec, const TrainConfig& base, unsigned threads = 1,
                          const std::function<void(const MetricsRow&)>& on_row = {}) {
  spec.validate();
  MetricsTable table;
  table.preamble.push_back("config " + config_to_json(base).dump());
  table.preamble.push_back("sweep seed " + std::to_string(spec.seed) + " episodes_per_cell " +
                           std::to_string(spec.episodes_per_cell));
  for (const auto& cell : sweep_cells(spec)) {
    table.rows.push_back(run_sweep_cell(cell, spec, base, threads));
    if (on_row) on_row(table.rows.back());
  }
  return table;
}

}  // namespace acsense
