#pragma once

// Command-line front end: train, evaluate, baseline, sweep, inspect.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or invalid config.
// Relative output paths are resolved under $ACSENSE_OUTPUT_DIR when set.

#include <acsense/agent.hpp>
#include <acsense/checkpoint.hpp>
#include <acsense/metrics.hpp>
#include <acsense/metrics_io.hpp>
#include <acsense/ranking.hpp>
#include <acsense/sweep.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

namespace acsense {

namespace cli_detail {

inline std::string resolve_output(const std::string& path) {
  if (path.empty()) return path;
  const char* dir = std::getenv("ACSENSE_OUTPUT_DIR");
  const std::filesystem::path p(path);
  if (dir == nullptr || *dir == '\0' || p.is_absolute()) return path;
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / p).string();
}

// Problem flags shared by every subcommand. Values given on the command line
// override the config file, which overrides the defaults.
struct ProblemFlags {
  std::string config_path;
  unsigned n = 0, n_thres = 0;
  double p = 0, q = 0, pi_upper = 0, lambda = 0, gamma = 0;
  std::size_t max_horizon = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  CLI::Option *o_n{}, *o_nt{}, *o_p{}, *o_q{}, *o_pi{}, *o_lambda{}, *o_gamma{}, *o_mh{},
      *o_seed{};

  void attach(CLI::App& app, bool with_config = true) {
    if (with_config) {
      app.add_option("--config", config_path, "JSON config file mirroring these flags")
          ->check(CLI::ExistingFile);
    }
    o_n = app.add_option("--n", n, "number of processes N");
    o_nt = app.add_option("--n-thres", n_thres, "anomaly count that triggers the event");
    o_p = app.add_option("--p", p, "flip probability of a probe reading");
    o_q = app.add_option("--q", q, "per-step change probability");
    o_pi = app.add_option("--pi-upper", pi_upper, "event-belief stopping threshold");
    o_lambda = app.add_option("--lambda", lambda, "sensing cost per probed process");
    o_gamma = app.add_option("--gamma", gamma, "discount factor");
    o_mh = app.add_option("--max-horizon", max_horizon, "episode step cap");
    o_seed = app.add_option("--seed", seed, "master seed");
    app.add_option("--threads", threads, "evaluation threads")->check(CLI::PositiveNumber);
  }

  void apply(TrainConfig& cfg) const {
    if (!config_path.empty()) cfg = load_config(config_path);
    auto& pr = cfg.problem;
    if (o_n->count()) pr.n_processes = n;
    if (o_nt->count()) pr.n_thres = n_thres;
    if (o_p->count()) pr.flip_prob = p;
    if (o_q->count()) pr.change_prob = q;
    if (o_pi->count()) pr.stopping.pi_upper = pi_upper;
    if (o_lambda->count()) pr.reward.lambda = lambda;
    if (o_gamma->count()) pr.reward.gamma = gamma;
    if (o_mh->count()) pr.stopping.max_horizon = max_horizon;
    if (o_seed->count()) cfg.seed = seed;
  }
};

inline void emit_metrics(const MetricsTable& table, const std::string& out_path,
                         std::ostream& out) {
  const std::string text = format_metrics(table);
  if (!out_path.empty()) write_text_file(resolve_output(out_path), text);
  out << text;
}

}  // namespace cli_detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  using namespace cli_detail;
  CLI::App app{"Controlled-sensing anomaly-count detection: actor-critic trainer and evaluator"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "train an actor-critic policy");
  ProblemFlags train_flags;
  train_flags.attach(*train_cmd);
  std::size_t train_episodes = 0;
  std::vector<std::size_t> hidden;
  double actor_lr = 0, critic_lr = 0;
  std::string ckpt_out, curve_out;
  auto* o_episodes = train_cmd->add_option("--episodes", train_episodes, "training episodes");
  auto* o_hidden = train_cmd->add_option("--hidden", hidden, "hidden layer widths")->delimiter(',');
  auto* o_alr = train_cmd->add_option("--actor-lr", actor_lr, "actor learning rate");
  auto* o_clr = train_cmd->add_option("--critic-lr", critic_lr, "critic learning rate");
  train_cmd->add_option("--out", ckpt_out, "checkpoint path")->required();
  train_cmd->add_option("--curve", curve_out, "training curve CSV path");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a checkpoint");
  ProblemFlags eval_flags;
  eval_flags.attach(*eval_cmd, false);
  std::string ckpt_in, eval_out, mode = "stochastic";
  std::size_t eval_episodes = 2000;
  eval_cmd->add_option("--ckpt", ckpt_in, "checkpoint path")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--episodes", eval_episodes, "evaluation episodes")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--mode", mode, "action selection")->check(CLI::IsMember({"stochastic", "argmax"}));
  eval_cmd->add_option("--out", eval_out, "metrics CSV path");

  // baseline
  auto* base_cmd = app.add_subcommand("baseline", "evaluate the ranking baseline");
  ProblemFlags base_flags;
  base_flags.attach(*base_cmd);
  unsigned n_probe = 0;
  std::size_t base_episodes = 2000;
  std::string base_out;
  base_cmd->add_option("--n-probe", n_probe, "processes probed per step")->required();
  base_cmd->add_option("--episodes", base_episodes, "evaluation episodes")->check(CLI::PositiveNumber);
  base_cmd->add_option("--out", base_out, "metrics CSV path");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "grid over pi_upper x (lambda | n)");
  ProblemFlags sweep_flags;
  sweep_flags.attach(*sweep_cmd);
  SweepSpec spec;
  std::size_t sweep_train_episodes = 0;
  std::string sweep_out;
  sweep_cmd->add_option("--pi-upper-grid", spec.pi_upper_grid, "pi_upper values")->delimiter(',');
  sweep_cmd->add_option("--lambda-grid", spec.lambda_grid, "lambda values (learned policy)")->delimiter(',');
  sweep_cmd->add_option("--n-grid", spec.n_grid, "n values (ranking baseline)")->delimiter(',');
  sweep_cmd->add_option("--episodes-per-cell", spec.episodes_per_cell, "evaluation episodes per cell")
      ->check(CLI::PositiveNumber);
  auto* o_ste = sweep_cmd->add_option("--train-episodes", sweep_train_episodes, "training episodes per lambda cell");
  sweep_cmd->add_option("--out", sweep_out, "metrics CSV path");

  // inspect
  auto* inspect_cmd = app.add_subcommand("inspect", "print a checkpoint's config and dimensions");
  std::string inspect_ckpt;
  inspect_cmd->add_option("--ckpt", inspect_ckpt, "checkpoint path")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (train_cmd->parsed()) {
      TrainConfig cfg;
      train_flags.apply(cfg);
      if (o_episodes->count()) cfg.episodes = train_episodes;
      if (o_hidden->count()) cfg.network.hidden = hidden;
      if (o_alr->count()) cfg.network.actor_lr = actor_lr;
      if (o_clr->count()) cfg.network.critic_lr = critic_lr;
      cfg.validate();
      const auto result = train(cfg);
      save_checkpoint({cfg, result.nets, cfg.episodes}, resolve_output(ckpt_out));
      if (!curve_out.empty()) {
        write_text_file(resolve_output(curve_out), format_training_curve(result.curve));
      }
      out << "trained " << cfg.episodes << " episodes; tail probes/step "
          << tail_probes_per_step(result.curve, 500) << "\n";
      return 0;
    }

    if (eval_cmd->parsed()) {
      const Checkpoint ck = load_checkpoint(ckpt_in);
      TrainConfig cfg = ck.config;
      eval_flags.apply(cfg);
      cfg.validate();
      const Problem problem(cfg.problem);
      const auto action_mode = mode == "argmax" ? ActionMode::argmax : ActionMode::stochastic;
      MetricsTable table;
      table.preamble.push_back("config " + config_to_json(cfg).dump());
      MetricsRow row;
      row.policy = "learning";
      row.pi_upper = cfg.problem.stopping.pi_upper;
      row.lambda = cfg.problem.reward.lambda;
      row.seed = cfg.seed;
      row.metrics = evaluate(problem, policy_selector(ck.nets, action_mode), eval_episodes,
                             cfg.seed, eval_flags.threads);
      table.rows.push_back(row);
      emit_metrics(table, eval_out, out);
      return 0;
    }

    if (base_cmd->parsed()) {
      TrainConfig cfg;
      base_flags.apply(cfg);
      cfg.validate();
      const Problem problem(cfg.problem);
      RankingConfig rc{n_probe};
      rc.validate(cfg.problem.n_processes);
      MetricsTable table;
      table.preamble.push_back("config " + config_to_json(cfg).dump());
      MetricsRow row;
      row.policy = "ranking";
      row.pi_upper = cfg.problem.stopping.pi_upper;
      row.n_probe = n_probe;
      row.seed = cfg.seed;
      row.metrics = evaluate(problem, ranking_selector(rc), base_episodes, cfg.seed,
                             base_flags.threads);
      table.rows.push_back(row);
      emit_metrics(table, base_out, out);
      return 0;
    }

    if (sweep_cmd->parsed()) {
      TrainConfig cfg;
      sweep_flags.apply(cfg);
      if (o_ste->count()) cfg.episodes = sweep_train_episodes;
      spec.seed = cfg.seed;
      cfg.validate();
      spec.validate();
      const auto table = sweep(spec, cfg, sweep_flags.threads);
      emit_metrics(table, sweep_out, out);
      return 0;
    }

    if (inspect_cmd->parsed()) {
      const Checkpoint ck = load_checkpoint(inspect_ckpt);
      Json summary;
      summary["config"] = config_to_json(ck.config);
      summary["episodes_trained"] = ck.episodes_trained;
      summary["actor_layer_dims"] = ck.nets.actor.layer_dims;
      summary["critic_layer_dims"] = ck.nets.critic.layer_dims;
      summary["actor_parameters"] = ck.nets.actor.parameter_count();
      summary["critic_parameters"] = ck.nets.critic.parameter_count();
      summary["actor_adam_steps"] = ck.nets.actor_adam.step_count;
      summary["critic_adam_steps"] = ck.nets.critic_adam.step_count;
      out << summary.dump(2) << "\n";
      return 0;
    }
  } catch (const InvalidArgument& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace acsense
