#pragma once

// JSON config and checkpoint documents.
//
// A config document mirrors the CLI flags ("n", "n-thres", "p", ...). A
// checkpoint embeds that config under "config" next to the actor and critic
// parameters and their Adam state. Doubles are written in shortest
// round-trip form, so loading a checkpoint reproduces it bit for bit.

#include <acsense/agent.hpp>
#include <acsense/errors.hpp>
#include <acsense/metrics_io.hpp>

#include <json.hpp>

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace acsense {

using Json = nlohmann::json;

inline constexpr const char* kCheckpointFormat = "acsense-checkpoint";
inline constexpr int kCheckpointVersion = 1;

inline Json config_to_json(const TrainConfig& cfg) {
  const auto& p = cfg.problem;
  Json j;
  j["n"] = p.n_processes;
  j["n-thres"] = p.n_thres;
  j["p"] = p.flip_prob;
  j["q"] = p.change_prob;
  j["pi-upper"] = p.stopping.pi_upper;
  j["max-horizon"] = p.stopping.max_horizon;
  j["lambda"] = p.reward.lambda;
  j["gamma"] = p.reward.gamma;
  j["belief-clamp-eps"] = p.reward.belief_clamp_eps;
  j["episodes"] = cfg.episodes;
  j["seed"] = cfg.seed;
  j["hidden"] = cfg.network.hidden;
  j["actor-lr"] = cfg.network.actor_lr;
  j["critic-lr"] = cfg.network.critic_lr;
  j["adam-beta1"] = cfg.network.beta1;
  j["adam-beta2"] = cfg.network.beta2;
  j["adam-eps"] = cfg.network.epsilon;
  return j;
}

// Overlays the keys present in `j` onto `cfg`. Unknown keys and ill-typed
// values are InvalidArgument.
inline void apply_config_json(const Json& j, TrainConfig& cfg) {
  if (!j.is_object()) throw InvalidArgument("config document must be a JSON object");
  static const std::set<std::string> known{
      "n",     "n-thres", "p",      "q",        "pi-upper",  "max-horizon", "lambda",     "gamma",
      "belief-clamp-eps", "episodes", "seed", "hidden", "actor-lr", "critic-lr", "adam-beta1",
      "adam-beta2", "adam-eps"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw InvalidArgument("unknown config key '" + key + "'");
  }
  try {
    auto& p = cfg.problem;
    if (j.contains("n")) p.n_processes = j.at("n").get<unsigned>();
    if (j.contains("n-thres")) p.n_thres = j.at("n-thres").get<unsigned>();
    if (j.contains("p")) p.flip_prob = j.at("p").get<double>();
    if (j.contains("q")) p.change_prob = j.at("q").get<double>();
    if (j.contains("pi-upper")) p.stopping.pi_upper = j.at("pi-upper").get<double>();
    if (j.contains("max-horizon")) p.stopping.max_horizon = j.at("max-horizon").get<std::size_t>();
    if (j.contains("lambda")) p.reward.lambda = j.at("lambda").get<double>();
    if (j.contains("gamma")) p.reward.gamma = j.at("gamma").get<double>();
    if (j.contains("belief-clamp-eps")) p.reward.belief_clamp_eps = j.at("belief-clamp-eps").get<double>();
    if (j.contains("episodes")) cfg.episodes = j.at("episodes").get<std::size_t>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("hidden")) cfg.network.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    if (j.contains("actor-lr")) cfg.network.actor_lr = j.at("actor-lr").get<double>();
    if (j.contains("critic-lr")) cfg.network.critic_lr = j.at("critic-lr").get<double>();
    if (j.contains("adam-beta1")) cfg.network.beta1 = j.at("adam-beta1").get<double>();
    if (j.contains("adam-beta2")) cfg.network.beta2 = j.at("adam-beta2").get<double>();
    if (j.contains("adam-eps")) cfg.network.epsilon = j.at("adam-eps").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("bad config value: ") + e.what());
  }
}

inline Json mlp_to_json(const MlpParams& net) {
  Json j;
  j["layer_dims"] = net.layer_dims;
  Json weights = Json::array(), biases = Json::array();
  for (const auto& layer : net.layers) {
    weights.push_back(layer.weights);
    biases.push_back(layer.biases);
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  return j;
}

inline MlpParams mlp_from_json(const Json& j) {
  MlpParams net(j.at("layer_dims").get<std::vector<std::size_t>>());
  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  if (weights.size() != net.layers.size() || biases.size() != net.layers.size()) {
    throw InvalidArgument("checkpoint layer count does not match layer_dims");
  }
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    net.layers[l].weights = weights[l].get<std::vector<double>>();
    net.layers[l].biases = biases[l].get<std::vector<double>>();
  }
  net.check_consistent();
  return net;
}

inline Json adam_to_json(const AdamState& a) {
  return Json{{"first_moment", a.first_moment}, {"second_moment", a.second_moment},
              {"step_count", a.step_count},     {"learning_rate", a.learning_rate},
              {"beta1", a.beta1},               {"beta2", a.beta2},
              {"epsilon", a.epsilon}};
}

inline AdamState adam_from_json(const Json& j, const MlpParams& params) {
  AdamState a;
  a.first_moment = j.at("first_moment").get<std::vector<double>>();
  a.second_moment = j.at("second_moment").get<std::vector<double>>();
  a.step_count = j.at("step_count").get<std::size_t>();
  a.learning_rate = j.at("learning_rate").get<double>();
  a.beta1 = j.at("beta1").get<double>();
  a.beta2 = j.at("beta2").get<double>();
  a.epsilon = j.at("epsilon").get<double>();
  if (a.first_moment.size() != params.parameter_count() ||
      a.second_moment.size() != params.parameter_count()) {
    throw InvalidArgument("checkpoint optimizer state does not match network shape");
  }
  return a;
}

struct Checkpoint {
  TrainConfig config;
  ActorCritic nets;
  std::size_t episodes_trained = 0;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline Json checkpoint_to_json(const Checkpoint& ck) {
  Json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["seed"] = ck.config.seed;
  j["episodes_trained"] = ck.episodes_trained;
  j["config"] = config_to_json(ck.config);
  j["actor"] = mlp_to_json(ck.nets.actor);
  j["critic"] = mlp_to_json(ck.nets.critic);
  j["actor_adam"] = adam_to_json(ck.nets.actor_adam);
  j["critic_adam"] = adam_to_json(ck.nets.critic_adam);
  return j;
}

inline Checkpoint checkpoint_from_json(const Json& j) {
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat) {
      throw InvalidArgument("not an acsense checkpoint");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw InvalidArgument("unsupported checkpoint version");
    }
    Checkpoint ck;
    apply_config_json(j.at("config"), ck.config);
    ck.config.validate();
    ck.episodes_trained = j.at("episodes_trained").get<std::size_t>();
    ck.nets.actor = mlp_from_json(j.at("actor"));
    ck.nets.critic = mlp_from_json(j.at("critic"));
    ck.nets.actor_adam = adam_from_json(j.at("actor_adam"), ck.nets.actor);
    ck.nets.critic_adam = adam_from_json(j.at("critic_adam"), ck.nets.critic);
    const std::size_t m = state_count(ck.config.problem.n_processes);
    if (ck.nets.actor.input_dim() != m || ck.nets.actor.output_dim() != m ||
        ck.nets.critic.input_dim() != m || ck.nets.critic.output_dim() != 1) {
      throw InvalidArgument("checkpoint network dims do not match N");
    }
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed checkpoint: ") + e.what());
  }
}

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  write_text_file(path, checkpoint_to_json(ck).dump(1) + "\n");
}

inline Checkpoint load_checkpoint(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument("checkpoint '" + path + "' is not valid JSON: " + e.what());
  }
  return checkpoint_from_json(j);
}

inline TrainConfig load_config(const std::string& path) {
  TrainConfig cfg;
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument("config '" + path + "' is not valid JSON: " + e.what());
  }
  apply_config_json(j, cfg);
  return cfg;
}

}  // namespace acsense
