#pragma once

// Small dense ReLU networks with exact backpropagation and Adam.
//
// The actor maps a belief to a softmax distribution over probe subsets, the
// critic maps a belief to a scalar value. Both share the MlpParams container;
// gradients use the same container so they can be indexed in lockstep.

#include <acsense/belief.hpp>
#include <acsense/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace acsense {

struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;  // row-major, outputs x inputs
  std::vector<double> biases;   // outputs

  double& w(std::size_t row, std::size_t col) { return weights[row * inputs + col]; }
  double w(std::size_t row, std::size_t col) const { return weights[row * inputs + col]; }
};

struct MlpParams {
  std::vector<std::size_t> layer_dims;
  std::vector<DenseLayer> layers;

  MlpParams() = default;

  // Zero-initialised network with the given dims (input, hidden..., output).
  explicit MlpParams(std::vector<std::size_t> dims) : layer_dims(std::move(dims)) {
    if (layer_dims.size() < 2) {
      throw InvalidArgument("a network needs at least input and output dims");
    }
    for (auto d : layer_dims) {
      if (d == 0) throw InvalidArgument("layer dims must be positive");
    }
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
      DenseLayer layer;
      layer.inputs = layer_dims[l];
      layer.outputs = layer_dims[l + 1];
      layer.weights.assign(layer.inputs * layer.outputs, 0.0);
      layer.biases.assign(layer.outputs, 0.0);
      layers.push_back(std::move(layer));
    }
  }

  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t output_dim() const { return layer_dims.back(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.size() + l.biases.size();
    return n;
  }

  // Visits every parameter in a fixed order: per layer, weights then biases.
  template <typename F>
  void for_each(F&& f) {
    for (auto& l : layers) {
      for (double& v : l.weights) f(v);
      for (double& v : l.biases) f(v);
    }
  }
  template <typename F>
  void for_each(F&& f) const {
    for (const auto& l : layers) {
      for (double v : l.weights) f(v);
      for (double v : l.biases) f(v);
    }
  }

  void check_consistent() const {
    if (layer_dims.size() != layers.size() + 1) {
      throw InvalidArgument("layer_dims does not match layer count");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& layer = layers[l];
      if (layer.inputs != layer_dims[l] || layer.outputs != layer_dims[l + 1] ||
          layer.weights.size() != layer.inputs * layer.outputs ||
          layer.biases.size() != layer.outputs) {
        throw InvalidArgument("layer " + std::to_string(l) +
                              " shape does not match layer_dims");
      }
    }
    for_each([](double v) {
      if (!std::isfinite(v)) throw InvalidArgument("non-finite network parameter");
    });
  }

  friend bool operator==(const MlpParams& a, const MlpParams& b) {
    if (a.layer_dims != b.layer_dims) return false;
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
      if (a.layers[l].weights != b.layers[l].weights ||
          a.layers[l].biases != b.layers[l].biases) {
        return false;
      }
    }
    return true;
  }
};

using ParamGradient = MlpParams;

// Uniform He-style init: weights ~ U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases.
inline MlpParams init_mlp(std::vector<std::size_t> dims, std::mt19937_64& rng) {
  MlpParams net(std::move(dims));
  for (auto& layer : net.layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.inputs));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& v : layer.weights) v = dist(rng);
  }
  return net;
}

namespace detail {

// Activations per layer: acts[0] is the input, acts[l+1] the output of layer l
// (post-ReLU for hidden layers, raw for the final layer).
struct ForwardTrace {
  std::vector<std::vector<double>> acts;
};

inline ForwardTrace forward_trace(const MlpParams& net, std::span<const double> input) {
  if (input.size() != net.input_dim()) {
    throw InvalidArgument("network input has dimension " + std::to_string(input.size()) +
                          ", expected " + std::to_string(net.input_dim()));
  }
  ForwardTrace trace;
  trace.acts.reserve(net.layers.size() + 1);
  trace.acts.emplace_back(input.begin(), input.end());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    const auto& x = trace.acts.back();
    std::vector<double> z(layer.biases);
    for (std::size_t r = 0; r < layer.outputs; ++r) {
      const double* row = layer.weights.data() + r * layer.inputs;
      double acc = 0.0;
      for (std::size_t c = 0; c < layer.inputs; ++c) acc += row[c] * x[c];
      z[r] += acc;
    }
    if (l + 1 < net.layers.size()) {
      for (double& v : z) v = std::max(v, 0.0);
    }
    trace.acts.push_back(std::move(z));
  }
  return trace;
}

// Gradient of a scalar objective given its derivative w.r.t. the raw output.
inline ParamGradient backward(const MlpParams& net, const ForwardTrace& trace,
                              std::vector<double> grad_out) {
  ParamGradient grad(net.layer_dims);
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const auto& layer = net.layers[l];
    auto& g = grad.layers[l];
    const auto& x = trace.acts[l];
    for (std::size_t r = 0; r < layer.outputs; ++r) {
      const double d = grad_out[r];
      g.biases[r] = d;
      if (d == 0.0) continue;
      double* row = g.weights.data() + r * layer.inputs;
      for (std::size_t c = 0; c < layer.inputs; ++c) row[c] = d * x[c];
    }
    if (l == 0) break;
    // Through W and the ReLU that produced x.
    std::vector<double> grad_in(layer.inputs, 0.0);
    for (std::size_t r = 0; r < layer.outputs; ++r) {
      const double d = grad_out[r];
      if (d == 0.0) continue;
      const double* row = layer.weights.data() + r * layer.inputs;
      for (std::size_t c = 0; c < layer.inputs; ++c) grad_in[c] += d * row[c];
    }
    for (std::size_t c = 0; c < layer.inputs; ++c) {
      if (x[c] <= 0.0) grad_in[c] = 0.0;
    }
    grad_out = std::move(grad_in);
  }
  return grad;
}

inline std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace detail

// probs[a] is the probability of probe mask a.
struct PolicyDistribution {
  std::vector<double> probs;
};

inline PolicyDistribution actor_forward(const BeliefVector& belief, const MlpParams& actor) {
  const auto trace = detail::forward_trace(actor, belief.probs());
  return {detail::softmax(trace.acts.back())};
}

inline double critic_forward(const BeliefVector& belief, const MlpParams& critic) {
  if (critic.output_dim() != 1) throw InvalidArgument("critic must have one output");
  return detail::forward_trace(critic, belief.probs()).acts.back()[0];
}

// d/d(params) log mu_action(belief).
inline ParamGradient actor_grad_log_prob(const BeliefVector& belief, std::size_t action,
                                         const MlpParams& actor) {
  if (action >= actor.output_dim()) throw InvalidArgument("action index out of range");
  const auto trace = detail::forward_trace(actor, belief.probs());
  auto grad_out = detail::softmax(trace.acts.back());
  for (double& v : grad_out) v = -v;
  grad_out[action] += 1.0;
  return detail::backward(actor, trace, std::move(grad_out));
}

// d/d(params) V(belief).
inline ParamGradient critic_grad_value(const BeliefVector& belief, const MlpParams& critic) {
  if (critic.output_dim() != 1) throw InvalidArgument("critic must have one output");
  const auto trace = detail::forward_trace(critic, belief.probs());
  return detail::backward(critic, trace, {1.0});
}

// ---------------------------------------------------------------------------

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::size_t step_count = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;
  AdamState(const MlpParams& params, double lr, double b1 = 0.9, double b2 = 0.999,
            double eps = 1e-8)
      : first_moment(params.parameter_count(), 0.0),
        second_moment(params.parameter_count(), 0.0),
        learning_rate(lr),
        beta1(b1),
        beta2(b2),
        epsilon(eps) {
    if (!(lr > 0.0)) throw InvalidArgument("learning rate must be positive");
    if (!(b1 >= 0.0 && b1 < 1.0) || !(b2 >= 0.0 && b2 < 1.0) || !(eps > 0.0)) {
      throw InvalidArgument("invalid Adam hyperparameters");
    }
  }

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

inline constexpr double kMomentFloor = 1e-200;

// One Adam descent step on `loss_grad`. Throws NumericalFailure and leaves
// both params and state untouched if the gradient is not finite.
inline void adam_apply(MlpParams& params, AdamState& adam, const ParamGradient& loss_grad) {
  const std::size_t n = params.parameter_count();
  if (adam.first_moment.size() != n || adam.second_moment.size() != n ||
      loss_grad.parameter_count() != n || loss_grad.layer_dims != params.layer_dims) {
    throw InvalidArgument("optimizer state shape does not match parameters");
  }
  loss_grad.for_each([](double g) {
    if (!std::isfinite(g)) throw NumericalFailure("non-finite gradient");
  });
  ++adam.step_count;
  const double t = static_cast<double>(adam.step_count);
  const double lr = adam.learning_rate;
  const double b1 = adam.beta1, b2 = adam.beta2, eps = adam.epsilon;
  const double correction1 = 1.0 - std::pow(b1, t);
  const double correction2 = 1.0 - std::pow(b2, t);

  double* m = adam.first_moment.data();
  double* v = adam.second_moment.data();
  auto update = [&](std::vector<double>& w, const std::vector<double>& g) {
    const std::size_t len = w.size();
    for (std::size_t i = 0; i < len; ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      // Moments of dead units decay geometrically; keep them out of the
      // subnormal range, where arithmetic is orders of magnitude slower.
      if (std::abs(m[i]) < kMomentFloor) m[i] = 0.0;
      if (v[i] < kMomentFloor) v[i] = 0.0;
      w[i] -= lr * (m[i] / correction1) / (std::sqrt(v[i] / correction2) + eps);
    }
    m += len;
    v += len;
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    update(params.layers[l].weights, loss_grad.layers[l].weights);
    update(params.layers[l].biases, loss_grad.layers[l].biases);
  }
}

// Policy-gradient ascent along delta * grad log mu. Adam minimises, so the
// step is taken on the negated direction.
inline void actor_step(MlpParams& actor, AdamState& adam, double delta,
                       const ParamGradient& grad_log) {
  if (!std::isfinite(delta)) throw NumericalFailure("non-finite TD error in actor step");
  ParamGradient loss_grad = grad_log;
  loss_grad.for_each([delta](double& g) { g *= -delta; });
  adam_apply(actor, adam, loss_grad);
}

// Semi-gradient TD: d(delta^2)/d(beta) = -2 delta dV(belief_prev)/d(beta) with
// the bootstrap target held constant.
inline void critic_step(MlpParams& critic, AdamState& adam, double delta,
                        const BeliefVector& belief_prev) {
  if (!std::isfinite(delta)) throw NumericalFailure("non-finite TD error in critic step");
  ParamGradient loss_grad = critic_grad_value(belief_prev, critic);
  loss_grad.for_each([delta](double& g) { g *= -2.0 * delta; });
  adam_apply(critic, adam, loss_grad);
}

}  // namespace acsense
