// SPDX-License-Identifier: Apache-2.0
#include "coursecue/optim.hpp"

#include <cmath>

#include "coursecue/error.hpp"

namespace coursecue {

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError("train config: " + what); };
  if (!(lr > 0)) fail("lr must be positive");
  if (!(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1)) fail("betas must lie in (0, 1)");
  if (!(adam_eps > 0)) fail("adam_eps must be positive");
  if (warmup_steps == 0) fail("warmup_steps must be positive");
  if (epochs == 0) fail("epochs must be >= 1");
  if (batch_size == 0) fail("batch_size must be positive");
  if (loss != "mse") fail("only the 'mse' loss is supported");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"lr", lr},
          {"beta1", beta1},
          {"beta2", beta2},
          {"adam_eps", adam_eps},
          {"warmup_steps", warmup_steps},
          {"epochs", epochs},
          {"batch_size", batch_size},
          {"seed", seed},
          {"loss", loss},
          {"warm_start_bias", warm_start_bias}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("train config must be a JSON object");
  TrainConfig c;
  auto number = [](const std::string& key, const nlohmann::json& v) {
    if (!v.is_number()) throw ValidationError("train config: '" + key + "' must be a number");
    return v.get<double>();
  };
  auto count = [](const std::string& key, const nlohmann::json& v) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw ValidationError("train config: '" + key + "' must be a nonnegative integer");
    }
    return v.get<std::size_t>();
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "lr") c.lr = number(key, value);
    else if (key == "beta1") c.beta1 = number(key, value);
    else if (key == "beta2") c.beta2 = number(key, value);
    else if (key == "adam_eps") c.adam_eps = number(key, value);
    else if (key == "warmup_steps") c.warmup_steps = count(key, value);
    else if (key == "epochs") c.epochs = count(key, value);
    else if (key == "batch_size") c.batch_size = count(key, value);
    else if (key == "seed") c.seed = count(key, value);
    else if (key == "loss") {
      if (!value.is_string()) throw ValidationError("train config: 'loss' must be a string");
      c.loss = value.get<std::string>();
    } else if (key == "warm_start_bias") {
      if (!value.is_boolean()) throw ValidationError("train config: 'warm_start_bias' must be a boolean");
      c.warm_start_bias = value.get<bool>();
    } else {
      throw ValidationError("train config: unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

double learning_rate(const TrainConfig& config, std::size_t step) {
  if (step == 0) throw ValidationError("learning-rate step counts from 1");
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(config.warmup_steps);
  return config.lr * std::min(s / w, std::sqrt(w / s));
}

Adam::Adam(const ParameterSet& params, const TrainConfig& config) : config_(config) {
  config_.validate();
  for (const auto& [name, tensor] : params) {
    m_.emplace(name, Tensor(tensor.shape()));
    v_.emplace(name, Tensor(tensor.shape()));
  }
}

void Adam::step(ParameterSet& params, const std::map<std::string, Tensor>& grads) {
  ++step_;
  last_lr_ = learning_rate(config_, step_);
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (auto& [name, tensor] : params) {
    auto g = grads.find(name);
    if (g == grads.end()) throw ValidationError("no gradient for parameter '" + name + "'");
    const Tensor& grad = g->second;
    Tensor& m = m_.at(name);
    Tensor& v = v_.at(name);
    if (!grad.same_shape(tensor) || !m.same_shape(tensor)) {
      throw ValidationError("gradient shape mismatch for parameter '" + name + "'");
    }
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      const double gi = static_cast<double>(grad[i]);
      const double mi = b1 * static_cast<double>(m[i]) + (1 - b1) * gi;
      const double vi = b2 * static_cast<double>(v[i]) + (1 - b2) * gi * gi;
      m[i] = static_cast<Scalar>(mi);
      v[i] = static_cast<Scalar>(vi);
      const double update = last_lr_ * (mi / c1) / (std::sqrt(vi / c2) + config_.adam_eps);
      tensor[i] = static_cast<Scalar>(static_cast<double>(tensor[i]) - update);
    }
  }
}

}  // namespace coursecue
