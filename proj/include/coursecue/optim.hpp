// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>

#include "coursecue/model.hpp"
#include "json.hpp"

namespace coursecue {

struct TrainConfig {
  double lr = 3e-5;
  double beta1 = 0.9;
  double beta2 = 0.998;
  double adam_eps = 1e-8;
  std::size_t warmup_steps = 500;
  std::size_t epochs = 50;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  std::string loss = "mse";
  /// Start the head bias at the mean training target instead of 0.
  bool warm_start_bias = true;

  void validate() const;
  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static TrainConfig from_json(const nlohmann::json& j);
};

/// base * min(step / warmup, sqrt(warmup / step)); step counts from 1.
double learning_rate(const TrainConfig& config, std::size_t step);

/// Adam with bias correction and the schedule above.
class Adam {
 public:
  Adam(const ParameterSet& params, const TrainConfig& config);

  /// Applies one update; `grads` must hold a tensor for every parameter.
  void step(ParameterSet& params, const std::map<std::string, Tensor>& grads);
  std::size_t steps() const { return step_; }
  double last_lr() const { return last_lr_; }

 private:
  TrainConfig config_;
  std::map<std::string, Tensor> m_;
  std::map<std::string, Tensor> v_;
  std::size_t step_ = 0;
  double last_lr_ = 0;
};

}  // namespace coursecue
