// SPDX-License-Identifier: Apache-2.0
#include "coursecue/metrics.hpp"

#include <cmath>
#include <string>

#include "coursecue/error.hpp"

namespace coursecue {
namespace {

void check(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ValidationError("length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  if (a.empty()) throw ValidationError("metric of an empty sample");
}

}  // namespace

double mse_loss(std::span<const double> predicted, std::span<const double> actual) {
  check(predicted, actual);
  double total = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) total += (predicted[i] - actual[i]) * (predicted[i] - actual[i]);
  return total / static_cast<double>(actual.size());
}

double rmse(std::span<const double> actual, std::span<const double> predicted) {
  return std::sqrt(mse_loss(predicted, actual));
}

double mae(std::span<const double> actual, std::span<const double> predicted) {
  check(predicted, actual);
  double total = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) total += std::fabs(actual[i] - predicted[i]);
  return total / static_cast<double>(actual.size());
}

}  // namespace coursecue
