// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <vector>

#include "coursecue/verbal_cues.hpp"

namespace coursecue {

/// Predicts the training-target mean for every input.
class MeanPredictor {
 public:
  static MeanPredictor fit(std::span<const double> targets);
  double mean() const { return mean_; }
  std::vector<double> predict(std::size_t n) const { return std::vector<double>(n, mean_); }

 private:
  double mean_ = 0;
};

/// Ordinary least squares on the eight extracted features plus an
/// intercept. Features are z-scored with training statistics before the
/// solve; a tiny ridge term keeps constant columns solvable.
class LinearRegression {
 public:
  static LinearRegression fit(std::span<const FeatureVector> features, std::span<const double> targets,
                              double ridge = 1e-8);
  double predict(const FeatureVector& features) const;
  std::vector<double> predict(std::span<const FeatureVector> features) const;

  double intercept() const { return intercept_; }
  /// Coefficients on the standardized features.
  const std::array<double, kFeatureCount>& coefficients() const { return coef_; }

 private:
  std::array<double, kFeatureCount> mean_{};
  std::array<double, kFeatureCount> scale_{};
  std::array<double, kFeatureCount> coef_{};
  double intercept_ = 0;
};

/// Solves A x = b for square A by Gaussian elimination with partial
/// pivoting. Throws NumericalError when A is singular.
std::vector<double> solve_linear_system(std::vector<double> a, std::vector<double> b);

}  // namespace coursecue
