// SPDX-License-Identifier: Apache-2.0
#include "coursecue/baselines.hpp"

#include <cmath>
#include <utility>

#include "coursecue/error.hpp"

namespace coursecue {

MeanPredictor MeanPredictor::fit(std::span<const double> targets) {
  if (targets.empty()) throw ValidationError("mean predictor needs at least one target");
  MeanPredictor m;
  double total = 0;
  for (double y : targets) total += y;
  m.mean_ = total / static_cast<double>(targets.size());
  return m;
}

std::vector<double> solve_linear_system(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  if (a.size() != n * n) throw ValidationError("linear system is not square");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
    }
    if (a[pivot * n + col] == 0.0) throw NumericalError("singular linear system");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i * n + c] * x[c];
    x[i] = s / a[i * n + i];
  }
  return x;
}

LinearRegression LinearRegression::fit(std::span<const FeatureVector> features, std::span<const double> targets,
                                       double ridge) {
  if (features.size() != targets.size()) throw ValidationError("feature and target counts differ");
  if (features.empty()) throw ValidationError("linear regression needs at least one sample");
  constexpr std::size_t k = kFeatureCount;
  const double n = static_cast<double>(features.size());
  LinearRegression model;
  std::vector<std::array<double, k>> rows;
  rows.reserve(features.size());
  for (const auto& f : features) rows.push_back(f.to_array());
  for (std::size_t j = 0; j < k; ++j) {
    double mean = 0;
    for (const auto& r : rows) mean += r[j];
    mean /= n;
    double var = 0;
    for (const auto& r : rows) var += (r[j] - mean) * (r[j] - mean);
    const double sd = std::sqrt(var / n);
    model.mean_[j] = mean;
    model.scale_[j] = sd > 0 ? sd : 1.0;
  }
  // Normal equations over [1, z_1..z_k]; the intercept is not penalized.
  constexpr std::size_t d = k + 1;
  std::vector<double> xtx(d * d, 0.0), xty(d, 0.0);
  std::array<double, d> x{};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x[0] = 1.0;
    for (std::size_t j = 0; j < k; ++j) x[j + 1] = (rows[i][j] - model.mean_[j]) / model.scale_[j];
    for (std::size_t a = 0; a < d; ++a) {
      xty[a] += x[a] * targets[i];
      for (std::size_t b = 0; b < d; ++b) xtx[a * d + b] += x[a] * x[b];
    }
  }
  for (std::size_t a = 1; a < d; ++a) xtx[a * d + a] += ridge * n;
  const std::vector<double> beta = solve_linear_system(std::move(xtx), std::move(xty));
  model.intercept_ = beta[0];
  for (std::size_t j = 0; j < k; ++j) model.coef_[j] = beta[j + 1];
  return model;
}

double LinearRegression::predict(const FeatureVector& features) const {
  const auto x = features.to_array();
  double y = intercept_;
  for (std::size_t j = 0; j < kFeatureCount; ++j) y += coef_[j] * (x[j] - mean_[j]) / scale_[j];
  return y;
}

std::vector<double> LinearRegression::predict(std::span<const FeatureVector> features) const {
  std::vector<double> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(predict(f));
  return out;
}

}  // namespace coursecue
