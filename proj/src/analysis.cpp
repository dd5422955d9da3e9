// SPDX-License-Identifier: Apache-2.0
#include "coursecue/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "coursecue/csv.hpp"
#include "coursecue/error.hpp"

namespace coursecue {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson: inputs differ in length");
  if (x.size() < 3) throw ValidationError("pearson: need at least 3 samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericalError("undefined correlation: constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

constexpr double kBetaTolerance = 1e-12;
constexpr int kBetaMaxIterations = 200;
constexpr double kTiny = 1e-300;

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kBetaMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kBetaTolerance) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("incomplete beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("incomplete beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double df) {
  if (!(df > 0.0)) throw ValidationError("student t: df must be positive");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return std::clamp(regularized_incomplete_beta(0.5 * df, 0.5, x), 0.0, 1.0);
}

double p_value(double r, std::size_t n) {
  if (n < 3) throw ValidationError("p_value: need n >= 3");
  if (std::fabs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  // df / (df + t^2) simplifies to 1 - r^2.
  const double x = (1.0 - r) * (1.0 + r);
  return std::clamp(regularized_incomplete_beta(0.5 * df, 0.5, x), 0.0, 1.0);
}

std::vector<CorrelationRow> correlation_report(std::span<const FeatureRecord> records, Target target) {
  std::vector<std::string> missing;
  std::vector<double> y;
  for (const auto& r : records) {
    auto rating = r.rating(target);
    if (!rating) {
      missing.push_back(r.course_id);
    } else {
      y.push_back(*rating);
    }
  }
  if (!missing.empty()) {
    std::string msg = "missing " + std::string(target_name(target)) + " rating for course(s):";
    for (const auto& id : missing) msg += " " + id;
    throw ValidationError(msg);
  }
  if (records.size() < 3) throw ValidationError("correlation report needs at least 3 courses");

  std::vector<CorrelationRow> rows;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    std::vector<double> x;
    x.reserve(records.size());
    for (const auto& r : records) x.push_back(r.features.to_array()[f]);
    CorrelationRow row;
    row.feature = std::string(kFeatureNames[f]);
    row.label = std::string(kFeatureLabels[f]);
    row.target = target;
    row.n = records.size();
    try {
      double r = pearson(x, y);
      row.r = r;
      row.p = p_value(r, records.size());
    } catch (const NumericalError&) {
      // Constant column (or constant target): left undefined.
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string report_csv(std::span<const CorrelationRow> rows) {
  std::ostringstream out;
  out << "feature,target,r,p,significant\n";
  for (const auto& row : rows) {
    out << row.feature << ',' << target_name(row.target) << ',';
    if (row.defined()) {
      out << csv::format_double(*row.r) << ',' << csv::format_double(*row.p) << ','
          << (row.significant() ? "true" : "false");
    } else {
      out << "undefined,undefined,undefined";
    }
    out << '\n';
  }
  return out.str();
}

std::string report_table(std::span<const CorrelationRow> rows) {
  std::ostringstream out;
  char line[160];
  std::string target = rows.empty() ? "" : std::string(target_name(rows.front().target));
  std::snprintf(line, sizeof(line), "%-20s %10s %12s %6s\n", "Feature", "Corr", "p-value", "n");
  out << "Pearson correlation with " << target << " rating (* p < 0.05)\n" << line;
  for (const auto& row : rows) {
    if (row.defined()) {
      char corr[32];
      std::snprintf(corr, sizeof(corr), "%.4f%s", *row.r, row.significant() ? "*" : "");
      std::snprintf(line, sizeof(line), "%-20s %10s %12.4g %6zu\n", row.label.c_str(), corr, *row.p, row.n);
    } else {
      std::snprintf(line, sizeof(line), "%-20s %10s %12s %6zu\n", row.label.c_str(), "undefined", "-", row.n);
    }
    out << line;
  }
  return out.str();
}

}  // namespace coursecue
