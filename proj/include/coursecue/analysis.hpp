// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coursecue/feature_table.hpp"

namespace coursecue {

/// Sample Pearson correlation. Requires equal lengths n >= 3; a constant
/// input raises NumericalError("undefined correlation").
double pearson(std::span<const double> x, std::span<const double> y);

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction
/// (tolerance 1e-12, at most 200 iterations).
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided p-value of Student's t with `df` degrees of freedom.
double student_t_two_sided(double t, double df);

/// Two-sided p-value for a Pearson r from n samples: t = r sqrt(n-2) /
/// sqrt(1-r^2) against t(n-2). |r| = 1 gives 0; n < 3 raises ValidationError.
double p_value(double r, std::size_t n);

struct CorrelationRow {
  std::string feature;  // column name
  std::string label;    // table label
  Target target = Target::Instructor;
  std::optional<double> r;  // empty when undefined (constant column)
  std::optional<double> p;
  std::size_t n = 0;

  bool defined() const { return r.has_value(); }
  bool significant() const { return p && *p < 0.05; }
};

/// One row per feature in table order. Every record must carry the target
/// rating; otherwise ValidationError lists the offending course ids.
std::vector<CorrelationRow> correlation_report(std::span<const FeatureRecord> records, Target target);

/// CSV: feature,target,r,p,significant. Undefined rows carry "undefined".
std::string report_csv(std::span<const CorrelationRow> rows);
/// Aligned text table with '*' marking p < 0.05.
std::string report_table(std::span<const CorrelationRow> rows);

}  // namespace coursecue
