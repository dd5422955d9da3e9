// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

namespace coursecue {

/// All three require equal, nonzero lengths (ValidationError otherwise).
double mse_loss(std::span<const double> predicted, std::span<const double> actual);
double rmse(std::span<const double> actual, std::span<const double> predicted);
double mae(std::span<const double> actual, std::span<const double> predicted);

}  // namespace coursecue
