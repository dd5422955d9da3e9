// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "coursecue/train.hpp"

namespace coursecue {

/// Binary layout, all integers u64 little-endian:
///   "CCUECKPT" | header length | header JSON | tensor count |
///   per tensor: name length | name | rank | dims... | f64 values
/// The header records format_version, model_config, target, vocabulary and
/// feature standardization.
inline constexpr int kCheckpointFormatVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const TrainedModel& model);
/// Validates every tensor shape against the stored model configuration.
TrainedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace coursecue
