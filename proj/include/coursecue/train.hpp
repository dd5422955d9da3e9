// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "coursecue/corpus.hpp"
#include "coursecue/feature_table.hpp"
#include "coursecue/model.hpp"
#include "coursecue/optim.hpp"
#include "coursecue/vocabulary.hpp"
#include "json.hpp"

namespace coursecue {

/// Per-feature z-scoring fitted on the training split. A constant column
/// gets scale 1.
struct FeatureStandardizer {
  std::array<double, kFeatureCount> mean{};
  std::array<double, kFeatureCount> scale{1, 1, 1, 1, 1, 1, 1, 1};

  static FeatureStandardizer fit(std::span<const FeatureVector> features);
  std::array<Scalar, kFeatureCount> apply(const FeatureVector& features) const;

  nlohmann::json to_json() const;
  static FeatureStandardizer from_json(const nlohmann::json& j);
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_mse = 0;
  double val_mse = 0;
  /// Learning rate of the epoch's last step.
  double lr = 0;
};

struct TrainResult {
  /// Parameters of the epoch with the lowest validation MSE.
  ParameterSet params;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_mse = 0;
};

/// Mini-batch Adam on MSE. Batches are drawn from a seeded per-epoch
/// shuffle; dropout masks come from their own seeded stream, so identical
/// inputs give a bitwise-identical history. `initial` (shape-checked)
/// replaces seeded initialization.
TrainResult train(std::span<const EncodedCourse> train_set, std::span<const EncodedCourse> validation_set,
                  const ModelConfig& config, const TrainConfig& tconfig, const ParameterSet* initial = nullptr);

std::string history_csv(std::span<const EpochRecord> history);

/// Everything needed to score new courses.
struct TrainedModel {
  ModelConfig config;
  Vocabulary vocabulary;
  FeatureStandardizer standardizer;
  Target target = Target::Instructor;
  ParameterSet params;
};

EncodedCourse encode_course(const Course& course, const FeatureVector& features, const Vocabulary& vocabulary,
                            const FeatureStandardizer& standardizer, std::size_t max_lecture_tokens,
                            Scalar target = 0);

/// Encodes `courses`, pairing each with the feature record of the same id.
/// With `require_target`, a missing rating is a ValidationError listing
/// the offending ids.
std::vector<EncodedCourse> encode_courses(const TrainedModel& model, std::span<const Course* const> courses,
                                          std::span<const FeatureRecord> records, bool require_target);

struct FitResult {
  TrainedModel model;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
};

/// Builds the vocabulary and standardizer from the training split, then
/// trains. `config.vocab_size` is overwritten with the built vocabulary's
/// size. `initial`, when given, must match the resulting configuration.
FitResult fit_model(std::span<const Course> courses, std::span<const FeatureRecord> records,
                    const DatasetSplit& split, Target target, ModelConfig config, const TrainConfig& tconfig,
                    const ParameterSet* initial = nullptr, std::size_t vocab_max_size = 0);

/// Looks up courses by id, preserving the order of `ids`.
std::vector<const Course*> select_courses(std::span<const Course> courses, std::span<const std::string> ids);

std::vector<double> predict(const TrainedModel& model, std::span<const EncodedCourse> courses);

}  // namespace coursecue
