// SPDX-License-Identifier: Apache-2.0
#include "coursecue/train.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "coursecue/csv.hpp"
#include "coursecue/error.hpp"
#include "coursecue/log.hpp"

namespace coursecue {

FeatureStandardizer FeatureStandardizer::fit(std::span<const FeatureVector> features) {
  if (features.empty()) throw ValidationError("cannot standardize an empty feature set");
  FeatureStandardizer s;
  const double n = static_cast<double>(features.size());
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    double mean = 0;
    for (const auto& f : features) mean += f.to_array()[j];
    mean /= n;
    double var = 0;
    for (const auto& f : features) {
      const double d = f.to_array()[j] - mean;
      var += d * d;
    }
    const double sd = std::sqrt(var / n);
    s.mean[j] = mean;
    s.scale[j] = sd > 0 ? sd : 1.0;
  }
  return s;
}

std::array<Scalar, kFeatureCount> FeatureStandardizer::apply(const FeatureVector& features) const {
  const auto x = features.to_array();
  std::array<Scalar, kFeatureCount> z{};
  for (std::size_t j = 0; j < kFeatureCount; ++j) z[j] = static_cast<Scalar>((x[j] - mean[j]) / scale[j]);
  return z;
}

nlohmann::json FeatureStandardizer::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    j[std::string(kFeatureNames[i])] = {{"mean", mean[i]}, {"scale", scale[i]}};
  }
  return j;
}

FeatureStandardizer FeatureStandardizer::from_json(const nlohmann::json& j) {
  FeatureStandardizer s;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const std::string name(kFeatureNames[i]);
    if (!j.contains(name)) throw ValidationError("standardizer lacks feature '" + name + "'");
    const auto& entry = j.at(name);
    if (!entry.contains("mean") || !entry.contains("scale") || !entry["mean"].is_number() ||
        !entry["scale"].is_number() || !(entry["scale"].get<double>() > 0)) {
      throw ValidationError("standardizer entry for '" + name + "' is malformed");
    }
    s.mean[i] = entry["mean"].get<double>();
    s.scale[i] = entry["scale"].get<double>();
  }
  return s;
}

namespace {

double dataset_mse(const ParameterSet& params, const ModelConfig& config, std::span<const EncodedCourse> data,
                   std::size_t batch_size) {
  const std::vector<double> pred = predict(params, config, data, batch_size);
  double total = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double d = pred[i] - static_cast<double>(data[i].target);
    total += d * d;
  }
  return total / static_cast<double>(data.size());
}

}  // namespace

TrainResult train(std::span<const EncodedCourse> train_set, std::span<const EncodedCourse> validation_set,
                  const ModelConfig& config, const TrainConfig& tconfig, const ParameterSet* initial) {
  config.validate();
  tconfig.validate();
  if (train_set.empty()) throw ValidationError("empty training split");
  if (validation_set.empty()) throw ValidationError("empty validation split");

  ParameterSet params;
  if (initial) {
    validate_parameters(*initial, config);
    params = *initial;
  } else {
    params = init_parameters(config, derive_seed(tconfig.seed, "init"));
    if (tconfig.warm_start_bias) {
      double mean = 0;
      for (const auto& c : train_set) mean += static_cast<double>(c.target);
      params.at("head.bias")[0] = static_cast<Scalar>(mean / static_cast<double>(train_set.size()));
    }
  }

  Rng order_rng(derive_seed(tconfig.seed, "order"));
  Rng dropout_rng(derive_seed(tconfig.seed, "dropout"));
  Adam adam(params, tconfig);
  TrainResult result;
  result.best_val_mse = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 1; epoch <= tconfig.epochs; ++epoch) {
    order_rng.shuffle(order);
    double loss_total = 0;
    for (std::size_t start = 0; start < order.size(); start += tconfig.batch_size) {
      const std::size_t end = std::min(order.size(), start + tconfig.batch_size);
      std::vector<const EncodedCourse*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train_set[order[i]]);
      LossAndGrad lg = loss_and_grad(params, config, batch, ForwardMode{&dropout_rng});
      if (!std::isfinite(lg.loss)) {
        throw NumericalError("training loss became non-finite at epoch " + std::to_string(epoch));
      }
      loss_total += lg.loss * static_cast<double>(batch.size());
      adam.step(params, lg.grads);
    }
    EpochRecord record;
    record.epoch = epoch;
    record.train_mse = loss_total / static_cast<double>(train_set.size());
    record.val_mse = dataset_mse(params, config, validation_set, tconfig.batch_size);
    record.lr = adam.last_lr();
    result.history.push_back(record);
    log_info("epoch " + std::to_string(epoch) + " train_mse " + std::to_string(record.train_mse) + " val_mse " +
             std::to_string(record.val_mse));
    if (record.val_mse < result.best_val_mse) {
      result.best_val_mse = record.val_mse;
      result.best_epoch = epoch;
      result.params = params;
    }
  }
  if (result.best_epoch == 0) throw NumericalError("validation MSE never became finite");
  return result;
}

std::string history_csv(std::span<const EpochRecord> history) {
  std::string out = "epoch,train_mse,val_mse,lr\n";
  for (const auto& r : history) {
    out += std::to_string(r.epoch) + "," + csv::format_double(r.train_mse) + "," + csv::format_double(r.val_mse) +
           "," + csv::format_double(r.lr) + "\n";
  }
  return out;
}

EncodedCourse encode_course(const Course& course, const FeatureVector& features, const Vocabulary& vocabulary,
                            const FeatureStandardizer& standardizer, std::size_t max_lecture_tokens,
                            Scalar target) {
  EncodedCourse out;
  out.id = course.id;
  out.features = standardizer.apply(features);
  out.target = target;
  for (const Lecture* lecture : course.lectures()) {
    EncodedLecture enc;
    enc.section_index = lecture->section_index();
    enc.position = lecture->position_in_section();
    const auto& tokens = lecture->tokens();
    const std::size_t n = std::min(tokens.size(), max_lecture_tokens);
    enc.token_ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) enc.token_ids.push_back(vocabulary.id(tokens[i]));
    out.lectures.push_back(std::move(enc));
  }
  if (out.lectures.empty()) throw ValidationError("course '" + course.id + "' has no lectures");
  return out;
}

std::vector<EncodedCourse> encode_courses(const TrainedModel& model, std::span<const Course* const> courses,
                                          std::span<const FeatureRecord> records, bool require_target) {
  std::unordered_map<std::string, const FeatureRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.course_id, &r);
  std::vector<EncodedCourse> out;
  std::string missing_features, missing_targets;
  for (const Course* course : courses) {
    auto it = by_id.find(course->id);
    if (it == by_id.end()) {
      missing_features += (missing_features.empty() ? "" : ", ") + course->id;
      continue;
    }
    const auto rating = it->second->rating(model.target);
    if (require_target && !rating) {
      missing_targets += (missing_targets.empty() ? "" : ", ") + course->id;
      continue;
    }
    out.push_back(encode_course(*course, it->second->features, model.vocabulary, model.standardizer,
                                model.config.max_lecture_tokens, static_cast<Scalar>(rating.value_or(0.0))));
  }
  if (!missing_features.empty()) throw ValidationError("no feature record for courses: " + missing_features);
  if (!missing_targets.empty()) {
    throw ValidationError("missing " + std::string(target_name(model.target)) + " rating for courses: " +
                          missing_targets);
  }
  return out;
}

std::vector<const Course*> select_courses(std::span<const Course> courses, std::span<const std::string> ids) {
  std::unordered_map<std::string, const Course*> by_id;
  for (const auto& c : courses) by_id.emplace(c.id, &c);
  std::vector<const Course*> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError("split names unknown course '" + id + "'");
    out.push_back(it->second);
  }
  return out;
}

FitResult fit_model(std::span<const Course> courses, std::span<const FeatureRecord> records,
                    const DatasetSplit& split, Target target, ModelConfig config, const TrainConfig& tconfig,
                    const ParameterSet* initial, std::size_t vocab_max_size) {
  const auto train_courses = select_courses(courses, split.train);
  const auto val_courses = select_courses(courses, split.validation);
  if (train_courses.empty() || val_courses.empty()) throw ValidationError("empty split");

  FitResult fit;
  fit.model.target = target;
  fit.model.vocabulary = Vocabulary::build(train_courses, config.max_lecture_tokens, 1, vocab_max_size);
  config.vocab_size = fit.model.vocabulary.size();
  fit.model.config = config;

  std::unordered_map<std::string, const FeatureRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.course_id, &r);
  std::vector<FeatureVector> train_features;
  for (const Course* c : train_courses) {
    auto it = by_id.find(c->id);
    if (it == by_id.end()) throw ValidationError("no feature record for course '" + c->id + "'");
    train_features.push_back(it->second->features);
  }
  fit.model.standardizer = FeatureStandardizer::fit(train_features);

  const auto train_set = encode_courses(fit.model, train_courses, records, true);
  const auto val_set = encode_courses(fit.model, val_courses, records, true);
  TrainResult result = train(train_set, val_set, config, tconfig, initial);
  fit.model.params = std::move(result.params);
  fit.history = std::move(result.history);
  fit.best_epoch = result.best_epoch;
  return fit;
}

std::vector<double> predict(const TrainedModel& model, std::span<const EncodedCourse> courses) {
  return predict(model.params, model.config, courses);
}

}  // namespace coursecue
