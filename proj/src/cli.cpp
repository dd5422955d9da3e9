// SPDX-License-Identifier: Apache-2.0
#include "coursecue/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "coursecue/analysis.hpp"
#include "coursecue/baselines.hpp"
#include "coursecue/checkpoint.hpp"
#include "coursecue/csv.hpp"
#include "coursecue/error.hpp"
#include "coursecue/feature_table.hpp"
#include "coursecue/metrics.hpp"
#include "coursecue/synth.hpp"
#include "coursecue/train.hpp"

#ifndef COURSECUE_DEFAULT_LEXICONS
#define COURSECUE_DEFAULT_LEXICONS "data/lexicons"
#endif

namespace coursecue {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Provenance record written beside every output.
struct Manifest {
  explicit Manifest(std::string cmd) : command(std::move(cmd)) {}

  std::string command;
  json configs = json::object();
  json inputs = json::object();
  json outputs = json::object();
  std::optional<std::uint64_t> seed;

  void write(const fs::path& path) const {
    json j = {{"command", command},
              {"configs", configs},
              {"inputs", inputs},
              {"outputs", outputs},
              {"tool_version", COURSECUE_VERSION},
              {"timestamp", utc_timestamp()}};
    j["seed"] = seed ? json(*seed) : json(nullptr);
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write manifest " + path.string());
    out << j.dump(2) << '\n';
  }
};

fs::path manifest_path(const fs::path& output) { return fs::path(output.string() + ".manifest.json"); }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
  if (!out) throw ValidationError("failed writing " + path.string());
}

json read_json(const fs::path& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + what + " " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(what + " " + path.string() + " is not valid JSON: " + e.what());
  }
}

json error_pair(std::span<const double> actual, std::span<const double> predicted) {
  return {{"rmse", rmse(actual, predicted)}, {"mae", mae(actual, predicted)}, {"n", actual.size()}};
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  std::string config, out, lexicons = COURSECUE_DEFAULT_LEXICONS;
  std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  GeneratorSpec spec = GeneratorSpec::load(a.config);
  if (a.seed) spec.seed = *a.seed;
  const LexiconBundle lexicons = LexiconBundle::load_directory(a.lexicons);
  const auto courses = generate(spec, lexicons);
  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  write_corpus(a.out, courses);
  Manifest m("synth");
  m.configs["generator_spec"] = a.config;
  m.inputs["lexicons"] = a.lexicons;
  m.outputs["corpus"] = a.out;
  m.seed = spec.seed;
  m.write(manifest_path(a.out));
  out << "wrote " << courses.size() << " courses to " << a.out << '\n';
  return kExitOk;
}

// ---- features -------------------------------------------------------------

struct FeaturesArgs {
  std::string corpus, out, lexicons = COURSECUE_DEFAULT_LEXICONS, embeddings;
  std::size_t threads = 1;
};

int cmd_features(const FeaturesArgs& a, std::ostream& out) {
  const LexiconBundle lexicons = LexiconBundle::load_directory(a.lexicons);
  const auto courses = load_corpus(a.corpus);
  std::vector<FeatureRecord> records;
  if (a.embeddings.empty()) {
    records = compute_feature_table(courses, lexicons, TfidfEmbedder{}, a.threads);
  } else {
    records = compute_feature_table(courses, lexicons, PrecomputedEmbedder::load(a.embeddings), a.threads);
  }
  write_text(a.out, feature_table_csv(records));
  Manifest m("features");
  m.inputs["corpus"] = a.corpus;
  m.inputs["lexicons"] = a.lexicons;
  if (!a.embeddings.empty()) m.inputs["embeddings"] = a.embeddings;
  m.outputs["features"] = a.out;
  m.write(manifest_path(a.out));
  out << "wrote features for " << records.size() << " courses to " << a.out << '\n';
  return kExitOk;
}

// ---- correlate ------------------------------------------------------------

struct CorrelateArgs {
  std::string features, target = "instructor", out;
};

int cmd_correlate(const CorrelateArgs& a, std::ostream& out) {
  const Target target = parse_target(a.target);
  const auto records = read_feature_table(a.features);
  const auto rows = correlation_report(records, target);
  write_text(a.out, report_csv(rows));
  Manifest m("correlate");
  m.inputs["features"] = a.features;
  m.inputs["target"] = a.target;
  m.outputs["report"] = a.out;
  m.write(manifest_path(a.out));
  out << report_table(rows);
  return kExitOk;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string corpus, features, model_config, train_config, target = "instructor", ablation, out, resume, split;
  std::optional<std::uint64_t> seed;
  std::uint64_t split_seed = 0;
};

std::vector<FeatureVector> feature_vectors(std::span<const FeatureRecord> records,
                                           std::span<const std::string> ids) {
  std::unordered_map<std::string, const FeatureRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.course_id, &r);
  std::vector<FeatureVector> out;
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError("no feature record for course '" + id + "'");
    out.push_back(it->second->features);
  }
  return out;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  ModelConfig mconfig = a.model_config.empty() ? ModelConfig{} : ModelConfig::from_json(read_json(a.model_config, "model config"));
  if (!a.ablation.empty()) mconfig.ablation = parse_ablation(a.ablation);
  TrainConfig tconfig = a.train_config.empty() ? TrainConfig{} : TrainConfig::from_json(read_json(a.train_config, "train config"));
  if (a.seed) tconfig.seed = *a.seed;
  const Target target = parse_target(a.target);

  const auto courses = load_corpus(a.corpus);
  const auto records = read_feature_table(a.features);
  const DatasetSplit split = a.split.empty() ? split_dataset(courses, a.split_seed) : split_from_json(read_json(a.split, "split"));

  std::optional<TrainedModel> resumed;
  if (!a.resume.empty()) resumed = load_checkpoint(a.resume);
  FitResult fit = fit_model(courses, records, split, target, mconfig, tconfig, resumed ? &resumed->params : nullptr);

  const auto test_courses = select_courses(courses, split.test);
  const auto test_set = encode_courses(fit.model, test_courses, records, true);
  const auto predicted = predict(fit.model, test_set);
  std::vector<double> actual;
  for (const auto& c : test_set) actual.push_back(static_cast<double>(c.target));

  // Baselines fitted on the same training split.
  const auto train_courses = select_courses(courses, split.train);
  const auto train_set = encode_courses(fit.model, train_courses, records, true);
  std::vector<double> train_targets;
  for (const auto& c : train_set) train_targets.push_back(static_cast<double>(c.target));
  const auto mean_model = MeanPredictor::fit(train_targets);
  const auto ols = LinearRegression::fit(feature_vectors(records, split.train), train_targets);
  const auto ols_pred = ols.predict(feature_vectors(records, split.test));

  json metrics = {{"target", std::string(target_name(target))},
                  {"ablation", std::string(ablation_name(fit.model.config.ablation))},
                  {"best_epoch", fit.best_epoch},
                  {"test", error_pair(actual, predicted)},
                  {"mean_predictor", error_pair(actual, mean_model.predict(actual.size()))},
                  {"linear_regression", error_pair(actual, ols_pred)}};

  const fs::path dir(a.out);
  fs::create_directories(dir);
  save_checkpoint(dir / "checkpoint.bin", fit.model);
  write_text(dir / "history.csv", history_csv(fit.history));
  write_text(dir / "metrics.json", metrics.dump(2) + "\n");
  write_text(dir / "split.json", split_to_json(split).dump(2) + "\n");

  Manifest m("train");
  if (!a.model_config.empty()) m.configs["model_config"] = a.model_config;
  if (!a.train_config.empty()) m.configs["train_config"] = a.train_config;
  m.configs["resolved_model_config"] = fit.model.config.to_json();
  m.configs["resolved_train_config"] = tconfig.to_json();
  m.inputs["corpus"] = a.corpus;
  m.inputs["features"] = a.features;
  if (!a.resume.empty()) m.inputs["resume"] = a.resume;
  if (!a.split.empty()) m.inputs["split"] = a.split;
  m.outputs = {{"checkpoint", (dir / "checkpoint.bin").string()},
               {"history", (dir / "history.csv").string()},
               {"metrics", (dir / "metrics.json").string()},
               {"split", (dir / "split.json").string()}};
  m.seed = tconfig.seed;
  m.write(dir / "manifest.json");
  out << metrics.dump(2) << '\n';
  return kExitOk;
}

// ---- predict --------------------------------------------------------------

struct PredictArgs {
  std::string corpus, features, checkpoint, out, split, subset = "all";
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const TrainedModel model = load_checkpoint(a.checkpoint);
  const auto courses = load_corpus(a.corpus);
  const auto records = read_feature_table(a.features);

  std::vector<const Course*> selected;
  if (a.subset == "all") {
    for (const auto& c : courses) selected.push_back(&c);
  } else {
    if (a.split.empty()) throw ValidationError("--subset " + a.subset + " requires --split");
    const DatasetSplit split = split_from_json(read_json(a.split, "split"));
    if (a.subset == "train") selected = select_courses(courses, split.train);
    else if (a.subset == "validation") selected = select_courses(courses, split.validation);
    else if (a.subset == "test") selected = select_courses(courses, split.test);
    else throw ValidationError("unknown subset '" + a.subset + "' (expected all, train, validation or test)");
  }

  const auto encoded = encode_courses(model, selected, records, false);
  const auto predicted = predict(model, encoded);

  std::unordered_map<std::string, const FeatureRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.course_id, &r);
  std::string csv_text = "course_id,prediction,actual\n";
  std::vector<double> actual, labeled_pred;
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    const auto rating = by_id.at(encoded[i].id)->rating(model.target);
    csv_text += csv::escape(encoded[i].id) + "," + csv::format_double(predicted[i]) + "," +
                (rating ? csv::format_double(*rating) : std::string()) + "\n";
    if (rating) {
      actual.push_back(*rating);
      labeled_pred.push_back(predicted[i]);
    }
  }
  write_text(a.out, csv_text);

  Manifest m("predict");
  m.inputs = {{"corpus", a.corpus}, {"features", a.features}, {"checkpoint", a.checkpoint}, {"subset", a.subset}};
  if (!a.split.empty()) m.inputs["split"] = a.split;
  m.outputs["predictions"] = a.out;
  if (!actual.empty()) {
    const fs::path metrics_path(a.out + ".metrics.json");
    const json metrics = {{"target", std::string(target_name(model.target))}, {"metrics", error_pair(actual, labeled_pred)}};
    write_text(metrics_path, metrics.dump(2) + "\n");
    m.outputs["metrics"] = metrics_path.string();
    out << metrics.dump(2) << '\n';
  }
  m.write(manifest_path(a.out));
  out << "wrote " << encoded.size() << " predictions to " << a.out << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"coursecue: verbal-cue features, structure modularity and hierarchical rating models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", COURSECUE_VERSION);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "generate a synthetic corpus");
  s->add_option("--config,--spec", synth.config, "generator spec JSON")->required();
  s->add_option("--out", synth.out, "output corpus JSONL")->required();
  s->add_option("--lexicons", synth.lexicons, "lexicon directory");
  s->add_option("--seed", synth.seed, "override the generator seed");

  FeaturesArgs feats;
  auto* f = app.add_subcommand("features", "extract the eight course features");
  f->add_option("--corpus", feats.corpus, "corpus JSONL")->required();
  f->add_option("--lexicons", feats.lexicons, "lexicon directory");
  f->add_option("--out", feats.out, "output CSV")->required();
  f->add_option("--embeddings", feats.embeddings, "JSONL of precomputed lecture vectors");
  f->add_option("--threads", feats.threads, "worker threads")->check(CLI::PositiveNumber);

  CorrelateArgs corr;
  auto* c = app.add_subcommand("correlate", "Pearson correlations of features with a rating");
  c->add_option("--features", corr.features, "features CSV")->required();
  c->add_option("--target", corr.target, "instructor or course");
  c->add_option("--out", corr.out, "output report CSV")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "train the hierarchical rating model");
  t->add_option("--corpus", tr.corpus, "corpus JSONL")->required();
  t->add_option("--features", tr.features, "features CSV")->required();
  t->add_option("--model-config", tr.model_config, "model config JSON");
  t->add_option("--train-config,--config", tr.train_config, "train config JSON");
  t->add_option("--target", tr.target, "instructor or course");
  t->add_option("--ablation", tr.ablation, "full, struc-course, course or lecture");
  t->add_option("--seed", tr.seed, "override the training seed");
  t->add_option("--split-seed", tr.split_seed, "seed of the 70/10/20 split");
  t->add_option("--split", tr.split, "reuse an existing split JSON");
  t->add_option("--resume", tr.resume, "initialize from a checkpoint");
  t->add_option("--out", tr.out, "output directory")->required();

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "score courses with a checkpoint");
  p->add_option("--corpus", pr.corpus, "corpus JSONL")->required();
  p->add_option("--features", pr.features, "features CSV")->required();
  p->add_option("--checkpoint", pr.checkpoint, "checkpoint file")->required();
  p->add_option("--out", pr.out, "output predictions CSV")->required();
  p->add_option("--split", pr.split, "split JSON");
  p->add_option("--subset", pr.subset, "all, train, validation or test");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << COURSECUE_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (*s) return cmd_synth(synth, out);
    if (*f) return cmd_features(feats, out);
    if (*c) return cmd_correlate(corr, out);
    if (*t) return cmd_train(tr, out);
    if (*p) return cmd_predict(pr, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace coursecue
