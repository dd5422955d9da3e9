// SPDX-License-Identifier: Apache-2.0
#include "coursecue/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "coursecue/error.hpp"
#include "coursecue/vocabulary.hpp"

namespace coursecue {

Ablation parse_ablation(std::string_view name) {
  if (name == "full") return Ablation::Full;
  if (name == "struc-course") return Ablation::StrucCourse;
  if (name == "course") return Ablation::Course;
  if (name == "lecture") return Ablation::Lecture;
  throw ValidationError("unknown ablation '" + std::string(name) + "' (expected full, struc-course, course or lecture)");
}

std::string_view ablation_name(Ablation ablation) {
  switch (ablation) {
    case Ablation::Full: return "full";
    case Ablation::StrucCourse: return "struc-course";
    case Ablation::Course: return "course";
    case Ablation::Lecture: return "lecture";
  }
  return "full";
}

void ModelConfig::validate(bool require_vocab) const {
  auto fail = [](const std::string& what) { throw ValidationError("model config: " + what); };
  if (require_vocab && vocab_size <= Vocabulary::kReserved) fail("vocab_size must exceed the 3 reserved ids");
  if (hidden == 0) fail("hidden must be positive");
  if (lecture_heads == 0 || hidden % lecture_heads != 0) fail("hidden must be divisible by lecture_heads");
  if (uses_global_layers(ablation) && (global_heads == 0 || hidden % global_heads != 0)) {
    fail("hidden must be divisible by global_heads");
  }
  if (ffn_multiplier == 0) fail("ffn_multiplier must be positive");
  if (max_lecture_tokens == 0) fail("max_lecture_tokens must be positive");
  if (max_sections == 0 || max_lecture_positions == 0) fail("max_sections and max_lecture_positions must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must lie in [0, 1)");
  if (feature_dim != kFeatureCount) fail("feature_dim must be " + std::to_string(kFeatureCount));
}

nlohmann::json ModelConfig::to_json() const {
  return {{"vocab_size", vocab_size},
          {"hidden", hidden},
          {"lecture_layers", lecture_layers},
          {"lecture_heads", lecture_heads},
          {"global_layers", global_layers},
          {"global_heads", global_heads},
          {"ffn_multiplier", ffn_multiplier},
          {"max_lecture_tokens", max_lecture_tokens},
          {"max_sections", max_sections},
          {"max_lecture_positions", max_lecture_positions},
          {"dropout", dropout},
          {"feature_dim", feature_dim},
          {"ablation", std::string(ablation_name(ablation))}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("model config must be a JSON object");
  ModelConfig c;
  auto read_size = [&](const std::string& key, std::size_t& out) {
    const auto& v = j.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ValidationError("model config: '" + key + "' must be a nonnegative integer");
    }
    out = v.get<std::size_t>();
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "vocab_size") read_size(key, c.vocab_size);
    else if (key == "hidden") read_size(key, c.hidden);
    else if (key == "lecture_layers") read_size(key, c.lecture_layers);
    else if (key == "lecture_heads") read_size(key, c.lecture_heads);
    else if (key == "global_layers") read_size(key, c.global_layers);
    else if (key == "global_heads") read_size(key, c.global_heads);
    else if (key == "ffn_multiplier") read_size(key, c.ffn_multiplier);
    else if (key == "max_lecture_tokens") read_size(key, c.max_lecture_tokens);
    else if (key == "max_sections") read_size(key, c.max_sections);
    else if (key == "max_lecture_positions") read_size(key, c.max_lecture_positions);
    else if (key == "feature_dim") read_size(key, c.feature_dim);
    else if (key == "dropout") {
      if (!value.is_number()) throw ValidationError("model config: 'dropout' must be a number");
      c.dropout = value.get<double>();
    } else if (key == "ablation") {
      if (!value.is_string()) throw ValidationError("model config: 'ablation' must be a string");
      c.ablation = parse_ablation(value.get<std::string>());
    } else {
      throw ValidationError("model config: unknown key '" + key + "'");
    }
  }
  c.validate(false);
  return c;
}

namespace {

void add_layer_shapes(std::map<std::string, std::vector<std::size_t>>& shapes, const std::string& prefix,
                      std::size_t h, std::size_t f) {
  for (const char* proj : {"query", "key", "value", "output"}) {
    shapes[prefix + ".attention." + proj + ".weight"] = {h, h};
    shapes[prefix + ".attention." + proj + ".bias"] = {h};
  }
  shapes[prefix + ".attention_norm.gain"] = {h};
  shapes[prefix + ".attention_norm.bias"] = {h};
  shapes[prefix + ".ffn.input.weight"] = {f, h};
  shapes[prefix + ".ffn.input.bias"] = {f};
  shapes[prefix + ".ffn.output.weight"] = {h, f};
  shapes[prefix + ".ffn.output.bias"] = {h};
  shapes[prefix + ".ffn_norm.gain"] = {h};
  shapes[prefix + ".ffn_norm.bias"] = {h};
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

Tensor init_tensor(const std::string& name, const std::vector<std::size_t>& shape, std::size_t hidden,
                   std::uint64_t seed) {
  if (ends_with(name, ".bias")) return Tensor(shape, 0);
  if (ends_with(name, ".gain")) return Tensor(shape, 1);
  Tensor t(shape);
  Rng rng(derive_seed(seed, name));
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<Scalar>(rng.uniform(-bound, bound));
  return t;
}

}  // namespace

std::map<std::string, std::vector<std::size_t>> expected_shapes(const ModelConfig& c) {
  const std::size_t h = c.hidden, f = c.hidden * c.ffn_multiplier;
  std::map<std::string, std::vector<std::size_t>> shapes;
  shapes["lecture.token_embedding"] = {c.vocab_size, h};
  shapes["lecture.position_embedding"] = {c.max_lecture_tokens + 1, h};
  for (std::size_t i = 0; i < c.lecture_layers; ++i) add_layer_shapes(shapes, "lecture.layer" + std::to_string(i), h, f);
  if (uses_structure_embeddings(c.ablation)) {
    shapes["structure.section_embedding"] = {c.max_sections, h};
    shapes["structure.position_embedding"] = {c.max_lecture_positions, h};
  }
  if (uses_global_layers(c.ablation)) {
    shapes["global.course_cls"] = {h};
    for (std::size_t i = 0; i < c.global_layers; ++i) add_layer_shapes(shapes, "global.layer" + std::to_string(i), h, f);
  }
  shapes["head.weight"] = {1, c.head_input_width()};
  shapes["head.bias"] = {1};
  return shapes;
}

ParameterSet init_parameters(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ParameterSet params;
  for (const auto& [name, shape] : expected_shapes(config)) {
    params.emplace(name, init_tensor(name, shape, config.hidden, seed));
  }
  return params;
}

void validate_parameters(const ParameterSet& params, const ModelConfig& config) {
  const auto shapes = expected_shapes(config);
  for (const auto& [name, shape] : shapes) {
    auto it = params.find(name);
    if (it == params.end()) throw ValidationError("missing parameter tensor '" + name + "'");
    if (it->second.shape() != shape) {
      throw ValidationError("parameter '" + name + "' has shape " + it->second.shape_string() + ", expected " +
                            Tensor(shape).shape_string());
    }
    if (!it->second.all_finite()) throw ValidationError("parameter '" + name + "' contains non-finite values");
  }
  for (const auto& [name, tensor] : params) {
    if (!shapes.count(name)) {
      throw ValidationError("unexpected parameter tensor '" + name + "' for ablation " +
                            std::string(ablation_name(config.ablation)));
    }
  }
}

ParameterSet project_parameters(const ParameterSet& source, const ModelConfig& target, std::uint64_t seed) {
  ParameterSet fresh = init_parameters(target, seed);
  for (auto& [name, tensor] : fresh) {
    auto it = source.find(name);
    if (it == source.end()) continue;
    if (name == "head.weight") {
      const Tensor& from = it->second;
      const std::size_t n = std::min(from.cols(), tensor.cols());
      tensor.fill(0);
      std::copy_n(from.data(), std::min(n, target.hidden), tensor.data());
      if (n > target.hidden) std::copy(from.data() + target.hidden, from.data() + n, tensor.data() + target.hidden);
      continue;
    }
    if (!it->second.same_shape(tensor)) {
      throw ValidationError("cannot project parameter '" + name + "': shape " + it->second.shape_string() +
                            " vs " + tensor.shape_string());
    }
    tensor = it->second;
  }
  return fresh;
}

BoundParameters::BoundParameters(Graph& graph, const ParameterSet& params, bool trainable) {
  for (const auto& [name, tensor] : params) {
    vars_.emplace(name, trainable ? graph.parameter(name, tensor) : graph.constant(tensor));
  }
}

Var BoundParameters::operator[](const std::string& name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) throw ValidationError("parameter '" + name + "' is not bound");
  return it->second;
}

Var transformer_layer(Graph& g, const BoundParameters& p, const std::string& prefix, const ModelConfig& config,
                      std::size_t heads, Var x, std::size_t block_len, std::span<const std::size_t> lengths,
                      ForwardMode mode) {
  const Scalar drop = static_cast<Scalar>(config.dropout);
  const Scalar eps = static_cast<Scalar>(ModelConfig::kLayerNormEps);
  auto param = [&](const std::string& suffix) { return p[prefix + suffix]; };

  Var a = ops::dropout(g, x, drop, mode.dropout_rng);
  Var q = ops::linear(g, a, param(".attention.query.weight"), param(".attention.query.bias"));
  Var k = ops::linear(g, a, param(".attention.key.weight"), param(".attention.key.bias"));
  Var v = ops::linear(g, a, param(".attention.value.weight"), param(".attention.value.bias"));
  Var att = ops::attention(g, q, k, v, heads, block_len, lengths);
  Var o = ops::linear(g, ops::dropout(g, att, drop, mode.dropout_rng), param(".attention.output.weight"),
                      param(".attention.output.bias"));
  Var h = ops::layer_norm(g, ops::add(g, x, o), param(".attention_norm.gain"), param(".attention_norm.bias"), eps);

  Var f = ops::linear(g, ops::dropout(g, h, drop, mode.dropout_rng), param(".ffn.input.weight"),
                      param(".ffn.input.bias"));
  f = ops::relu(g, f);
  f = ops::linear(g, ops::dropout(g, f, drop, mode.dropout_rng), param(".ffn.output.weight"),
                  param(".ffn.output.bias"));
  return ops::layer_norm(g, ops::add(g, h, f), param(".ffn_norm.gain"), param(".ffn_norm.bias"), eps);
}

Var encode_lectures(Graph& g, const BoundParameters& p, const ModelConfig& config,
                    std::span<const std::vector<std::int32_t>* const> lecture_ids, ForwardMode mode) {
  if (lecture_ids.empty()) throw ValidationError("no lectures to encode");
  std::size_t longest = 0;
  for (const auto* ids : lecture_ids) longest = std::max(longest, std::min(ids->size(), config.max_lecture_tokens));
  const std::size_t L = longest + 1;
  const auto vocab = static_cast<std::int32_t>(config.vocab_size);

  std::vector<RowRef> token_rows(lecture_ids.size() * L, RowRef{-1, 0});
  std::vector<RowRef> position_rows(token_rows.size(), RowRef{-1, 0});
  std::vector<std::size_t> lengths(lecture_ids.size());
  for (std::size_t l = 0; l < lecture_ids.size(); ++l) {
    const auto& ids = *lecture_ids[l];
    const std::size_t len = std::min(ids.size(), config.max_lecture_tokens);
    lengths[l] = len + 1;
    token_rows[l * L] = RowRef{0, static_cast<std::uint32_t>(Vocabulary::kCls)};
    position_rows[l * L] = RowRef{0, 0};
    for (std::size_t t = 0; t < len; ++t) {
      const std::int32_t id = ids[t];
      if (id < 0 || id >= vocab) throw ValidationError("token id " + std::to_string(id) + " outside vocabulary");
      token_rows[l * L + t + 1] = RowRef{0, static_cast<std::uint32_t>(id)};
      position_rows[l * L + t + 1] = RowRef{0, static_cast<std::uint32_t>(t + 1)};
    }
  }
  const Var tok = p["lecture.token_embedding"];
  const Var pos = p["lecture.position_embedding"];
  Var x = ops::add(g, ops::gather_rows(g, std::span<const Var>(&tok, 1), token_rows),
                   ops::gather_rows(g, std::span<const Var>(&pos, 1), position_rows));
  for (std::size_t i = 0; i < config.lecture_layers; ++i) {
    x = transformer_layer(g, p, "lecture.layer" + std::to_string(i), config, config.lecture_heads, x, L, lengths, mode);
  }
  std::vector<RowRef> cls_rows(lecture_ids.size());
  for (std::size_t l = 0; l < lecture_ids.size(); ++l) cls_rows[l] = RowRef{0, static_cast<std::uint32_t>(l * L)};
  return ops::gather_rows(g, std::span<const Var>(&x, 1), cls_rows);
}

Var compose_lecture_repr(Graph& g, const BoundParameters& p, const ModelConfig& config, Var h,
                         std::span<const EncodedLecture* const> lectures) {
  if (!uses_structure_embeddings(config.ablation)) return h;
  std::vector<RowRef> section_rows(lectures.size()), position_rows(lectures.size());
  for (std::size_t l = 0; l < lectures.size(); ++l) {
    const EncodedLecture& lec = *lectures[l];
    if (lec.section_index < 1 || lec.position < 1) throw ValidationError("section index and position must be >= 1");
    const std::size_t s = std::min<std::size_t>(static_cast<std::size_t>(lec.section_index), config.max_sections);
    const std::size_t pi = std::min<std::size_t>(static_cast<std::size_t>(lec.position), config.max_lecture_positions);
    section_rows[l] = RowRef{0, static_cast<std::uint32_t>(s - 1)};
    position_rows[l] = RowRef{0, static_cast<std::uint32_t>(pi - 1)};
  }
  const Var se = p["structure.section_embedding"];
  const Var pe = p["structure.position_embedding"];
  Var z = ops::add(g, h, ops::gather_rows(g, std::span<const Var>(&se, 1), section_rows));
  return ops::add(g, z, ops::gather_rows(g, std::span<const Var>(&pe, 1), position_rows));
}

Var forward_batch(Graph& g, const BoundParameters& p, const ModelConfig& config,
                  std::span<const EncodedCourse* const> courses, ForwardMode mode) {
  if (courses.empty()) throw ValidationError("empty batch");
  std::vector<const std::vector<std::int32_t>*> ids;
  std::vector<const EncodedLecture*> lectures;
  std::vector<std::pair<std::size_t, std::size_t>> segments;
  std::size_t most_lectures = 0;
  for (const EncodedCourse* course : courses) {
    if (course->lectures.empty()) throw ValidationError("course '" + course->id + "' has no lectures");
    segments.emplace_back(lectures.size(), lectures.size() + course->lectures.size());
    most_lectures = std::max(most_lectures, course->lectures.size());
    for (const auto& lec : course->lectures) {
      ids.push_back(&lec.token_ids);
      lectures.push_back(&lec);
    }
  }

  Var h = encode_lectures(g, p, config, ids, mode);
  Var repr;
  if (uses_global_layers(config.ablation)) {
    Var z = compose_lecture_repr(g, p, config, h, lectures);
    const std::size_t G = most_lectures + 1;
    std::vector<RowRef> rows(courses.size() * G, RowRef{-1, 0});
    std::vector<std::size_t> lengths(courses.size());
    for (std::size_t b = 0; b < courses.size(); ++b) {
      const auto [begin, end] = segments[b];
      lengths[b] = end - begin + 1;
      rows[b * G] = RowRef{1, 0};
      for (std::size_t j = begin; j < end; ++j) rows[b * G + 1 + (j - begin)] = RowRef{0, static_cast<std::uint32_t>(j)};
    }
    const Var sources[] = {z, p["global.course_cls"]};
    Var x = ops::gather_rows(g, sources, rows);
    for (std::size_t i = 0; i < config.global_layers; ++i) {
      x = transformer_layer(g, p, "global.layer" + std::to_string(i), config, config.global_heads, x, G, lengths, mode);
    }
    std::vector<RowRef> cls_rows(courses.size());
    for (std::size_t b = 0; b < courses.size(); ++b) cls_rows[b] = RowRef{0, static_cast<std::uint32_t>(b * G)};
    repr = ops::gather_rows(g, std::span<const Var>(&x, 1), cls_rows);
  } else {
    repr = ops::segment_mean(g, h, segments);
  }

  repr = ops::dropout(g, repr, static_cast<Scalar>(config.dropout), mode.dropout_rng);
  if (uses_features(config.ablation)) {
    Tensor feats = Tensor::matrix(courses.size(), config.feature_dim);
    for (std::size_t b = 0; b < courses.size(); ++b) {
      std::copy(courses[b]->features.begin(), courses[b]->features.end(), feats.row(b));
    }
    repr = ops::concat_cols(g, repr, g.constant(std::move(feats)));
  }
  return ops::linear(g, repr, p["head.weight"], p["head.bias"]);
}

std::vector<double> predict(const ParameterSet& params, const ModelConfig& config,
                            std::span<const EncodedCourse> courses, std::size_t batch_size, Trace* trace) {
  if (batch_size == 0) throw ValidationError("batch size must be positive");
  std::vector<double> out;
  out.reserve(courses.size());
  for (std::size_t start = 0; start < courses.size(); start += batch_size) {
    const std::size_t end = std::min(courses.size(), start + batch_size);
    std::vector<const EncodedCourse*> batch;
    for (std::size_t i = start; i < end; ++i) batch.push_back(&courses[i]);
    Graph g;
    g.trace = trace;
    BoundParameters p(g, params, false);
    const Tensor& y = g.value(forward_batch(g, p, config, batch, ForwardMode{}));
    for (std::size_t i = 0; i < y.size(); ++i) out.push_back(static_cast<double>(y[i]));
  }
  return out;
}

LossAndGrad loss_and_grad(const ParameterSet& params, const ModelConfig& config,
                          std::span<const EncodedCourse* const> batch, ForwardMode mode) {
  Graph g;
  BoundParameters p(g, params, true);
  Var pred = forward_batch(g, p, config, batch, mode);
  std::vector<Scalar> targets;
  targets.reserve(batch.size());
  for (const EncodedCourse* c : batch) targets.push_back(c->target);
  Var loss = ops::mse(g, pred, targets);
  g.backward(loss);
  LossAndGrad result;
  result.loss = static_cast<double>(g.value(loss)[0]);
  for (const auto& [name, var] : g.parameters()) {
    result.grads.emplace(name, g.has_grad(var) ? g.grad(var) : Tensor(g.value(var).shape()));
  }
  return result;
}

}  // namespace coursecue
