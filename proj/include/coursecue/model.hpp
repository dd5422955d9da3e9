// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "coursecue/autograd.hpp"
#include "coursecue/random.hpp"
#include "coursecue/tensor.hpp"
#include "coursecue/verbal_cues.hpp"
#include "json.hpp"

namespace coursecue {

/// Model variants. Each drops one more component than the previous:
/// StrucCourse has no extracted features, Course additionally has no
/// section/position embeddings, Lecture additionally has no global layers.
enum class Ablation { Full, StrucCourse, Course, Lecture };

Ablation parse_ablation(std::string_view name);  // full | struc-course | course | lecture
std::string_view ablation_name(Ablation ablation);

inline bool uses_features(Ablation a) { return a == Ablation::Full; }
inline bool uses_structure_embeddings(Ablation a) { return a == Ablation::Full || a == Ablation::StrucCourse; }
inline bool uses_global_layers(Ablation a) { return a != Ablation::Lecture; }

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t hidden = 32;
  std::size_t lecture_layers = 2;
  std::size_t lecture_heads = 4;
  std::size_t global_layers = 2;
  std::size_t global_heads = 4;
  std::size_t ffn_multiplier = 4;
  std::size_t max_lecture_tokens = 128;
  std::size_t max_sections = 8;
  std::size_t max_lecture_positions = 10;
  double dropout = 0.1;
  std::size_t feature_dim = kFeatureCount;
  Ablation ablation = Ablation::Full;

  static constexpr double kLayerNormEps = 1e-5;

  /// Throws ValidationError. vocab_size may be 0 until a vocabulary is built.
  void validate(bool require_vocab = true) const;
  std::size_t head_input_width() const { return hidden + (uses_features(ablation) ? feature_dim : 0); }

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static ModelConfig from_json(const nlohmann::json& j);
};

/// Named model tensors, ordered by name.
using ParameterSet = std::map<std::string, Tensor>;

/// Every tensor the configuration requires, with its shape.
std::map<std::string, std::vector<std::size_t>> expected_shapes(const ModelConfig& config);

/// Weight matrices and embedding tables ~ U(-1/sqrt(H), 1/sqrt(H)), each
/// drawn from its own stream derived from (seed, name); biases 0, gains 1.
ParameterSet init_parameters(const ModelConfig& config, std::uint64_t seed);

/// Throws ValidationError naming the first missing, extra, mis-shaped or
/// non-finite tensor.
void validate_parameters(const ParameterSet& params, const ModelConfig& config);

/// Maps parameters onto another variant: shared tensors are copied, the
/// head keeps its first H columns (feature block dropped or zero-filled),
/// tensors absent from `source` are freshly initialized from `seed`.
ParameterSet project_parameters(const ParameterSet& source, const ModelConfig& target, std::uint64_t seed);

/// One lecture ready for the encoder: token ids (CLS not included, already
/// truncated) and its 1-based section index and position.
struct EncodedLecture {
  std::vector<std::int32_t> token_ids;
  int section_index = 1;
  int position = 1;
};

struct EncodedCourse {
  std::string id;
  std::vector<EncodedLecture> lectures;
  /// Standardized extracted features.
  std::array<Scalar, kFeatureCount> features{};
  Scalar target = 0;
};

/// Parameter tensors bound into a graph.
class BoundParameters {
 public:
  /// Parameters become gradient leaves when `trainable`, constants otherwise.
  BoundParameters(Graph& graph, const ParameterSet& params, bool trainable);
  Var operator[](const std::string& name) const;
  bool contains(const std::string& name) const { return vars_.count(name) != 0; }
  const std::unordered_map<std::string, Var>& vars() const { return vars_; }

 private:
  std::unordered_map<std::string, Var> vars_;
};

/// Dropout randomness; absent in eval mode.
struct ForwardMode {
  Rng* dropout_rng = nullptr;
};

/// Post-norm transformer layer over stacked padded blocks:
///   h = LN(x + MHA(x)),  out = LN(h + FFN(h)).
/// `prefix` selects the tensors, e.g. "global.layer0".
Var transformer_layer(Graph& g, const BoundParameters& p, const std::string& prefix, const ModelConfig& config,
                      std::size_t heads, Var x, std::size_t block_len, std::span<const std::size_t> lengths,
                      ForwardMode mode);

/// Encodes `lecture_ids` lists (CLS prepended internally) and returns the CLS
/// outputs, one row per lecture.
Var encode_lectures(Graph& g, const BoundParameters& p, const ModelConfig& config,
                    std::span<const std::vector<std::int32_t>* const> lecture_ids, ForwardMode mode);

/// z = h + E^S[s] + E^LP[pi] with clipped indices, or z = h when the variant
/// has no structure embeddings. Rows of `h` are lectures in `lectures` order.
Var compose_lecture_repr(Graph& g, const BoundParameters& p, const ModelConfig& config, Var h,
                         std::span<const EncodedLecture* const> lectures);

/// Predictions for a batch of courses, [batch x 1].
Var forward_batch(Graph& g, const BoundParameters& p, const ModelConfig& config,
                  std::span<const EncodedCourse* const> courses, ForwardMode mode);

/// Eval-mode prediction for each course. Pure; safe to call concurrently.
std::vector<double> predict(const ParameterSet& params, const ModelConfig& config,
                            std::span<const EncodedCourse> courses, std::size_t batch_size = 16,
                            Trace* trace = nullptr);

/// Mean loss and its gradient with respect to every parameter.
struct LossAndGrad {
  double loss = 0;
  std::map<std::string, Tensor> grads;
};
LossAndGrad loss_and_grad(const ParameterSet& params, const ModelConfig& config,
                          std::span<const EncodedCourse* const> batch, ForwardMode mode);

}  // namespace coursecue
