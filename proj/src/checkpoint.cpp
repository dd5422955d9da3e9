// SPDX-License-Identifier: Apache-2.0
#include "coursecue/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "coursecue/error.hpp"

namespace coursecue {
namespace {

constexpr char kMagic[8] = {'C', 'C', 'U', 'E', 'C', 'K', 'P', 'T'};
constexpr std::uint64_t kMaxHeader = std::uint64_t{1} << 32;

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
  return r;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  v = to_le(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f64(std::ostream& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

class Reader {
 public:
  Reader(std::istream& in, const std::filesystem::path& path) : in_(in), path_(path) {}

  void bytes(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail("truncated file");
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    bytes(reinterpret_cast<char*>(&v), sizeof v);
    return to_le(v);
  }
  double f64() { return std::bit_cast<double>(u64()); }
  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError("checkpoint " + path_.string() + ": " + what);
  }

 private:
  std::istream& in_;
  const std::filesystem::path& path_;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const TrainedModel& model) {
  validate_parameters(model.params, model.config);
  nlohmann::json header = {{"format_version", kCheckpointFormatVersion},
                           {"model_config", model.config.to_json()},
                           {"target", std::string(target_name(model.target))},
                           {"vocabulary", model.vocabulary.to_json()},
                           {"feature_standardization", model.standardizer.to_json()}};
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof kMagic);
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  put_u64(out, model.params.size());
  for (const auto& [name, tensor] : model.params) {
    put_u64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u64(out, tensor.rank());
    for (std::size_t d : tensor.shape()) put_u64(out, d);
    for (std::size_t i = 0; i < tensor.size(); ++i) put_f64(out, static_cast<double>(tensor[i]));
  }
  if (!out) throw ValidationError("failed writing checkpoint " + path.string());
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  Reader r(in, path);
  char magic[sizeof kMagic];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) r.fail("not a coursecue checkpoint");
  const std::uint64_t header_len = r.u64();
  if (header_len > kMaxHeader) r.fail("implausible header length");
  std::string text(header_len, '\0');
  r.bytes(text.data(), text.size());

  TrainedModel model;
  try {
    const nlohmann::json header = nlohmann::json::parse(text);
    if (header.at("format_version").get<int>() != kCheckpointFormatVersion) r.fail("unsupported format_version");
    model.config = ModelConfig::from_json(header.at("model_config"));
    model.target = parse_target(header.at("target").get<std::string>());
    model.vocabulary = Vocabulary::from_json(header.at("vocabulary"));
    model.standardizer = FeatureStandardizer::from_json(header.at("feature_standardization"));
  } catch (const nlohmann::json::exception& e) {
    r.fail(std::string("malformed header: ") + e.what());
  }
  model.config.validate();
  if (model.vocabulary.size() != model.config.vocab_size) r.fail("vocabulary size disagrees with model_config");

  const auto shapes = expected_shapes(model.config);
  const std::uint64_t count = r.u64();
  if (count > shapes.size()) r.fail("more tensors than the configuration defines");
  for (std::uint64_t t = 0; t < count; ++t) {
    const std::uint64_t name_len = r.u64();
    if (name_len > 4096) r.fail("implausible tensor name length");
    std::string name(name_len, '\0');
    r.bytes(name.data(), name.size());
    auto expected = shapes.find(name);
    if (expected == shapes.end()) r.fail("unexpected tensor '" + name + "'");
    const std::uint64_t rank = r.u64();
    if (rank != expected->second.size()) r.fail("tensor '" + name + "' has the wrong rank");
    std::vector<std::size_t> dims(rank);
    for (auto& d : dims) d = static_cast<std::size_t>(r.u64());
    if (dims != expected->second) r.fail("tensor '" + name + "' has shape " + Tensor(dims).shape_string());
    Tensor tensor(dims);
    for (std::size_t i = 0; i < tensor.size(); ++i) tensor[i] = static_cast<Scalar>(r.f64());
    model.params.emplace(std::move(name), std::move(tensor));
  }
  if (in.peek() != std::char_traits<char>::eof()) r.fail("trailing bytes");
  validate_parameters(model.params, model.config);
  return model;
}

}  // namespace coursecue
