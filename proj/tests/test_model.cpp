// SPDX-License-Identifier: Apache-2.0
#include "coursecue/model.hpp"

#include <cmath>
#include <functional>

#include "coursecue/error.hpp"
#include "coursecue/vocabulary.hpp"
#include "doctest.h"

using namespace coursecue;

namespace {

using Mat = std::vector<std::vector<double>>;

// Straight-line dense re-implementation, one course at a time, no padding.
struct Oracle {
  const ParameterSet& p;
  const ModelConfig& c;

  const Tensor& t(const std::string& name) const { return p.at(name); }

  Mat linear(const Mat& x, const std::string& prefix) const {
    const Tensor& w = t(prefix + ".weight");
    const Tensor& b = t(prefix + ".bias");
    Mat y(x.size(), std::vector<double>(w.rows(), 0.0));
    for (std::size_t r = 0; r < x.size(); ++r)
      for (std::size_t o = 0; o < w.rows(); ++o) {
        double s = b[o];
        for (std::size_t i = 0; i < w.cols(); ++i) s += x[r][i] * w(o, i);
        y[r][o] = s;
      }
    return y;
  }

  Mat norm(const Mat& x, const std::string& prefix) const {
    const Tensor& gain = t(prefix + ".gain");
    const Tensor& bias = t(prefix + ".bias");
    Mat y = x;
    for (auto& row : y) {
      double mean = 0.0, var = 0.0;
      for (double v : row) mean += v;
      mean /= row.size();
      for (double v : row) var += (v - mean) * (v - mean);
      var /= row.size();
      for (std::size_t i = 0; i < row.size(); ++i)
        row[i] = (row[i] - mean) / std::sqrt(var + ModelConfig::kLayerNormEps) * gain[i] + bias[i];
    }
    return y;
  }

  static Mat add(Mat a, const Mat& b) {
    for (std::size_t r = 0; r < a.size(); ++r)
      for (std::size_t i = 0; i < a[r].size(); ++i) a[r][i] += b[r][i];
    return a;
  }

  Mat layer(const Mat& x, const std::string& prefix, std::size_t heads) const {
    const Mat q = linear(x, prefix + ".attention.query"), k = linear(x, prefix + ".attention.key"),
              v = linear(x, prefix + ".attention.value");
    const std::size_t n = x.size(), width = q[0].size(), d = width / heads;
    Mat att(n, std::vector<double>(width, 0.0));
    for (std::size_t h = 0; h < heads; ++h)
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> logits(n);
        double top = -1e300;
        for (std::size_t j = 0; j < n; ++j) {
          double s = 0.0;
          for (std::size_t e = 0; e < d; ++e) s += q[i][h * d + e] * k[j][h * d + e];
          logits[j] = s / std::sqrt(static_cast<double>(d));
          top = std::max(top, logits[j]);
        }
        double z = 0.0;
        for (auto& l : logits) z += (l = std::exp(l - top));
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t e = 0; e < d; ++e) att[i][h * d + e] += logits[j] / z * v[j][h * d + e];
      }
    const Mat h = norm(add(x, linear(att, prefix + ".attention.output")), prefix + ".attention_norm");
    Mat f = linear(h, prefix + ".ffn.input");
    for (auto& row : f)
      for (auto& e : row) e = std::max(0.0, e);
    return norm(add(h, linear(f, prefix + ".ffn.output")), prefix + ".ffn_norm");
  }

  std::vector<double> row_of(const std::string& name, std::size_t r) const {
    const Tensor& m = t(name);
    return std::vector<double>(m.row(r), m.row(r) + m.cols());
  }

  std::vector<double> lecture(const EncodedLecture& lec) const {
    const std::size_t len = std::min(lec.token_ids.size(), c.max_lecture_tokens);
    Mat x;
    x.push_back(row_of("lecture.token_embedding", Vocabulary::kCls));
    for (std::size_t i = 0; i < len; ++i) x.push_back(row_of("lecture.token_embedding", lec.token_ids[i]));
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto pos = row_of("lecture.position_embedding", i);
      for (std::size_t e = 0; e < pos.size(); ++e) x[i][e] += pos[e];
    }
    for (std::size_t l = 0; l < c.lecture_layers; ++l) x = layer(x, "lecture.layer" + std::to_string(l), c.lecture_heads);
    return x[0];
  }

  double operator()(const EncodedCourse& course) const {
    std::vector<double> repr(c.hidden, 0.0);
    if (uses_global_layers(c.ablation)) {
      Mat x{std::vector<double>(t("global.course_cls").data(), t("global.course_cls").data() + c.hidden)};
      for (const auto& lec : course.lectures) {
        auto z = lecture(lec);
        if (uses_structure_embeddings(c.ablation)) {
          const auto s = row_of("structure.section_embedding", std::min<std::size_t>(lec.section_index, 8) - 1);
          const auto pi = row_of("structure.position_embedding", std::min<std::size_t>(lec.position, 10) - 1);
          for (std::size_t e = 0; e < z.size(); ++e) z[e] += s[e] + pi[e];
        }
        x.push_back(z);
      }
      for (std::size_t l = 0; l < c.global_layers; ++l) x = layer(x, "global.layer" + std::to_string(l), c.global_heads);
      repr = x[0];
    } else {
      for (const auto& lec : course.lectures) {
        const auto h = lecture(lec);
        for (std::size_t e = 0; e < h.size(); ++e) repr[e] += h[e] / course.lectures.size();
      }
    }
    if (uses_features(c.ablation)) repr.insert(repr.end(), course.features.begin(), course.features.end());
    const Tensor& w = t("head.weight");
    double y = t("head.bias")[0];
    for (std::size_t i = 0; i < repr.size(); ++i) y += w[i] * repr[i];
    return y;
  }
};

ModelConfig small_config(Ablation ablation) {
  ModelConfig c;
  c.vocab_size = 20;
  c.hidden = 8;
  c.lecture_layers = 1;
  c.lecture_heads = 2;
  c.global_layers = 2;
  c.global_heads = 2;
  c.ffn_multiplier = 2;
  c.max_lecture_tokens = 6;
  c.dropout = 0.1;
  c.ablation = ablation;
  return c;
}

std::vector<EncodedCourse> random_courses(std::size_t n, std::uint64_t seed, const ModelConfig& config) {
  Rng rng(seed);
  std::vector<EncodedCourse> out;
  for (std::size_t i = 0; i < n; ++i) {
    EncodedCourse course;
    course.id = "c" + std::to_string(i);
    const std::size_t sections = 1 + rng.index(4);
    for (std::size_t s = 1; s <= sections; ++s) {
      const std::size_t lectures = 1 + rng.index(3);
      for (std::size_t l = 1; l <= lectures; ++l) {
        EncodedLecture lec;
        lec.section_index = static_cast<int>(s);
        lec.position = static_cast<int>(l);
        const std::size_t len = rng.index(config.max_lecture_tokens + 3);
        for (std::size_t t = 0; t < len; ++t) lec.token_ids.push_back(static_cast<std::int32_t>(1 + rng.index(config.vocab_size - 1)));
        course.lectures.push_back(lec);
      }
    }
    for (auto& f : course.features) f = static_cast<Scalar>(rng.normal());
    course.target = static_cast<Scalar>(rng.uniform(0, 5));
    out.push_back(course);
  }
  return out;
}

// Non-unit gains and nonzero biases so the oracle exercises every tensor.
ParameterSet perturbed_parameters(const ModelConfig& config, std::uint64_t seed) {
  ParameterSet p = init_parameters(config, seed);
  Rng rng(seed + 1);
  for (auto& [name, t] : p) {
    if (name.ends_with(".bias") || name.ends_with(".gain")) {
      for (auto& v : t.values()) v += static_cast<Scalar>(rng.uniform(-0.3, 0.3));
    }
  }
  return p;
}

const Ablation kAll[] = {Ablation::Full, Ablation::StrucCourse, Ablation::Course, Ablation::Lecture};

}  // namespace

TEST_SUITE("model config") {
  TEST_CASE("json round trip and strict keys") {
    ModelConfig c = small_config(Ablation::Course);
    const ModelConfig back = ModelConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());
    auto j = c.to_json();
    j["hiden"] = 4;
    CHECK_THROWS_WITH_AS(ModelConfig::from_json(j), doctest::Contains("hiden"), ValidationError);
  }

  TEST_CASE("hidden must be divisible by the head counts") {
    ModelConfig c = small_config(Ablation::Full);
    c.lecture_heads = 3;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = small_config(Ablation::Lecture);
    c.global_heads = 3;
    CHECK_NOTHROW(c.validate());
  }

  TEST_CASE("defaults") {
    const ModelConfig c;
    CHECK(c.max_sections == 8);
    CHECK(c.max_lecture_positions == 10);
    CHECK(c.global_layers == 2);
    CHECK(c.dropout == 0.1);
    CHECK(c.feature_dim == 8);
  }

  TEST_CASE("ablation names") {
    for (Ablation a : kAll) CHECK(parse_ablation(ablation_name(a)) == a);
    CHECK_THROWS_AS(parse_ablation("bert"), ValidationError);
  }
}

TEST_SUITE("parameters") {
  TEST_CASE("ablation lattice shapes") {
    const auto full = expected_shapes(small_config(Ablation::Full));
    const auto struc = expected_shapes(small_config(Ablation::StrucCourse));
    const auto course = expected_shapes(small_config(Ablation::Course));
    const auto lecture = expected_shapes(small_config(Ablation::Lecture));
    CHECK(full.at("head.weight") == std::vector<std::size_t>{1, 16});
    CHECK(struc.at("head.weight") == std::vector<std::size_t>{1, 8});
    CHECK(full.at("structure.section_embedding") == std::vector<std::size_t>{8, 8});
    CHECK(full.at("structure.position_embedding") == std::vector<std::size_t>{10, 8});
    // StrucCourse is Full minus the feature block of the head.
    for (const auto& [name, shape] : full) {
      REQUIRE(struc.count(name));
      if (name != "head.weight") CHECK(struc.at(name) == shape);
    }
    CHECK(struc.size() == full.size());
    for (const auto& [name, shape] : course) {
      CHECK(name.rfind("structure.", 0) != 0);
      CHECK(struc.at(name) == shape);
    }
    CHECK(course.size() == struc.size() - 2);
    for (const auto& [name, shape] : lecture) {
      CHECK(name.rfind("structure.", 0) != 0);
      CHECK(name.rfind("global.", 0) != 0);
    }
  }

  TEST_CASE("initialization is seeded per tensor name") {
    const auto a = init_parameters(small_config(Ablation::Full), 7);
    const auto b = init_parameters(small_config(Ablation::Full), 7);
    const auto c = init_parameters(small_config(Ablation::Full), 8);
    const auto lec = init_parameters(small_config(Ablation::Lecture), 7);
    for (const auto& [name, t] : a) {
      CHECK(t.values().size() == b.at(name).values().size());
      CHECK(std::equal(t.values().begin(), t.values().end(), b.at(name).values().begin()));
      if (lec.count(name) && name != "head.weight") {
        CHECK(std::equal(t.values().begin(), t.values().end(), lec.at(name).values().begin()));
      }
      if (name.ends_with(".bias")) {
        for (Scalar v : t.values()) CHECK(v == 0);
      } else if (name.ends_with(".gain")) {
        for (Scalar v : t.values()) CHECK(v == 1);
      } else {
        CHECK_FALSE(std::equal(t.values().begin(), t.values().end(), c.at(name).values().begin()));
        for (Scalar v : t.values()) CHECK(std::abs(v) <= 1.0 / std::sqrt(8.0));
      }
    }
  }

  TEST_CASE("validation reports missing, unexpected and misshapen tensors") {
    const ModelConfig full = small_config(Ablation::Full);
    auto p = init_parameters(full, 1);
    CHECK_NOTHROW(validate_parameters(p, full));
    auto q = p;
    q["head.weight"] = Tensor::matrix(1, 8);
    CHECK_NOTHROW(validate_parameters(q, small_config(Ablation::StrucCourse)));
    CHECK_THROWS_WITH_AS(validate_parameters(q, small_config(Ablation::Lecture)), doctest::Contains("unexpected"),
                         ValidationError);
    q = p;
    q.erase("global.course_cls");
    CHECK_THROWS_WITH_AS(validate_parameters(q, full), doctest::Contains("global.course_cls"), ValidationError);
    q = p;
    q["head.weight"] = Tensor::matrix(1, 8);
    CHECK_THROWS_WITH_AS(validate_parameters(q, full), doctest::Contains("head.weight"), ValidationError);
    q = p;
    q["head.bias"][0] = std::nan("");
    CHECK_THROWS_WITH_AS(validate_parameters(q, full), doctest::Contains("non-finite"), ValidationError);
  }

  TEST_CASE("projection keeps shared tensors and the representation block of the head") {
    const ModelConfig full = small_config(Ablation::Full);
    const ModelConfig course = small_config(Ablation::Course);
    const auto p = perturbed_parameters(full, 3);
    const auto down = project_parameters(p, course, 9);
    validate_parameters(down, course);
    for (const auto& [name, t] : down) {
      if (name == "head.weight") {
        for (std::size_t i = 0; i < 8; ++i) CHECK(t[i] == p.at(name)[i]);
      } else {
        CHECK(std::equal(t.values().begin(), t.values().end(), p.at(name).values().begin()));
      }
    }
    const auto up = project_parameters(down, full, 9);
    validate_parameters(up, full);
    for (std::size_t i = 0; i < 8; ++i) CHECK(up.at("head.weight")[i] == p.at("head.weight")[i]);
    for (std::size_t i = 8; i < 16; ++i) CHECK(up.at("head.weight")[i] == 0);
    const auto round = project_parameters(p, full, 9);
    CHECK(std::equal(round.at("head.weight").values().begin(), round.at("head.weight").values().end(),
                     p.at("head.weight").values().begin()));
    ModelConfig wider = full;
    wider.hidden = 16;
    CHECK_THROWS_AS(project_parameters(p, wider, 1), ValidationError);
  }
}

TEST_SUITE("forward") {
  TEST_CASE("batched forward equals the straight-line oracle for every ablation") {
    for (Ablation a : kAll) {
      CAPTURE(ablation_name(a));
      const ModelConfig config = small_config(a);
      const auto params = perturbed_parameters(config, 11);
      const auto courses = random_courses(9, 5, config);
      const auto got = predict(params, config, courses, 4);
      const Oracle oracle{params, config};
      for (std::size_t i = 0; i < courses.size(); ++i) CHECK(std::abs(got[i] - oracle(courses[i])) < 1e-10);
    }
  }

  TEST_CASE("prediction of a course does not depend on its batch companions") {
    const ModelConfig config = small_config(Ablation::Full);
    const auto params = perturbed_parameters(config, 2);
    const auto courses = random_courses(7, 6, config);
    const auto batched = predict(params, config, courses, 7);
    const auto single = predict(params, config, courses, 1);
    for (std::size_t i = 0; i < courses.size(); ++i) CHECK(std::abs(batched[i] - single[i]) < 1e-12);
  }

  TEST_CASE("zero head weight gives the bias everywhere") {
    for (Ablation a : kAll) {
      const ModelConfig config = small_config(a);
      auto params = init_parameters(config, 4);
      params["head.weight"].fill(0);
      params["head.bias"][0] = Scalar(3.7);
      for (double y : predict(params, config, random_courses(5, 1, config))) CHECK(y == doctest::Approx(3.7).epsilon(1e-15));
    }
  }

  TEST_CASE("zeroed structure tables and feature block reduce Full to Course") {
    const ModelConfig full = small_config(Ablation::Full);
    const ModelConfig course = small_config(Ablation::Course);
    auto params = perturbed_parameters(full, 12);
    params["structure.section_embedding"].fill(0);
    params["structure.position_embedding"].fill(0);
    for (std::size_t i = full.hidden; i < full.head_input_width(); ++i) params["head.weight"][i] = 0;
    const auto reduced = project_parameters(params, course, 0);
    const auto courses = random_courses(50, 13, full);
    const auto a = predict(params, full, courses);
    const auto b = predict(reduced, course, courses);
    for (std::size_t i = 0; i < courses.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
  }

  TEST_CASE("structure embeddings change the Full prediction") {
    const ModelConfig full = small_config(Ablation::Full);
    auto params = perturbed_parameters(full, 14);
    const auto courses = random_courses(10, 2, full);
    const auto before = predict(params, full, courses);
    params["structure.section_embedding"].fill(0);
    const auto after = predict(params, full, courses);
    double diff = 0.0;
    for (std::size_t i = 0; i < courses.size(); ++i) diff += std::abs(before[i] - after[i]);
    CHECK(diff > 1e-6);
  }

  TEST_CASE("lecture order does not matter when labels travel with the lectures") {
    for (Ablation a : kAll) {
      const ModelConfig config = small_config(a);
      const auto params = perturbed_parameters(config, 15);
      auto courses = random_courses(6, 3, config);
      const auto base = predict(params, config, courses);
      Rng rng(1);
      for (auto& c : courses) rng.shuffle(c.lectures);
      const auto shuffled = predict(params, config, courses);
      for (std::size_t i = 0; i < courses.size(); ++i) CHECK(std::abs(base[i] - shuffled[i]) < 1e-10);
    }
  }

  TEST_CASE("section and position indices are clipped to the table sizes") {
    const ModelConfig config = small_config(Ablation::Full);
    const auto params = perturbed_parameters(config, 16);
    auto courses = random_courses(3, 4, config);
    auto clipped = courses;
    for (auto& c : courses)
      for (auto& l : c.lectures) {
        l.section_index = 8;
        l.position = 10;
      }
    for (auto& c : clipped)
      for (auto& l : c.lectures) {
        l.section_index = 12;
        l.position = 15;
      }
    const auto a = predict(params, config, courses);
    const auto b = predict(params, config, clipped);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }

  TEST_CASE("lectures are truncated to the token limit") {
    const ModelConfig config = small_config(Ablation::Course);
    const auto params = perturbed_parameters(config, 17);
    auto courses = random_courses(2, 5, config);
    for (auto& c : courses)
      for (auto& l : c.lectures) l.token_ids.assign(config.max_lecture_tokens, 5);
    auto longer = courses;
    for (auto& c : longer)
      for (auto& l : c.lectures) l.token_ids.insert(l.token_ids.end(), {7, 8, 9});
    const auto a = predict(params, config, courses);
    const auto b = predict(params, config, longer);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }

  TEST_CASE("attention rows and layer norm statistics hold on the forward pass") {
    const ModelConfig config = small_config(Ablation::Full);
    Trace trace;
    predict(perturbed_parameters(config, 18), config, random_courses(20, 7, config), 8, &trace);
    CHECK(trace.attention_rows > 0);
    CHECK(trace.max_attention_row_error < 1e-12);
    CHECK(trace.layer_norm_rows > 0);
    CHECK(trace.max_layer_norm_mean < 1e-12);
    CHECK(trace.max_layer_norm_variance_error < 1e-10);
  }

  TEST_CASE("invalid inputs") {
    const ModelConfig config = small_config(Ablation::Full);
    const auto params = init_parameters(config, 1);
    auto courses = random_courses(1, 1, config);
    courses[0].lectures[0].token_ids = {static_cast<std::int32_t>(config.vocab_size)};
    CHECK_THROWS_AS(predict(params, config, courses), ValidationError);
    courses = random_courses(1, 1, config);
    courses[0].lectures[0].section_index = 0;
    CHECK_THROWS_AS(predict(params, config, courses), ValidationError);
    courses[0].lectures.clear();
    CHECK_THROWS_AS(predict(params, config, courses), ValidationError);
    CHECK_THROWS_AS(predict(params, config, random_courses(1, 1, config), 0), ValidationError);
  }

  TEST_CASE("zero-parameter smoke") {
    for (Ablation a : kAll) {
      const ModelConfig config = small_config(a);
      ParameterSet params = init_parameters(config, 1);
      for (auto& [name, t] : params) t.fill(0);
      std::vector<EncodedCourse> courses = random_courses(3, 9, config);
      for (double y : predict(params, config, courses)) CHECK(y == 0.0);
    }
  }
}

TEST_SUITE("model gradients") {
  // Central differences on every parameter entry against the tape.
  void check_model_gradient(const ModelConfig& config, bool with_dropout) {
    auto params = perturbed_parameters(config, 21);
    const auto courses = random_courses(3, 22, config);
    std::vector<const EncodedCourse*> batch;
    for (const auto& c : courses) batch.push_back(&c);
    auto loss = [&](const ParameterSet& p, bool grads) {
      Rng rng(5);
      ForwardMode mode{with_dropout ? &rng : nullptr};
      if (grads) return loss_and_grad(p, config, batch, mode);
      Graph g;
      BoundParameters bound(g, p, false);
      Var pred = forward_batch(g, bound, config, batch, mode);
      std::vector<Scalar> targets;
      for (const auto* c : batch) targets.push_back(c->target);
      return LossAndGrad{g.value(ops::mse(g, pred, targets))[0], {}};
    };
    const LossAndGrad analytic = loss(params, true);
    REQUIRE(analytic.grads.size() == params.size());
    const double h = 1e-6;
    double worst = 0.0;
    std::string worst_name;
    for (auto& [name, t] : params) {
      for (std::size_t i = 0; i < t.size(); ++i) {
        const Scalar saved = t[i];
        t[i] = saved + h;
        const double up = loss(params, false).loss;
        t[i] = saved - h;
        const double down = loss(params, false).loss;
        t[i] = saved;
        const double numeric = (up - down) / (2 * h);
        const double err = std::abs(numeric - analytic.grads.at(name)[i]) / std::max(1.0, std::abs(numeric));
        if (err > worst) {
          worst = err;
          worst_name = name;
        }
      }
    }
    CAPTURE(worst_name);
    CHECK(worst < 1e-6);
  }

  TEST_CASE("full") { check_model_gradient(small_config(Ablation::Full), false); }
  TEST_CASE("struc-course") { check_model_gradient(small_config(Ablation::StrucCourse), false); }
  TEST_CASE("course") { check_model_gradient(small_config(Ablation::Course), false); }
  TEST_CASE("lecture") { check_model_gradient(small_config(Ablation::Lecture), false); }
  TEST_CASE("full with a fixed dropout mask") { check_model_gradient(small_config(Ablation::Full), true); }
}

TEST_SUITE("vocabulary") {
  TEST_CASE("reserved ids and frequency order") {
    const Course c = make_course_from_texts("c", {{"b a b c", "a b"}});
    const std::vector<const Course*> courses{&c};
    const Vocabulary v = Vocabulary::build(courses, 128);
    CHECK(v.size() == 6);
    CHECK(v.token(Vocabulary::kPad) == "[PAD]");
    CHECK(v.id("b") == 3);
    CHECK(v.id("a") == 4);
    CHECK(v.id("c") == 5);
    CHECK(v.id("zzz") == Vocabulary::kUnk);
  }

  TEST_CASE("only the truncated prefix of each lecture is counted") {
    const Course c = make_course_from_texts("c", {{"x y later later later"}});
    const std::vector<const Course*> courses{&c};
    const Vocabulary v = Vocabulary::build(courses, 2);
    CHECK(v.size() == 5);
    CHECK(v.id("later") == Vocabulary::kUnk);
  }

  TEST_CASE("json round trip") {
    const Vocabulary v(std::vector<std::string>{"alpha", "beta"});
    const Vocabulary back = Vocabulary::from_json(v.to_json());
    CHECK(back.size() == v.size());
    CHECK(back.id("beta") == v.id("beta"));
    CHECK_THROWS_AS(Vocabulary::from_json(nlohmann::json::array({"a", "a"})), ValidationError);
  }
}
