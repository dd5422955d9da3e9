// SPDX-License-Identifier: Apache-2.0
#include "coursecue/structure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "coursecue/error.hpp"
#include "coursecue/log.hpp"
#include "json.hpp"

namespace coursecue {

double SparseVector::norm() const {
  double s = 0.0;
  for (const auto& [i, v] : entries) s += v * v;
  return std::sqrt(s);
}

bool SparseVector::is_zero() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.second == 0.0; });
}

void SparseVector::normalize() {
  double n = norm();
  if (n == 0.0) return;
  for (auto& e : entries) e.second /= n;
}

double dot(const SparseVector& a, const SparseVector& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.entries.size() && j < b.entries.size()) {
    if (a.entries[i].first < b.entries[j].first) {
      ++i;
    } else if (a.entries[i].first > b.entries[j].first) {
      ++j;
    } else {
      s += a.entries[i].second * b.entries[j].second;
      ++i;
      ++j;
    }
  }
  return s;
}

double cosine(const SparseVector& a, const SparseVector& b) {
  double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

std::vector<SparseVector> TfidfEmbedder::embed(const Course& course) const {
  auto lectures = course.lectures();
  const std::size_t J = lectures.size();
  std::vector<std::map<std::string, std::size_t>> counts(J);
  std::map<std::string, std::size_t> df;
  for (std::size_t j = 0; j < J; ++j) {
    for (const auto& token : lectures[j]->tokens()) ++counts[j][token];
    for (const auto& [term, c] : counts[j]) ++df[term];
  }
  std::map<std::string, std::uint32_t> index;
  for (const auto& [term, d] : df) index.emplace(term, static_cast<std::uint32_t>(index.size()));

  std::vector<SparseVector> out(J);
  for (std::size_t j = 0; j < J; ++j) {
    for (const auto& [term, c] : counts[j]) {
      double idf = std::log(static_cast<double>(J) / static_cast<double>(df[term]));
      double w = static_cast<double>(c) * idf;
      if (w != 0.0) out[j].entries.emplace_back(index[term], w);
    }
    out[j].normalize();
  }
  return out;
}

PrecomputedEmbedder PrecomputedEmbedder::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open embedding file '" + path.string() + "'");
  PrecomputedEmbedder embedder;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      embedder.add(j.at("lecture_id").get<std::string>(), j.at("vector").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ": line " + std::to_string(number) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ": line " + std::to_string(number) + ": " + e.what());
    }
  }
  return embedder;
}

void PrecomputedEmbedder::add(std::string lecture_id, std::vector<double> vector) {
  if (vector.empty()) throw ValidationError("embedding for '" + lecture_id + "' is empty");
  if (dimension_ == 0) dimension_ = vector.size();
  if (vector.size() != dimension_) {
    throw ValidationError("embedding for '" + lecture_id + "' has dimension " + std::to_string(vector.size()) +
                          ", expected " + std::to_string(dimension_));
  }
  if (!vectors_.emplace(std::move(lecture_id), std::move(vector)).second) {
    throw ValidationError("duplicate embedding lecture id");
  }
}

std::vector<SparseVector> PrecomputedEmbedder::embed(const Course& course) const {
  auto lectures = course.lectures();
  std::size_t found = 0;
  for (const Lecture* l : lectures) found += vectors_.count(l->id());
  if (found == 0) return TfidfEmbedder{}.embed(course);
  if (found != lectures.size()) {
    throw ValidationError("embedding file covers only " + std::to_string(found) + " of " +
                          std::to_string(lectures.size()) + " lectures of course '" + course.id + "'");
  }
  std::vector<SparseVector> out;
  out.reserve(lectures.size());
  for (const Lecture* l : lectures) {
    const auto& dense = vectors_.at(l->id());
    SparseVector v;
    for (std::size_t i = 0; i < dense.size(); ++i) {
      if (dense[i] != 0.0) v.entries.emplace_back(static_cast<std::uint32_t>(i), dense[i]);
    }
    v.normalize();
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<SparseVector> embed_lectures(const Course& course) { return TfidfEmbedder{}.embed(course); }

double LectureGraph::total_weight() const {
  double two_m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double k = 0.0;
    for (std::size_t j = 0; j < n; ++j) k += weight(i, j);
    two_m += k;
  }
  return two_m;
}

LectureGraph build_graph(std::span<const SparseVector> embeddings, std::span<const int> communities) {
  if (embeddings.size() < 2) throw ValidationError("structure undefined: fewer than two lectures");
  if (communities.size() != embeddings.size()) {
    throw ValidationError("partition size does not match the number of lectures");
  }
  LectureGraph g;
  g.n = embeddings.size();
  g.weights.assign(g.n * g.n, 0.0);
  g.partition.assign(communities.begin(), communities.end());
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t j = i + 1; j < g.n; ++j) {
      double w = std::clamp(cosine(embeddings[i], embeddings[j]), 0.0, 1.0);
      g.weights[i * g.n + j] = w;
      g.weights[j * g.n + i] = w;
    }
  }
  return g;
}

double modularity(const LectureGraph& graph) {
  const std::size_t n = graph.n;
  if (graph.partition.size() != n || graph.weights.size() != n * n) {
    throw ValidationError("malformed lecture graph");
  }
  std::map<int, std::size_t> label_index;
  for (int c : graph.partition) label_index.emplace(c, label_index.size());
  std::vector<std::size_t> community(n);
  for (std::size_t i = 0; i < n; ++i) community[i] = label_index[graph.partition[i]];

  const std::size_t C = label_index.size();
  std::vector<double> internal(C, 0.0), degree(C, 0.0);
  double two_m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // Same summation order for k_i and the in-community sum, so a single
    // community yields L = d = 2m bit for bit.
    double k = 0.0, in = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double w = graph.weight(i, j);
      k += w;
      if (community[j] == community[i]) in += w;
    }
    degree[community[i]] += k;
    internal[community[i]] += in;
    two_m += k;
  }
  if (!(two_m > 0.0)) throw NumericalError("modularity undefined: total edge weight is zero");

  double q = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    double share = degree[c] / two_m;
    q += internal[c] / two_m - share * share;
  }
  return q;
}

std::vector<int> section_assignment(const Course& course) {
  std::vector<int> out;
  for (const Lecture* l : course.lectures()) out.push_back(l->section_index());
  return out;
}

double structure_quality(const Course& course, const LectureEmbedder& embedder) {
  if (course.lecture_count() < 2) {
    log_warning("course '" + course.id + "' has fewer than two lectures; structure quality set to 0");
    return 0.0;
  }
  auto embeddings = embedder.embed(course);
  auto sections = section_assignment(course);
  LectureGraph graph = build_graph(embeddings, sections);
  if (!(graph.total_weight() > 0.0)) {
    log_warning("course '" + course.id + "' has no positive lecture similarity; structure quality set to 0");
    return 0.0;
  }
  return modularity(graph);
}

double structure_quality(const Course& course) { return structure_quality(course, TfidfEmbedder{}); }

}  // namespace coursecue
