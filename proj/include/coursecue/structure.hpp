// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "coursecue/corpus.hpp"

namespace coursecue {

/// Sparse vector with strictly increasing indices.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  double norm() const;
  bool is_zero() const;
  /// Scales to unit L2 norm; zero vectors are left alone.
  void normalize();
};

double dot(const SparseVector& a, const SparseVector& b);
/// Cosine similarity; 0 when either vector is zero.
double cosine(const SparseVector& a, const SparseVector& b);

/// Produces one vector per lecture (document order) for a course.
class LectureEmbedder {
 public:
  virtual ~LectureEmbedder() = default;
  virtual std::vector<SparseVector> embed(const Course& course) const = 0;
};

/// TF-IDF over the course's own lectures: raw term count x ln(J / df),
/// L2-normalized. Terms are indexed in lexicographic order.
class TfidfEmbedder final : public LectureEmbedder {
 public:
  std::vector<SparseVector> embed(const Course& course) const override;
};

/// Dense vectors read from JSONL {"lecture_id", "vector"}. Courses with no
/// listed lectures fall back to TF-IDF; partial coverage is an error.
class PrecomputedEmbedder final : public LectureEmbedder {
 public:
  static PrecomputedEmbedder load(const std::filesystem::path& path);
  void add(std::string lecture_id, std::vector<double> vector);
  std::vector<SparseVector> embed(const Course& course) const override;

 private:
  std::unordered_map<std::string, std::vector<double>> vectors_;
  std::size_t dimension_ = 0;
};

std::vector<SparseVector> embed_lectures(const Course& course);

/// Complete weighted lecture graph of one course with a community label per
/// node.
struct LectureGraph {
  std::size_t n = 0;
  std::vector<double> weights;  // n x n, row-major, symmetric, zero diagonal
  std::vector<int> partition;

  double weight(std::size_t i, std::size_t j) const { return weights[i * n + j]; }
  double total_weight() const;  // 2m
};

/// weight(i, j) = cosine clamped to [0, 1]; partition = `communities`.
/// Fewer than two lectures raises ValidationError ("structure undefined").
LectureGraph build_graph(std::span<const SparseVector> embeddings, std::span<const int> communities);

/// Weighted Newman modularity, computed per community as
/// sum_c [ L_c / 2m - (d_c / 2m)^2 ] with L_c the intra-community weight over
/// ordered pairs and d_c the community's total degree. 2m = 0 raises
/// NumericalError.
double modularity(const LectureGraph& graph);

/// Modularity of the section partition. Degenerate courses (one lecture, or
/// no positive similarity) get 0 and a warning.
double structure_quality(const Course& course, const LectureEmbedder& embedder);
double structure_quality(const Course& course);

/// Section index of every lecture in document order.
std::vector<int> section_assignment(const Course& course);

}  // namespace coursecue
