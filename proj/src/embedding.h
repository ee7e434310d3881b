// Copyright 2026 The WMVoc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WMVOC_EMBEDDING_H_
#define WMVOC_EMBEDDING_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace wmvoc {

// Row-major so that one instance or one prototype is a contiguous row.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// The linear visual-to-semantic map W (p x d); g(x) = W^T x.
using EmbeddingMatrix = Eigen::MatrixXd;

// The open label set with one d-dimensional prototype per label, plus the
// source (seen) and target (unseen) index subsets.
class SemanticVocabulary {
 public:
  SemanticVocabulary() = default;
  // Labels must be unique. When `normalize` is set every row is scaled to
  // unit L2 norm; zero rows are rejected in that mode.
  SemanticVocabulary(std::vector<std::string> labels, RowMatrix vectors, bool normalize = true);

  std::size_t size() const { return labels_.size(); }
  int dim() const { return static_cast<int>(vectors_.cols()); }
  bool normalized() const { return normalized_; }

  const std::string& label(int row) const { return labels_[row]; }
  const std::vector<std::string>& labels() const { return labels_; }
  const RowMatrix& vectors() const { return vectors_; }
  auto prototype(int row) const { return vectors_.row(row); }

  // Restriction to `rows` (ascending, unique). Vectors are copied as is;
  // class ids and synsets are remapped and members outside `rows` dropped.
  SemanticVocabulary Subset(std::span<const int> rows) const;

  std::optional<int> Find(std::string_view label) const;
  // Throws kFormat naming the label if absent.
  int IndexOf(std::string_view label) const;

  // Source and target ids must be valid, unique and mutually disjoint.
  void SetClasses(std::vector<int> source_ids, std::vector<int> target_ids);
  const std::vector<int>& source_ids() const { return source_ids_; }
  const std::vector<int>& target_ids() const { return target_ids_; }
  bool IsSource(int row) const { return !source_mask_.empty() && source_mask_[row] != 0; }
  // Position of `row` within source_ids, or -1.
  int SourceClassOf(int row) const;

  // Synonym lists keyed by vocabulary row. Each list holds the rows whose
  // vectors are averaged into the label's effective prototype; the label
  // itself is expected to be a member.
  void SetSynsets(std::unordered_map<int, std::vector<int>> synsets);
  const std::vector<int>* Synset(int row) const;
  bool has_synsets() const { return !synsets_.empty(); }

 private:
  std::vector<std::string> labels_;
  RowMatrix vectors_;
  bool normalized_ = false;
  std::unordered_map<std::string, int> index_;
  std::vector<int> source_ids_;
  std::vector<int> target_ids_;
  std::vector<char> source_mask_;
  std::vector<int> source_position_;
  std::unordered_map<int, std::vector<int>> synsets_;
};

// Training set: N x p features and, per row, a class index into the
// vocabulary's source_ids.
struct LabeledFeatures {
  RowMatrix features;
  std::vector<int> labels;
  int class_count = 0;

  std::size_t size() const { return labels.size(); }
  int feature_dim() const { return static_cast<int>(features.cols()); }

  // Checks N >= 1, finiteness and label range.
  void Validate() const;
};

// Unit-norm check tolerance for normalized vocabularies.
inline constexpr double kNormTolerance = 1e-6;

// W^T x.
Vector Project(const EmbeddingMatrix& w, const Eigen::Ref<const Vector>& x);
// Row i of the result is Project(w, x.row(i)), bit for bit.
RowMatrix EmbedRows(const RowMatrix& x, const EmbeddingMatrix& w);

// Sum of squared coordinate differences. Uses a fixed four-way accumulation
// order so every caller computes the identical value for the same pair.
double SqDistance(const double* a, const double* b, int dim);
double SqDistance(std::span<const double> a, std::span<const double> b);

struct Neighbor {
  int id = 0;
  double distance = 0.0;
};

// Strict weak order on (distance, id): the lowest id wins ties.
inline bool NeighborLess(const Neighbor& a, const Neighbor& b) {
  return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
}

// Exact k-nearest rows of `table` to `query`. Row r is reported with id
// ids[r]. Result is sorted by NeighborLess and has min(k, rows) entries.
// Tables with at least kParallelScanRows rows are scanned in fixed-size
// chunks with per-chunk top-k heaps, merged in chunk order.
std::vector<Neighbor> TopKScan(const double* query, const RowMatrix& table,
                               std::span<const int> ids, int k, int threads = 1);

inline constexpr std::size_t kParallelScanRows = 100000;
inline constexpr std::size_t kScanChunkRows = 16384;

// k nearest prototypes among `candidate_ids`, ascending by distance.
std::vector<int> NearestPrototypes(std::span<const double> query, const SemanticVocabulary& vocab,
                                   std::span<const int> candidate_ids, int k);

// Per source class (indexed like source_ids): the A_V nearest prototypes
// outside the source set and the B_S nearest other source prototypes.
struct NeighborSets {
  std::vector<std::vector<int>> av_ids;
  std::vector<std::vector<int>> bs_ids;
};

NeighborSets BuildNeighborSets(const SemanticVocabulary& vocab, int av_count, int bs_count,
                               int threads = 1);

}  // namespace wmvoc

#endif  // WMVOC_EMBEDDING_H_
