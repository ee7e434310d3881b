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

#include "embedding.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "parallel.h"
#include "status.h"

namespace wmvoc {

SemanticVocabulary::SemanticVocabulary(std::vector<std::string> labels, RowMatrix vectors,
                                       bool normalize)
    : labels_(std::move(labels)), vectors_(std::move(vectors)), normalized_(normalize) {
  Require(static_cast<Eigen::Index>(labels_.size()) == vectors_.rows(), ErrorCode::kShape,
          "vocabulary: label count does not match vector rows");
  Require(labels_.empty() || vectors_.cols() >= 1, ErrorCode::kShape,
          "vocabulary: dimension must be at least 1");
  Require(vectors_.allFinite(), ErrorCode::kFormat, "vocabulary: non-finite vector entry");
  index_.reserve(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    auto [it, inserted] = index_.emplace(labels_[i], static_cast<int>(i));
    Require(inserted, ErrorCode::kFormat, "vocabulary: duplicate label '" + labels_[i] + "'");
  }
  if (normalize) {
    for (Eigen::Index r = 0; r < vectors_.rows(); ++r) {
      const double norm = vectors_.row(r).norm();
      Require(norm > 0.0, ErrorCode::kFormat,
              "vocabulary: cannot normalize zero vector for '" + labels_[r] + "'");
      vectors_.row(r) /= norm;
    }
  }
}

SemanticVocabulary SemanticVocabulary::Subset(std::span<const int> rows) const {
  const int n = static_cast<int>(size());
  std::vector<int> remap(n, -1);
  std::vector<std::string> labels;
  RowMatrix vectors(static_cast<Eigen::Index>(rows.size()), vectors_.cols());
  int prev = -1;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int r = rows[i];
    Require(r > prev && r < n, ErrorCode::kInvalidArgument,
            "subset rows must be ascending and in range");
    prev = r;
    remap[r] = static_cast<int>(i);
    labels.push_back(labels_[r]);
    vectors.row(static_cast<Eigen::Index>(i)) = vectors_.row(r);
  }
  SemanticVocabulary out(std::move(labels), std::move(vectors), false);
  out.normalized_ = normalized_;
  auto map_ids = [&](const std::vector<int>& ids) {
    std::vector<int> mapped;
    for (int id : ids) {
      if (remap[id] >= 0) mapped.push_back(remap[id]);
    }
    return mapped;
  };
  out.SetClasses(map_ids(source_ids_), map_ids(target_ids_));
  std::unordered_map<int, std::vector<int>> synsets;
  for (const auto& [row, members] : synsets_) {
    if (remap[row] < 0) continue;
    auto mapped = map_ids(members);
    if (!mapped.empty()) synsets.emplace(remap[row], std::move(mapped));
  }
  out.SetSynsets(std::move(synsets));
  return out;
}

std::optional<int> SemanticVocabulary::Find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int SemanticVocabulary::IndexOf(std::string_view label) const {
  auto row = Find(label);
  if (!row) Fail(ErrorCode::kFormat, "label '" + std::string(label) + "' not in vocabulary");
  return *row;
}

void SemanticVocabulary::SetClasses(std::vector<int> source_ids, std::vector<int> target_ids) {
  const int n = static_cast<int>(size());
  std::vector<char> seen(n, 0);
  for (int id : source_ids) {
    Require(id >= 0 && id < n, ErrorCode::kInvalidArgument, "source id out of range");
    Require(seen[id] == 0, ErrorCode::kInvalidArgument, "duplicate source id");
    seen[id] = 1;
  }
  for (int id : target_ids) {
    Require(id >= 0 && id < n, ErrorCode::kInvalidArgument, "target id out of range");
    Require(seen[id] != 1, ErrorCode::kInvalidArgument,
            "source and target classes overlap at '" + labels_[id] + "'");
    Require(seen[id] != 2, ErrorCode::kInvalidArgument, "duplicate target id");
    seen[id] = 2;
  }
  source_position_.assign(n, -1);
  for (std::size_t i = 0; i < source_ids.size(); ++i) {
    source_position_[source_ids[i]] = static_cast<int>(i);
  }
  source_mask_.assign(n, 0);
  for (int id : source_ids) source_mask_[id] = 1;
  source_ids_ = std::move(source_ids);
  target_ids_ = std::move(target_ids);
}

int SemanticVocabulary::SourceClassOf(int row) const {
  if (source_position_.empty() || row < 0 || row >= static_cast<int>(size())) return -1;
  return source_position_[row];
}

void SemanticVocabulary::SetSynsets(std::unordered_map<int, std::vector<int>> synsets) {
  const int n = static_cast<int>(size());
  for (const auto& [row, members] : synsets) {
    Require(row >= 0 && row < n, ErrorCode::kInvalidArgument, "synset key out of range");
    Require(!members.empty(), ErrorCode::kInvalidArgument, "empty synset");
    for (int m : members) {
      Require(m >= 0 && m < n, ErrorCode::kInvalidArgument, "synset member out of range");
    }
  }
  synsets_ = std::move(synsets);
}

const std::vector<int>* SemanticVocabulary::Synset(int row) const {
  auto it = synsets_.find(row);
  return it == synsets_.end() ? nullptr : &it->second;
}

void LabeledFeatures::Validate() const {
  Require(!labels.empty(), ErrorCode::kShape, "dataset is empty");
  Require(static_cast<Eigen::Index>(labels.size()) == features.rows(), ErrorCode::kShape,
          "dataset: label count does not match feature rows");
  Require(features.allFinite(), ErrorCode::kFormat, "dataset: non-finite feature value");
  for (int z : labels) {
    Require(z >= 0 && z < class_count, ErrorCode::kInvalidArgument,
            "dataset: label outside the source classes");
  }
}

namespace {

// out_j = sum_i x_i W_ij, accumulated in ascending i.
void ProjectInto(const EmbeddingMatrix& w, const double* x, double* out) {
  const Eigen::Index p = w.rows();
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    const double* col = w.col(j).data();
    double s = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) s += x[i] * col[i];
    out[j] = s;
  }
}

}  // namespace

Vector Project(const EmbeddingMatrix& w, const Eigen::Ref<const Vector>& x) {
  Require(w.rows() == x.size(), ErrorCode::kShape, "project: feature dimension mismatch");
  Require(x.allFinite(), ErrorCode::kInvalidArgument, "project: non-finite input");
  const Vector xc = x;
  Vector out(w.cols());
  ProjectInto(w, xc.data(), out.data());
  return out;
}

RowMatrix EmbedRows(const RowMatrix& x, const EmbeddingMatrix& w) {
  Require(w.rows() == x.cols(), ErrorCode::kShape, "embed: feature dimension mismatch");
  RowMatrix out(x.rows(), w.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) ProjectInto(w, x.row(r).data(), out.row(r).data());
  return out;
}

double SqDistance(const double* a, const double* b, int dim) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  int j = 0;
  for (; j + 4 <= dim; j += 4) {
    const double d0 = a[j] - b[j];
    const double d1 = a[j + 1] - b[j + 1];
    const double d2 = a[j + 2] - b[j + 2];
    const double d3 = a[j + 3] - b[j + 3];
    s0 += d0 * d0;
    s1 += d1 * d1;
    s2 += d2 * d2;
    s3 += d3 * d3;
  }
  for (; j < dim; ++j) {
    const double d = a[j] - b[j];
    s0 += d * d;
  }
  return (s0 + s1) + (s2 + s3);
}

double SqDistance(std::span<const double> a, std::span<const double> b) {
  Require(a.size() == b.size(), ErrorCode::kShape, "sq_distance: dimension mismatch");
  return SqDistance(a.data(), b.data(), static_cast<int>(a.size()));
}

namespace {

// Bounded max-heap keeping the k best neighbors seen so far.
void ScanRange(const double* query, const RowMatrix& table, std::span<const int> ids,
               std::size_t begin, std::size_t end, std::size_t k, std::vector<Neighbor>& heap) {
  const int dim = static_cast<int>(table.cols());
  for (std::size_t r = begin; r < end; ++r) {
    Neighbor cand{ids[r], SqDistance(query, table.row(r).data(), dim)};
    if (heap.size() < k) {
      heap.push_back(cand);
      std::push_heap(heap.begin(), heap.end(), NeighborLess);
    } else if (NeighborLess(cand, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), NeighborLess);
      heap.back() = cand;
      std::push_heap(heap.begin(), heap.end(), NeighborLess);
    }
  }
}

}  // namespace

std::vector<Neighbor> TopKScan(const double* query, const RowMatrix& table,
                               std::span<const int> ids, int k, int threads) {
  Require(static_cast<Eigen::Index>(ids.size()) == table.rows(), ErrorCode::kShape,
          "top-k scan: id count does not match table rows");
  Require(table.rows() > 0, ErrorCode::kInvalidArgument, "empty candidate set");
  Require(k >= 1, ErrorCode::kInvalidArgument, "k must be at least 1");
  const std::size_t rows = static_cast<std::size_t>(table.rows());
  const std::size_t kk = std::min<std::size_t>(k, rows);

  std::vector<Neighbor> result;
  if (rows < kParallelScanRows || threads == 1) {
    result.reserve(kk + 1);
    ScanRange(query, table, ids, 0, rows, kk, result);
  } else {
    const std::size_t chunks = ChunkCount(rows, kScanChunkRows);
    std::vector<std::vector<Neighbor>> partial(chunks);
    ParallelFor(rows, kScanChunkRows, threads,
                [&](std::size_t c, std::size_t begin, std::size_t end) {
                  partial[c].reserve(kk + 1);
                  ScanRange(query, table, ids, begin, end, kk, partial[c]);
                });
    for (auto& p : partial) result.insert(result.end(), p.begin(), p.end());
  }
  std::sort(result.begin(), result.end(), NeighborLess);
  if (result.size() > kk) result.resize(kk);
  return result;
}

std::vector<int> NearestPrototypes(std::span<const double> query, const SemanticVocabulary& vocab,
                                   std::span<const int> candidate_ids, int k) {
  Require(!candidate_ids.empty(), ErrorCode::kInvalidArgument, "empty candidate set");
  Require(k >= 1, ErrorCode::kInvalidArgument, "k must be at least 1");
  Require(static_cast<int>(query.size()) == vocab.dim(), ErrorCode::kShape,
          "nearest_prototypes: query dimension mismatch");
  const int dim = vocab.dim();
  std::vector<Neighbor> all;
  all.reserve(candidate_ids.size());
  for (int id : candidate_ids) {
    Require(id >= 0 && id < static_cast<int>(vocab.size()), ErrorCode::kInvalidArgument,
            "candidate id out of range");
    all.push_back({id, SqDistance(query.data(), vocab.prototype(id).data(), dim)});
  }
  const std::size_t kk = std::min<std::size_t>(k, all.size());
  std::partial_sort(all.begin(), all.begin() + kk, all.end(), NeighborLess);
  std::vector<int> out(kk);
  for (std::size_t i = 0; i < kk; ++i) out[i] = all[i].id;
  return out;
}

NeighborSets BuildNeighborSets(const SemanticVocabulary& vocab, int av_count, int bs_count,
                               int threads) {
  Require(av_count >= 0 && bs_count >= 0, ErrorCode::kInvalidArgument,
          "neighbor counts must be nonnegative");
  const auto& source = vocab.source_ids();
  std::vector<int> open_ids;
  for (int r = 0; r < static_cast<int>(vocab.size()); ++r) {
    if (!vocab.IsSource(r)) open_ids.push_back(r);
  }

  NeighborSets sets;
  sets.av_ids.resize(source.size());
  sets.bs_ids.resize(source.size());
  ParallelFor(source.size(), 1, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      const int self = source[c];
      std::span<const double> query(vocab.prototype(self).data(), vocab.dim());
      if (av_count > 0 && !open_ids.empty()) {
        sets.av_ids[c] = NearestPrototypes(query, vocab, open_ids, av_count);
      }
      if (bs_count > 0 && source.size() > 1) {
        std::vector<int> others;
        others.reserve(source.size() - 1);
        for (int s : source) {
          if (s != self) others.push_back(s);
        }
        sets.bs_ids[c] = NearestPrototypes(query, vocab, others, bs_count);
      }
    }
  });
  return sets;
}

}  // namespace wmvoc
