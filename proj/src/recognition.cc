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

#include "recognition.h"

#include <algorithm>

#include "parallel.h"
#include "status.h"

namespace wmvoc {

const char* SettingName(Setting s) {
  switch (s) {
    case Setting::kSupervised:
      return "supervised";
    case Setting::kZsl:
      return "zsl";
    case Setting::kGzsl:
      return "gzsl";
    case Setting::kOpenset:
      return "openset";
  }
  return "supervised";
}

Setting ParseSetting(const std::string& name) {
  if (name == "supervised") return Setting::kSupervised;
  if (name == "zsl") return Setting::kZsl;
  if (name == "gzsl") return Setting::kGzsl;
  if (name == "openset") return Setting::kOpenset;
  Fail(ErrorCode::kConfig, "unknown setting '" + name + "'");
}

CandidateSet MakeCandidates(const SemanticVocabulary& vocab, Setting setting) {
  CandidateSet c{setting, {}};
  switch (setting) {
    case Setting::kSupervised:
      c.ids = vocab.source_ids();
      break;
    case Setting::kZsl:
      c.ids = vocab.target_ids();
      break;
    case Setting::kGzsl:
      c.ids = vocab.source_ids();
      c.ids.insert(c.ids.end(), vocab.target_ids().begin(), vocab.target_ids().end());
      break;
    case Setting::kOpenset:
      c.ids.resize(vocab.size());
      for (std::size_t i = 0; i < vocab.size(); ++i) c.ids[i] = static_cast<int>(i);
      break;
  }
  std::sort(c.ids.begin(), c.ids.end());
  return c;
}

Vector RocchioPrototype(std::span<const Vector> vectors, bool normalize) {
  Require(!vectors.empty(), ErrorCode::kInvalidArgument, "rocchio: no vectors");
  Vector mean = Vector::Zero(vectors[0].size());
  for (const auto& v : vectors) {
    Require(v.size() == mean.size(), ErrorCode::kShape, "rocchio: dimension mismatch");
    mean += v;
  }
  mean /= static_cast<double>(vectors.size());
  if (normalize) {
    const double norm = mean.norm();
    if (norm > 0.0) mean /= norm;
  }
  return mean;
}

PrototypeTable BuildPrototypeTable(const SemanticVocabulary& vocab, std::span<const int> ids) {
  Require(!ids.empty(), ErrorCode::kInvalidArgument, "empty candidate set");
  PrototypeTable table;
  table.ids.assign(ids.begin(), ids.end());
  table.rows.resize(static_cast<Eigen::Index>(ids.size()), vocab.dim());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const int id = ids[r];
    Require(id >= 0 && id < static_cast<int>(vocab.size()), ErrorCode::kInvalidArgument,
            "candidate id out of range");
    const std::vector<int>* synset = vocab.Synset(id);
    if (synset == nullptr) {
      table.rows.row(r) = vocab.prototype(id);
      continue;
    }
    std::vector<Vector> members;
    members.reserve(synset->size());
    for (int m : *synset) members.emplace_back(vocab.prototype(m).transpose());
    table.rows.row(r) = RocchioPrototype(members, vocab.normalized()).transpose();
  }
  return table;
}

namespace {

Prediction ToPrediction(const std::vector<Neighbor>& nn) {
  Prediction p;
  p.ids.reserve(nn.size());
  p.distances.reserve(nn.size());
  for (const auto& n : nn) {
    p.ids.push_back(n.id);
    p.distances.push_back(n.distance);
  }
  return p;
}

}  // namespace

Prediction Classify(const EmbeddingMatrix& w, const Eigen::Ref<const Vector>& x,
                    const SemanticVocabulary& vocab, const CandidateSet& candidates, int k,
                    int threads) {
  Require(k >= 1, ErrorCode::kInvalidArgument, "k must be at least 1");
  Require(w.cols() == vocab.dim(), ErrorCode::kShape, "W does not match vocabulary dimension");
  const PrototypeTable table = BuildPrototypeTable(vocab, candidates.ids);
  const Vector e = Project(w, x);
  return ToPrediction(TopKScan(e.data(), table.rows, table.ids, k, threads));
}

std::vector<Prediction> BatchClassify(const EmbeddingMatrix& w, const RowMatrix& features,
                                      const SemanticVocabulary& vocab,
                                      const CandidateSet& candidates, int k, int threads) {
  Require(w.cols() == vocab.dim(), ErrorCode::kShape, "W does not match vocabulary dimension");
  if (features.rows() == 0) return {};
  return BatchClassify(w, features, BuildPrototypeTable(vocab, candidates.ids), k, threads);
}

std::vector<Prediction> BatchClassify(const EmbeddingMatrix& w, const RowMatrix& features,
                                      const PrototypeTable& table, int k, int threads) {
  Require(k >= 1, ErrorCode::kInvalidArgument, "k must be at least 1");
  Require(w.rows() == features.cols(), ErrorCode::kShape, "feature dimension mismatch");
  Require(w.cols() == table.rows.cols(), ErrorCode::kShape,
          "W does not match prototype dimension");
  const std::size_t n = static_cast<std::size_t>(features.rows());
  std::vector<Prediction> out(n);
  if (n == 0) return out;
  const RowMatrix embedded = EmbedRows(features, w);
  if (threads <= 0) threads = DefaultThreadCount();
  if (n >= static_cast<std::size_t>(threads)) {
    ParallelFor(n, 16, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        out[i] = ToPrediction(TopKScan(embedded.row(i).data(), table.rows, table.ids, k, 1));
      }
    });
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = ToPrediction(TopKScan(embedded.row(i).data(), table.rows, table.ids, k, threads));
    }
  }
  return out;
}

}  // namespace wmvoc
