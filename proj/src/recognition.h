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

#ifndef WMVOC_RECOGNITION_H_
#define WMVOC_RECOGNITION_H_

#include <span>
#include <string>
#include <vector>

#include "embedding.h"

namespace wmvoc {

// The four label spaces a test instance can be classified into.
enum class Setting { kSupervised, kZsl, kGzsl, kOpenset };

const char* SettingName(Setting s);
Setting ParseSetting(const std::string& name);

// Candidate prototype rows for one setting, sorted ascending.
struct CandidateSet {
  Setting setting = Setting::kSupervised;
  std::vector<int> ids;
};

// supervised: source ids; zsl: target ids; gzsl: source and target ids;
// openset: every vocabulary row.
CandidateSet MakeCandidates(const SemanticVocabulary& vocab, Setting setting);

// Mean of the given vectors, rescaled to unit norm when `normalize` is set
// (a zero mean is returned unchanged).
Vector RocchioPrototype(std::span<const Vector> vectors, bool normalize);

// Effective prototypes of a candidate set: the Rocchio average of the
// label's synset when one is registered, else the stored vector.
struct PrototypeTable {
  RowMatrix rows;
  std::vector<int> ids;
};

PrototypeTable BuildPrototypeTable(const SemanticVocabulary& vocab, std::span<const int> ids);

struct Prediction {
  std::vector<int> ids;           // vocabulary rows, nearest first
  std::vector<double> distances;  // squared distances, nondecreasing
};

Prediction Classify(const EmbeddingMatrix& w, const Eigen::Ref<const Vector>& x,
                    const SemanticVocabulary& vocab, const CandidateSet& candidates, int k,
                    int threads = 1);

// Row-wise Classify over an N x p feature matrix; output order follows rows.
std::vector<Prediction> BatchClassify(const EmbeddingMatrix& w, const RowMatrix& features,
                                      const SemanticVocabulary& vocab,
                                      const CandidateSet& candidates, int k, int threads = 1);

// Same, reusing a prebuilt table.
std::vector<Prediction> BatchClassify(const EmbeddingMatrix& w, const RowMatrix& features,
                                      const PrototypeTable& table, int k, int threads = 1);

}  // namespace wmvoc

#endif  // WMVOC_RECOGNITION_H_
