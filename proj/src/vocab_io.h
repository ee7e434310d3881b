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

#ifndef WMVOC_VOCAB_IO_H_
#define WMVOC_VOCAB_IO_H_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "embedding.h"

namespace wmvoc {

enum class VectorFormat { kText, kBinary };

struct LoadStats {
  std::size_t rows_read = 0;
  std::size_t duplicate_labels = 0;
};

// word2vec vector files.
//
// TEXT: `<count> <dim>` header, then `<token> <v1> ... <vdim>` per line.
// BINARY: the same ASCII header line, then per entry the token bytes, one
// space, and dim little-endian float32 values (an optional newline may
// follow each entry). Without a header (GloVe text) the dimension is taken
// from the first row. Duplicate labels keep the first position and the last
// vector.
SemanticVocabulary LoadWordVectors(const std::string& path, VectorFormat format,
                                   bool normalize = true, bool has_header = true,
                                   LoadStats* stats = nullptr);

void WriteWordVectors(const std::string& path, const std::vector<std::string>& labels,
                      const RowMatrix& vectors, VectorFormat format);

using FrequencyTable = std::unordered_map<std::string, int64_t>;

// Lines of `<token>\t<count>`.
FrequencyTable LoadFrequencyTable(const std::string& path);

inline constexpr int64_t kDefaultMinCount = 300;
inline constexpr int64_t kDefaultMaxCount = 10000000;

// Keeps rows whose corpus count lies in [min_count, max_count]; rows absent
// from the table are dropped. Source and target rows are always kept.
SemanticVocabulary PruneVocabulary(const SemanticVocabulary& vocab, const FrequencyTable& freq,
                                   int64_t min_count = kDefaultMinCount,
                                   int64_t max_count = kDefaultMaxCount);

// Vector for a label or phrase: exact match, then the phrase with spaces
// turned into underscores (or underscores into spaces), then the Rocchio
// mean of its whitespace-separated tokens. Throws kFormat naming the first
// out-of-vocabulary token.
Vector LookupPhrase(const SemanticVocabulary& vocab, const std::string& phrase);

// Feature matrices. Binary: magic `VIFM`, uint32 N, uint32 p, then N*p
// float32 row-major, all little-endian. CSV: p comma-separated decimals per
// line, no header. ReadFeatureMatrix detects the encoding from the magic.
RowMatrix ReadFeatureMatrix(const std::string& path);
void WriteFeaturesBinary(const std::string& path, const RowMatrix& features);
void WriteFeaturesCsv(const std::string& path, const RowMatrix& features);

// One UTF-8 label per line.
std::vector<std::string> ReadLabelList(const std::string& path);
void WriteLabelList(const std::string& path, const std::vector<std::string>& labels);

// Test-time view: features plus the vocabulary row of each label.
struct FeatureSet {
  RowMatrix features;
  std::vector<int> rows;
};

FeatureSet LoadFeatureSet(const std::string& features_path, const std::string& labels_path,
                          const SemanticVocabulary& vocab);

// Training view: labels resolved against the vocabulary's source classes.
LabeledFeatures LoadFeatures(const std::string& features_path, const std::string& labels_path,
                             const SemanticVocabulary& vocab);
LabeledFeatures ToLabeledFeatures(const FeatureSet& set, const SemanticVocabulary& vocab);

// Synset file: one line per class, `<label> <synonym> <synonym> ...`. The
// class label itself is always a member of its synset.
std::unordered_map<int, std::vector<int>> LoadSynsets(const std::string& path,
                                                      const SemanticVocabulary& vocab);

}  // namespace wmvoc

#endif  // WMVOC_VOCAB_IO_H_
