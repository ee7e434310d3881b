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

#ifndef WMVOC_MODEL_IO_H_
#define WMVOC_MODEL_IO_H_

#include <cstdint>
#include <string>
#include <vector>

#include "embedding.h"
#include "evt.h"
#include "loss.h"

namespace wmvoc {

inline constexpr uint32_t kModelFormatVersion = 1;

// A trained model. The source fingerprint covers the source labels and
// their prototype vectors and must match the vocabulary used at inference.
// The vocabulary fingerprint covers every row and is advisory only, so a
// model can be evaluated against a larger or smaller open vocabulary.
struct ModelFile {
  uint32_t version = kModelFormatVersion;
  EmbeddingMatrix w;
  ClassWeights weights;
  LossConfig loss;
  int av_count = 0;
  int bs_count = 0;
  bool normalized = true;
  std::vector<std::string> source_labels;
  uint64_t source_fingerprint = 0;
  uint64_t vocab_fingerprint = 0;
};

// FNV-1a over the source labels and the exact bytes of their vectors.
uint64_t SourceFingerprint(const SemanticVocabulary& vocab);
// FNV-1a over every label and vector of the vocabulary.
uint64_t VocabFingerprint(const SemanticVocabulary& vocab);

// Little-endian binary file: magic `WMVM`, uint32 version, the payload,
// and a trailing 64-bit FNV-1a checksum of all preceding bytes.
void SaveModel(const std::string& path, const ModelFile& model);
ModelFile LoadModel(const std::string& path);
std::string SerializeModel(const ModelFile& model);
ModelFile DeserializeModel(const std::string& bytes);

// Throws kFingerprint when the vocabulary's source classes differ from the
// ones the model was trained on. Returns false (no throw) when only the
// advisory whole-vocabulary fingerprint differs.
bool CheckFingerprint(const ModelFile& model, const SemanticVocabulary& vocab);

}  // namespace wmvoc

#endif  // WMVOC_MODEL_IO_H_
