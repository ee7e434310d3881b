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

#ifndef WMVOC_SYNTH_H_
#define WMVOC_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "embedding.h"
#include "vocab_io.h"

namespace wmvoc {

struct SynthSpec {
  uint64_t seed = 0;
  int n_source = 10;
  int n_target = 3;
  int n_distractors = 100;
  int d = 20;
  int p = 50;
  int instances_per_class = 30;
  // Test instances drawn per source and per target class.
  int test_instances_per_class = 20;
  double noise_sigma = 0.05;
  // Ratio of the largest to the smallest singular value of the map.
  double map_condition = 10.0;
  // Minimum pairwise angle between source and target prototypes.
  double min_angle_deg = 30.0;
  // Optional per-source-class training counts overriding
  // instances_per_class; empty or of length n_source.
  std::vector<int> class_counts;

  void Validate() const;
};

struct SynthBenchmark {
  // Rows: source classes, then target classes, then distractors. Labels
  // src_000..., tgt_000..., voc_00000....
  SemanticVocabulary vocab;
  LabeledFeatures train;
  std::vector<int> train_rows;  // vocabulary row per training instance
  FeatureSet test;              // source-class then target-class instances
  // Position of each instance in the generation stream; train and test
  // draw from disjoint positions.
  std::vector<int> train_instance_ids;
  std::vector<int> test_instance_ids;
  Eigen::MatrixXd map;  // p x d ground-truth map M, x = M u + noise
};

// Deterministic given spec.seed. Prototypes are uniform on the unit sphere;
// class prototypes are redrawn until every pair is at least min_angle_deg
// apart (at most kMaxRejections draws per prototype, then kConfig).
SynthBenchmark GenerateBenchmark(const SynthSpec& spec);

inline constexpr int kMaxRejections = 10000;

// Writes <dir>/vocab.txt (text vectors), train.feat, train.labels,
// test.feat, test.labels (binary features when `binary`, else CSV),
// source.classes and target.classes.
void WriteBenchmark(const SynthBenchmark& bench, const std::string& dir, bool binary = true);

}  // namespace wmvoc

#endif  // WMVOC_SYNTH_H_
