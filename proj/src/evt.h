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

#ifndef WMVOC_EVT_H_
#define WMVOC_EVT_H_

#include <cstdint>
#include <span>
#include <vector>

#include "embedding.h"

namespace wmvoc {

// Two-parameter Weibull fit. A single extreme value (or a set of identical
// ones) yields an infinite shape: the distribution degenerates to a step at
// `scale`.
struct WeibullFit {
  double shape = 1.0;
  double scale = 1.0;
  bool infinite_shape = false;
};

// Maximum-likelihood Weibull fit of positive samples. The shape solves the
// likelihood score equation by geometric bracketing and bisection on
// [kMinShape, kMaxShape]; the scale follows in closed form.
//
// Errors: empty input or a nonpositive sample (kInvalidArgument); n > 1
// identical samples (kNumerical, "degenerate sample"). FitWeibullOrStep
// applies the single-sample rule to the degenerate case instead.
WeibullFit FitWeibullMin(std::span<const double> samples);
WeibullFit FitWeibullOrStep(std::span<const double> samples);

inline constexpr double kMinShape = 1e-3;
inline constexpr double kMaxShape = 1e3;

// Residual of the shape score equation
//   sum x^k ln x / sum x^k - 1/k - mean(ln x)
// Increasing in k; FitWeibullMin returns its root.
double WeibullShapeScore(std::span<const double> samples, double shape);

// exp(-(dist/scale)^shape): probability that a point at `dist` lies inside
// the margin boundary.
double MarginProbability(const WeibullFit& fit, double dist);
// 1 - exp(-(dist/scale)^shape).
double CoverageProbability(const WeibullFit& fit, double dist);

// Distance at which MarginProbability drops to `significance`:
// scale * ln(1/s)^(1/shape).
double MarginRadius(const WeibullFit& fit, double significance = 0.05);
// Distance at which CoverageProbability reaches `significance`:
// scale * ln(1/(1-s))^(1/shape).
double CoverageRadius(const WeibullFit& fit, double significance = 0.05);

struct ClassWeight {
  double weight = 1.0;
  double margin_radius = 0.0;
  double coverage_radius = 0.0;
  WeibullFit margin_fit;
  WeibullFit coverage_fit;
  // Set when no within-class distance survived the outlier filter and the
  // coverage fit fell back to a step at the nearest foreign distance.
  bool coverage_fallback = false;
};

// Per source class weights w_z, indexed like SemanticVocabulary::source_ids.
struct ClassWeights {
  std::vector<ClassWeight> classes;

  static ClassWeights Uniform(std::size_t class_count);
  std::size_t size() const { return classes.size(); }
  double weight(int class_index) const { return classes[class_index].weight; }
  int fallback_count() const;
};

struct EvtConfig {
  double significance = 0.05;
  // Number of rows outside source and target sets sampled into the margin
  // distance set. 0 disables the open-vocabulary sample.
  int open_vocab_sample = 0;
  uint64_t seed = 0;
  int threads = 1;
};

inline constexpr int kOpenVocabSampleCap = 10000;

// Distances from the class prototype to every embedded training instance of
// other classes and to every other source/target prototype (plus the
// optional open-vocabulary sample). Exact zeros are dropped.
std::vector<double> CollectMarginSamples(int class_index, const EmbeddingMatrix& w,
                                         const LabeledFeatures& data,
                                         const SemanticVocabulary& vocab,
                                         std::span<const int> extra_rows = {});

// Within-class distances ||W^T x_k - u_z|| that do not exceed the nearest
// foreign instance distance. Errors if the class has no instances.
std::vector<double> CollectCoverageSamples(int class_index, const EmbeddingMatrix& w,
                                           const LabeledFeatures& data,
                                           const SemanticVocabulary& vocab);

// Margin plus coverage radius per class, normalized to mean 1.
ClassWeights ComputeAllWeights(const EmbeddingMatrix& w, const LabeledFeatures& data,
                               const SemanticVocabulary& vocab, const EvtConfig& cfg = {});

}  // namespace wmvoc

#endif  // WMVOC_EVT_H_
