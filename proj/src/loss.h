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

#ifndef WMVOC_LOSS_H_
#define WMVOC_LOSS_H_

#include <span>

#include "embedding.h"
#include "evt.h"

namespace wmvoc {

struct LossConfig {
  double alpha = 0.6;       // data term share; (1 - alpha) goes to the triplet terms
  double lambda_reg = 0.01;  // Frobenius regularizer
  double epsilon = 0.1;     // tube half-width, scaled per class by w_z
  double margin_c = 1.0;    // margin gap C
  // Divide each triplet sum by its neighbor count. Off by default.
  bool normalize_triplet = false;

  void Validate() const;
};

struct LossValueGrad {
  double value = 0.0;
  Eigen::MatrixXd grad;  // same shape as W
};

struct HingeValue {
  double value;
  double derivative;
};

// Squared hinge max(0, t)^2 and its derivative 2 max(0, t).
inline HingeValue SmoothHingeSq(double t) {
  const double h = t > 0.0 ? t : 0.0;
  return {h * h, 2.0 * h};
}

// Weighted epsilon-insensitive squared tube loss summed over instances and
// coordinates, with its gradient. No alpha, no regularizer.
LossValueGrad DataTerm(const EmbeddingMatrix& w, const LabeledFeatures& data,
                       const SemanticVocabulary& vocab, const ClassWeights& weights,
                       const LossConfig& cfg);

// 1/2 sum_a hinge^2(C + D(x,u_z)/2 - D(x,u_a)/2) over neighbors outside the
// source set. `class_index` indexes source_ids.
LossValueGrad TripletTermOpen(const EmbeddingMatrix& w, const Eigen::Ref<const Vector>& x,
                              int class_index, std::span<const int> av_ids,
                              const SemanticVocabulary& vocab, const LossConfig& cfg);

// Same form over other source prototypes.
LossValueGrad TripletTermSource(const EmbeddingMatrix& w, const Eigen::Ref<const Vector>& x,
                                int class_index, std::span<const int> bs_ids,
                                const SemanticVocabulary& vocab, const LossConfig& cfg);

// The combined objective
//   sum_i [alpha L_eps(x_i) + (1 - alpha)(M_V + M_S)(x_i)] + lambda ||W||_F^2
// with its analytic gradient. Instances are processed in fixed chunks whose
// partial sums are added in chunk order, so the result does not depend on
// the thread count.
class Objective {
 public:
  Objective(const LabeledFeatures& data, const SemanticVocabulary& vocab,
            const NeighborSets& neighbors, const ClassWeights& weights, const LossConfig& cfg,
            int threads = 1);
  // The objective keeps references to its inputs.
  Objective(const LabeledFeatures&, const SemanticVocabulary&, const NeighborSets&,
            ClassWeights&&, const LossConfig&, int = 1) = delete;

  LossValueGrad Evaluate(const EmbeddingMatrix& w) const;
  // Instance sum over `rows` rescaled by N / |rows|, plus the full
  // regularizer: an unbiased estimate of Evaluate.
  LossValueGrad EvaluateBatch(const EmbeddingMatrix& w, std::span<const int> rows) const;

  std::size_t instance_count() const { return data_.size(); }
  int rows() const { return data_.feature_dim(); }
  int cols() const { return vocab_.dim(); }

  static constexpr std::size_t kChunkSize = 128;

 private:
  // Adds the loss of instance `i` given e = W^T x_i; writes dLoss/de.
  double InstanceLoss(std::size_t i, const double* e, double* grad_e) const;
  LossValueGrad Accumulate(const EmbeddingMatrix& w, std::span<const int> rows,
                           double scale) const;

  const LabeledFeatures& data_;
  const SemanticVocabulary& vocab_;
  const NeighborSets& neighbors_;
  const ClassWeights& weights_;
  LossConfig cfg_;
  int threads_;
};

}  // namespace wmvoc

#endif  // WMVOC_LOSS_H_
