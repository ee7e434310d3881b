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

#include "loss.h"

#include <cmath>
#include <numeric>
#include <string>

#include "parallel.h"
#include "status.h"

namespace wmvoc {

void LossConfig::Validate() const {
  Require(alpha >= 0.0 && alpha <= 1.0, ErrorCode::kConfig, "alpha must lie in [0, 1]");
  Require(lambda_reg >= 0.0 && std::isfinite(lambda_reg), ErrorCode::kConfig,
          "lambda must be nonnegative");
  Require(epsilon >= 0.0 && std::isfinite(epsilon), ErrorCode::kConfig,
          "epsilon must be nonnegative");
  Require(margin_c >= 0.0 && std::isfinite(margin_c), ErrorCode::kConfig,
          "margin_c must be nonnegative");
}

namespace {

void CheckShapes(const EmbeddingMatrix& w, int p, int d) {
  Require(w.rows() == p && w.cols() == d, ErrorCode::kShape,
          "W is " + std::to_string(w.rows()) + "x" + std::to_string(w.cols()) + ", expected " +
              std::to_string(p) + "x" + std::to_string(d));
}

// Tube loss for one instance: sum_j max(0, |r_j| - tube)^2. Adds the
// gradient w.r.t. the embedded point into grad_e, scaled by `scale`.
double TubeLoss(const double* e, const double* u, int dim, double tube, double scale,
                double* grad_e) {
  double value = 0.0;
  for (int j = 0; j < dim; ++j) {
    const double r = e[j] - u[j];
    const double excess = std::abs(r) - tube;
    if (excess > 0.0) {
      value += excess * excess;
      // Subgradient of |r| at r == 0 is taken as 0; excess > 0 there only
      // when tube == 0, where the term is zero anyway.
      const double sign = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
      grad_e[j] += scale * 2.0 * excess * sign;
    }
  }
  return value;
}

// Triplet sum for one instance against `others`:
//   1/2 sum hinge^2(C + D(e,u_z)/2 - D(e,u_o)/2)
// The quadratic parts cancel: the argument equals
//   C + e.(u_o - u_z) + (|u_z|^2 - |u_o|^2)/2.
double TripletLoss(const double* e, const SemanticVocabulary& vocab, int self_row,
                   std::span<const int> others, const LossConfig& cfg, double scale,
                   double* grad_e) {
  if (others.empty()) return 0.0;
  const int dim = vocab.dim();
  const double* uz = vocab.prototype(self_row).data();
  const double norm = cfg.normalize_triplet ? 1.0 / static_cast<double>(others.size()) : 1.0;
  double value = 0.0;
  for (int o : others) {
    const double* uo = vocab.prototype(o).data();
    const double arg = cfg.margin_c + 0.5 * SqDistance(e, uz, dim) - 0.5 * SqDistance(e, uo, dim);
    if (arg <= 0.0) continue;
    const HingeValue h = SmoothHingeSq(arg);
    value += 0.5 * norm * h.value;
    // d arg / d e = (e - u_z) - (e - u_o) = u_o - u_z.
    const double coef = scale * 0.5 * norm * h.derivative;
    for (int j = 0; j < dim; ++j) grad_e[j] += coef * (uo[j] - uz[j]);
  }
  return value;
}

LossValueGrad SingleInstanceTriplet(const EmbeddingMatrix& w, const Eigen::Ref<const Vector>& x,
                                    int class_index, std::span<const int> ids,
                                    const SemanticVocabulary& vocab, const LossConfig& cfg,
                                    bool open_side) {
  cfg.Validate();
  CheckShapes(w, static_cast<int>(x.size()), vocab.dim());
  Require(class_index >= 0 && class_index < static_cast<int>(vocab.source_ids().size()),
          ErrorCode::kInvalidArgument, "class index out of range");
  const int self = vocab.source_ids()[class_index];
  for (int id : ids) {
    Require(id >= 0 && id < static_cast<int>(vocab.size()), ErrorCode::kInvalidArgument,
            "neighbor id out of range");
    if (open_side) {
      Require(!vocab.IsSource(id), ErrorCode::kInvalidArgument,
              "open-vocabulary neighbor '" + vocab.label(id) + "' is a source class");
    } else {
      Require(vocab.IsSource(id) && id != self, ErrorCode::kInvalidArgument,
              "source neighbor must be a different source class");
    }
  }
  const Vector e = w.transpose() * x;
  Vector grad_e = Vector::Zero(vocab.dim());
  LossValueGrad out;
  out.value = TripletLoss(e.data(), vocab, self, ids, cfg, 1.0, grad_e.data());
  out.grad = x * grad_e.transpose();
  return out;
}

}  // namespace

LossValueGrad DataTerm(const EmbeddingMatrix& w, const LabeledFeatures& data,
                       const SemanticVocabulary& vocab, const ClassWeights& weights,
                       const LossConfig& cfg) {
  cfg.Validate();
  data.Validate();
  CheckShapes(w, data.feature_dim(), vocab.dim());
  Require(static_cast<int>(weights.size()) >= data.class_count, ErrorCode::kInvalidArgument,
          "missing class weight");
  const int dim = vocab.dim();
  const RowMatrix embedded = data.features * w;
  RowMatrix grad_e = RowMatrix::Zero(embedded.rows(), dim);
  LossValueGrad out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int z = data.labels[i];
    const int row = vocab.source_ids()[z];
    out.value += TubeLoss(embedded.row(i).data(), vocab.prototype(row).data(), dim,
                          weights.weight(z) * cfg.epsilon, 1.0, grad_e.row(i).data());
  }
  out.grad = data.features.transpose() * grad_e;
  return out;
}

LossValueGrad TripletTermOpen(const EmbeddingMatrix& w, const Eigen::Ref<const Vector>& x,
                              int class_index, std::span<const int> av_ids,
                              const SemanticVocabulary& vocab, const LossConfig& cfg) {
  return SingleInstanceTriplet(w, x, class_index, av_ids, vocab, cfg, true);
}

LossValueGrad TripletTermSource(const EmbeddingMatrix& w, const Eigen::Ref<const Vector>& x,
                                int class_index, std::span<const int> bs_ids,
                                const SemanticVocabulary& vocab, const LossConfig& cfg) {
  return SingleInstanceTriplet(w, x, class_index, bs_ids, vocab, cfg, false);
}

Objective::Objective(const LabeledFeatures& data, const SemanticVocabulary& vocab,
                     const NeighborSets& neighbors, const ClassWeights& weights,
                     const LossConfig& cfg, int threads)
    : data_(data),
      vocab_(vocab),
      neighbors_(neighbors),
      weights_(weights),
      cfg_(cfg),
      threads_(threads) {
  cfg_.Validate();
  data_.Validate();
  const auto classes = vocab_.source_ids().size();
  Require(static_cast<int>(classes) == data_.class_count, ErrorCode::kShape,
          "dataset class count does not match the vocabulary source set");
  Require(weights_.size() == classes, ErrorCode::kInvalidArgument, "missing class weight");
  Require(neighbors_.av_ids.size() == classes && neighbors_.bs_ids.size() == classes,
          ErrorCode::kInvalidArgument, "neighbor sets do not cover every source class");
  for (std::size_t c = 0; c < classes; ++c) {
    for (int a : neighbors_.av_ids[c]) {
      Require(!vocab_.IsSource(a), ErrorCode::kInvalidArgument,
              "open-vocabulary neighbor is a source class");
    }
    for (int b : neighbors_.bs_ids[c]) {
      Require(vocab_.IsSource(b) && b != vocab_.source_ids()[c], ErrorCode::kInvalidArgument,
              "source neighbor must be a different source class");
    }
  }
}

double Objective::InstanceLoss(std::size_t i, const double* e, double* grad_e) const {
  const int z = data_.labels[i];
  const int self = vocab_.source_ids()[z];
  const int dim = vocab_.dim();
  double value = 0.0;
  if (cfg_.alpha > 0.0) {
    value += cfg_.alpha * TubeLoss(e, vocab_.prototype(self).data(), dim,
                                   weights_.weight(z) * cfg_.epsilon, cfg_.alpha, grad_e);
  }
  const double beta = 1.0 - cfg_.alpha;
  if (beta > 0.0) {
    value += beta * TripletLoss(e, vocab_, self, neighbors_.av_ids[z], cfg_, beta, grad_e);
    value += beta * TripletLoss(e, vocab_, self, neighbors_.bs_ids[z], cfg_, beta, grad_e);
  }
  return value;
}

LossValueGrad Objective::Accumulate(const EmbeddingMatrix& w, std::span<const int> rows,
                                    double scale) const {
  CheckShapes(w, data_.feature_dim(), vocab_.dim());
  const bool all = rows.empty();
  const std::size_t n = all ? data_.size() : rows.size();
  const std::size_t chunks = ChunkCount(n, kChunkSize);
  std::vector<double> values(chunks, 0.0);
  std::vector<Eigen::MatrixXd> grads(chunks);

  ParallelFor(n, kChunkSize, threads_, [&](std::size_t c, std::size_t begin, std::size_t end) {
    const Eigen::Index count = static_cast<Eigen::Index>(end - begin);
    RowMatrix x;
    if (all) {
      x = data_.features.middleRows(static_cast<Eigen::Index>(begin), count);
    } else {
      x.resize(count, data_.features.cols());
      for (Eigen::Index r = 0; r < count; ++r) x.row(r) = data_.features.row(rows[begin + r]);
    }
    const RowMatrix embedded = x * w;
    RowMatrix grad_e = RowMatrix::Zero(count, vocab_.dim());
    double value = 0.0;
    for (Eigen::Index r = 0; r < count; ++r) {
      const std::size_t i = all ? begin + r : static_cast<std::size_t>(rows[begin + r]);
      value += InstanceLoss(i, embedded.row(r).data(), grad_e.row(r).data());
    }
    values[c] = value;
    grads[c] = x.transpose() * grad_e;
  });

  LossValueGrad out;
  out.grad = Eigen::MatrixXd::Zero(w.rows(), w.cols());
  for (std::size_t c = 0; c < chunks; ++c) {
    out.value += values[c];
    out.grad += grads[c];
  }
  if (scale != 1.0) {
    out.value *= scale;
    out.grad *= scale;
  }
  if (cfg_.lambda_reg > 0.0) {
    out.value += cfg_.lambda_reg * w.squaredNorm();
    out.grad += 2.0 * cfg_.lambda_reg * w;
  }
  return out;
}

LossValueGrad Objective::Evaluate(const EmbeddingMatrix& w) const { return Accumulate(w, {}, 1.0); }

LossValueGrad Objective::EvaluateBatch(const EmbeddingMatrix& w, std::span<const int> rows) const {
  Require(!rows.empty(), ErrorCode::kInvalidArgument, "empty batch");
  for (int r : rows) {
    Require(r >= 0 && r < static_cast<int>(data_.size()), ErrorCode::kInvalidArgument,
            "batch row out of range");
  }
  return Accumulate(w, rows, static_cast<double>(data_.size()) / static_cast<double>(rows.size()));
}

}  // namespace wmvoc
