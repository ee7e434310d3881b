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

#ifndef WMVOC_SOLVER_H_
#define WMVOC_SOLVER_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "embedding.h"
#include "evt.h"
#include "loss.h"

namespace wmvoc {

enum class SolverMethod { kLbfgs, kSgd, kHybrid };

struct SolverConfig {
  SolverMethod method = SolverMethod::kLbfgs;
  int max_iters = 100;
  int lbfgs_memory = 10;
  // Stop once ||grad|| <= grad_tol * ||grad at W0||.
  double grad_tol = 1e-6;
  double sgd_lr = 1e-3;
  int sgd_lr_halve_every = 10;
  int batch_size = 32;
  // Share of max_iters spent in SGD epochs before handing over to L-BFGS.
  double hybrid_switch_frac = 0.3;
  int weight_rounds = 2;
  uint64_t seed = 0;

  void Validate() const;
};

const char* SolverMethodName(SolverMethod m);
SolverMethod ParseSolverMethod(const std::string& name);

struct TraceEntry {
  int iter = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double seconds = 0.0;
};

struct RoundSummary {
  double start_objective = 0.0;
  double end_objective = 0.0;
  ClassWeights weights;  // computed from this round's W
};

struct TrainTrace {
  std::vector<TraceEntry> entries;
  std::vector<RoundSummary> rounds;
  bool line_search_failed = false;
  int evt_fallbacks = 0;

  // One `iter=<k> obj=<v> gnorm=<g> t=<sec>` line per entry.
  std::string ToLog() const;
};

using ValueGradFn = std::function<LossValueGrad(const EmbeddingMatrix&)>;
using BatchValueGradFn = std::function<LossValueGrad(const EmbeddingMatrix&, std::span<const int>)>;

struct MinimizeResult {
  EmbeddingMatrix w;
  TrainTrace trace;
};

// Limited-memory BFGS with backtracking Armijo line search (c1 = 1e-4,
// factor 0.5, at most 30 backtracks). Accepted iterates never increase the
// objective. A failed line search stops early and sets line_search_failed.
MinimizeResult LbfgsMinimize(const ValueGradFn& f, const EmbeddingMatrix& w0,
                             const SolverConfig& cfg, int max_iters = -1);

// Mini-batch SGD over `instance_count` instances for `epochs` epochs
// (default max_iters). The learning rate halves every sgd_lr_halve_every
// epochs and the batch size doubles each epoch up to the full set. Steps
// use the batch gradient divided by instance_count. Throws
// kNumerical when the objective exceeds 1e6 times its initial value.
MinimizeResult SgdMinimize(const ValueGradFn& f, const BatchValueGradFn& f_batch,
                           std::size_t instance_count, const EmbeddingMatrix& w0,
                           const SolverConfig& cfg, int epochs = -1);

// SGD for round(hybrid_switch_frac * max_iters) epochs, then L-BFGS for the
// remaining iterations.
MinimizeResult HybridMinimize(const ValueGradFn& f, const BatchValueGradFn& f_batch,
                              std::size_t instance_count, const EmbeddingMatrix& w0,
                              const SolverConfig& cfg);

struct TrainConfig {
  LossConfig loss;
  SolverConfig solver;
  EvtConfig evt;
  int av_count = 5;
  int bs_count = 5;
  int threads = 1;

  void Validate() const;
};

struct TrainResult {
  EmbeddingMatrix w;
  ClassWeights weights;
  TrainTrace trace;
};

// Block-coordinate training: W starts at zero and the class weights at 1;
// each round minimizes the objective in W (warm-started from the previous
// round) and then refits the class weights on the new embedding.
TrainResult Train(const LabeledFeatures& data, const SemanticVocabulary& vocab,
                  const TrainConfig& cfg);

}  // namespace wmvoc

#endif  // WMVOC_SOLVER_H_
