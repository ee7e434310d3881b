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

#include "solver.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>

#include "random.h"
#include "status.h"

namespace wmvoc {

void SolverConfig::Validate() const {
  Require(max_iters >= 1, ErrorCode::kConfig, "max_iters must be positive");
  Require(lbfgs_memory >= 1, ErrorCode::kConfig, "lbfgs_memory must be positive");
  Require(grad_tol > 0.0, ErrorCode::kConfig, "grad_tol must be positive");
  Require(sgd_lr > 0.0, ErrorCode::kConfig, "sgd_lr must be positive");
  Require(sgd_lr_halve_every >= 1, ErrorCode::kConfig, "sgd_lr_halve_every must be positive");
  Require(batch_size >= 1, ErrorCode::kConfig, "batch_size must be positive");
  Require(hybrid_switch_frac >= 0.0 && hybrid_switch_frac <= 1.0, ErrorCode::kConfig,
          "hybrid_switch_frac must lie in [0, 1]");
  Require(weight_rounds >= 1, ErrorCode::kConfig, "weight_rounds must be positive");
}

const char* SolverMethodName(SolverMethod m) {
  switch (m) {
    case SolverMethod::kLbfgs:
      return "lbfgs";
    case SolverMethod::kSgd:
      return "sgd";
    case SolverMethod::kHybrid:
      return "hybrid";
  }
  return "lbfgs";
}

SolverMethod ParseSolverMethod(const std::string& name) {
  if (name == "lbfgs") return SolverMethod::kLbfgs;
  if (name == "sgd") return SolverMethod::kSgd;
  if (name == "hybrid") return SolverMethod::kHybrid;
  Fail(ErrorCode::kConfig, "unknown solver method '" + name + "'");
}

std::string TrainTrace::ToLog() const {
  std::string out;
  char line[160];
  for (const auto& e : entries) {
    std::snprintf(line, sizeof(line), "iter=%d obj=%.17g gnorm=%.17g t=%.6f\n", e.iter,
                  e.objective, e.grad_norm, e.seconds);
    out += line;
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double Dot(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a.array() * b.array()).sum();
}

constexpr double kArmijo = 1e-4;
constexpr double kBacktrack = 0.5;
constexpr int kMaxBacktracks = 30;

}  // namespace

MinimizeResult LbfgsMinimize(const ValueGradFn& f, const EmbeddingMatrix& w0,
                             const SolverConfig& cfg, int max_iters) {
  cfg.Validate();
  if (max_iters < 0) max_iters = cfg.max_iters;
  Require(w0.allFinite(), ErrorCode::kNumerical, "initial W is not finite");
  const auto start = Clock::now();

  MinimizeResult res{w0, {}};
  LossValueGrad cur = f(res.w);
  Require(std::isfinite(cur.value) && cur.grad.allFinite(), ErrorCode::kNumerical,
          "objective is not finite at the initial point");
  double gnorm = cur.grad.norm();
  res.trace.entries.push_back({0, cur.value, gnorm, Since(start)});
  const double tol = cfg.grad_tol * gnorm;
  if (gnorm == 0.0) return res;

  std::deque<Eigen::MatrixXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  for (int k = 1; k <= max_iters && gnorm > tol; ++k) {
    // Two-loop recursion for d = -H g.
    Eigen::MatrixXd q = cur.grad;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * Dot(s_hist[i], q);
      q -= alpha[i] * y_hist[i];
    }
    double step = 1.0;
    if (!s_hist.empty()) {
      const double gamma = Dot(s_hist.back(), y_hist.back()) / y_hist.back().squaredNorm();
      q *= gamma;
      for (std::size_t i = 0; i < s_hist.size(); ++i) {
        const double beta = rho_hist[i] * Dot(y_hist[i], q);
        q += (alpha[i] - beta) * s_hist[i];
      }
    } else {
      step = std::min(1.0, 1.0 / gnorm);
    }
    Eigen::MatrixXd dir = -q;
    double slope = Dot(cur.grad, dir);
    if (!(slope < 0.0)) {
      // Not a descent direction: restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -cur.grad;
      slope = -gnorm * gnorm;
      step = std::min(1.0, 1.0 / gnorm);
    }

    bool accepted = false;
    Eigen::MatrixXd w_next;
    LossValueGrad next;
    for (int bt = 0; bt <= kMaxBacktracks; ++bt) {
      w_next = res.w + step * dir;
      next = f(w_next);
      if (std::isfinite(next.value) && next.value <= cur.value + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= kBacktrack;
    }
    if (!accepted) {
      res.trace.line_search_failed = true;
      break;
    }

    Eigen::MatrixXd s = w_next - res.w;
    Eigen::MatrixXd y = next.grad - cur.grad;
    const double sy = Dot(s, y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (static_cast<int>(s_hist.size()) == cfg.lbfgs_memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
    res.w = std::move(w_next);
    cur = std::move(next);
    gnorm = cur.grad.norm();
    res.trace.entries.push_back({k, cur.value, gnorm, Since(start)});
  }
  return res;
}

MinimizeResult SgdMinimize(const ValueGradFn& f, const BatchValueGradFn& f_batch,
                           std::size_t instance_count, const EmbeddingMatrix& w0,
                           const SolverConfig& cfg, int epochs) {
  cfg.Validate();
  if (epochs < 0) epochs = cfg.max_iters;
  Require(instance_count >= 1, ErrorCode::kInvalidArgument, "sgd: no instances");
  Require(w0.allFinite(), ErrorCode::kNumerical, "initial W is not finite");
  const auto start = Clock::now();

  MinimizeResult res{w0, {}};
  LossValueGrad full = f(res.w);
  const double initial = full.value;
  res.trace.entries.push_back({0, full.value, full.grad.norm(), Since(start)});

  Rng rng(cfg.seed);
  std::vector<int> order(instance_count);
  std::iota(order.begin(), order.end(), 0);
  std::size_t batch = std::min<std::size_t>(cfg.batch_size, instance_count);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double lr = cfg.sgd_lr * std::ldexp(1.0, -(epoch / cfg.sgd_lr_halve_every));
    for (std::size_t i = instance_count; i > 1; --i) {
      std::swap(order[i - 1], order[rng.Below(i)]);
    }
    for (std::size_t b = 0; b < instance_count; b += batch) {
      const std::size_t len = std::min(batch, instance_count - b);
      const LossValueGrad g = f_batch(res.w, std::span<const int>(order.data() + b, len));
      // Steps follow the per-instance mean so lr does not scale with N.
      res.w -= (lr / static_cast<double>(instance_count)) * g.grad;
    }
    full = f(res.w);
    res.trace.entries.push_back({epoch + 1, full.value, full.grad.norm(), Since(start)});
    Require(std::isfinite(full.value) && !(initial > 0.0 && full.value > 1e6 * initial),
            ErrorCode::kNumerical, "sgd diverged (objective grew beyond 1e6 x initial)");
    batch = std::min(batch * 2, instance_count);
  }
  return res;
}

MinimizeResult HybridMinimize(const ValueGradFn& f, const BatchValueGradFn& f_batch,
                              std::size_t instance_count, const EmbeddingMatrix& w0,
                              const SolverConfig& cfg) {
  cfg.Validate();
  const int sgd_epochs =
      static_cast<int>(std::lround(cfg.hybrid_switch_frac * static_cast<double>(cfg.max_iters)));
  const int lbfgs_iters = cfg.max_iters - sgd_epochs;
  if (sgd_epochs == 0) return LbfgsMinimize(f, w0, cfg, lbfgs_iters);

  MinimizeResult res = SgdMinimize(f, f_batch, instance_count, w0, cfg, sgd_epochs);
  if (lbfgs_iters == 0) return res;
  MinimizeResult tail = LbfgsMinimize(f, res.w, cfg, lbfgs_iters);
  const int offset = res.trace.entries.back().iter;
  const double t0 = res.trace.entries.back().seconds;
  // The L-BFGS start point duplicates the last SGD entry.
  for (std::size_t i = 1; i < tail.trace.entries.size(); ++i) {
    TraceEntry e = tail.trace.entries[i];
    e.iter += offset;
    e.seconds += t0;
    res.trace.entries.push_back(e);
  }
  res.trace.line_search_failed = tail.trace.line_search_failed;
  res.w = std::move(tail.w);
  return res;
}

void TrainConfig::Validate() const {
  loss.Validate();
  solver.Validate();
  Require(av_count >= 0 && bs_count >= 0, ErrorCode::kConfig,
          "neighbor counts must be nonnegative");
  Require(evt.significance > 0.0 && evt.significance < 1.0, ErrorCode::kConfig,
          "significance must lie in (0, 1)");
  Require(evt.open_vocab_sample >= 0 && evt.open_vocab_sample <= kOpenVocabSampleCap,
          ErrorCode::kConfig, "open_vocab_sample must lie in [0, 10000]");
}

TrainResult Train(const LabeledFeatures& data, const SemanticVocabulary& vocab,
                  const TrainConfig& cfg) {
  cfg.Validate();
  data.Validate();
  Require(static_cast<int>(vocab.source_ids().size()) == data.class_count, ErrorCode::kShape,
          "dataset class count does not match the vocabulary source set");

  TrainResult res;
  res.w = EmbeddingMatrix::Zero(data.feature_dim(), vocab.dim());
  res.weights = ClassWeights::Uniform(data.class_count);
  const NeighborSets neighbors = BuildNeighborSets(vocab, cfg.av_count, cfg.bs_count, cfg.threads);
  EvtConfig evt = cfg.evt;
  evt.threads = cfg.threads;

  for (int round = 0; round < cfg.solver.weight_rounds; ++round) {
    const Objective objective(data, vocab, neighbors, res.weights, cfg.loss, cfg.threads);
    ValueGradFn f = [&](const EmbeddingMatrix& w) { return objective.Evaluate(w); };
    BatchValueGradFn fb = [&](const EmbeddingMatrix& w, std::span<const int> rows) {
      return objective.EvaluateBatch(w, rows);
    };
    MinimizeResult step;
    switch (cfg.solver.method) {
      case SolverMethod::kLbfgs:
        step = LbfgsMinimize(f, res.w, cfg.solver);
        break;
      case SolverMethod::kSgd:
        step = SgdMinimize(f, fb, data.size(), res.w, cfg.solver);
        break;
      case SolverMethod::kHybrid:
        step = HybridMinimize(f, fb, data.size(), res.w, cfg.solver);
        break;
    }
    RoundSummary summary;
    summary.start_objective = step.trace.entries.front().objective;
    summary.end_objective = step.trace.entries.back().objective;
    const int offset = res.trace.entries.empty() ? 0 : res.trace.entries.back().iter + 1;
    const double t0 = res.trace.entries.empty() ? 0.0 : res.trace.entries.back().seconds;
    for (TraceEntry e : step.trace.entries) {
      e.iter += offset;
      e.seconds += t0;
      res.trace.entries.push_back(e);
    }
    res.trace.line_search_failed |= step.trace.line_search_failed;
    res.w = std::move(step.w);

    res.weights = ComputeAllWeights(res.w, data, vocab, evt);
    res.trace.evt_fallbacks += res.weights.fallback_count();
    summary.weights = res.weights;
    res.trace.rounds.push_back(std::move(summary));
  }
  return res;
}

}  // namespace wmvoc
