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

#include "options.h"

#include <charconv>
#include <cstdio>

#include "status.h"

namespace wmvoc {

namespace {

[[noreturn]] void BadValue(const std::string& key, const std::string& value) {
  Fail(ErrorCode::kConfig, "invalid value '" + value + "' for option '" + key + "'");
}

double ToDouble(const std::string& key, const std::string& value) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) BadValue(key, value);
  return v;
}

template <typename Int>
Int ToInt(const std::string& key, const std::string& value) {
  Int v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) BadValue(key, value);
  return v;
}

bool ToBool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "on" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "off" || value == "no") return false;
  BadValue(key, value);
}

// Shortest decimal form that reads back to the same double.
std::string Num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

void SetOption(TrainConfig* cfg, const std::string& key, const std::string& value) {
  if (key == "alpha") cfg->loss.alpha = ToDouble(key, value);
  else if (key == "lambda") cfg->loss.lambda_reg = ToDouble(key, value);
  else if (key == "epsilon") cfg->loss.epsilon = ToDouble(key, value);
  else if (key == "margin_c") cfg->loss.margin_c = ToDouble(key, value);
  else if (key == "normalize_triplet") cfg->loss.normalize_triplet = ToBool(key, value);
  else if (key == "av") cfg->av_count = ToInt<int>(key, value);
  else if (key == "bs") cfg->bs_count = ToInt<int>(key, value);
  else if (key == "method") cfg->solver.method = ParseSolverMethod(value);
  else if (key == "max_iters") cfg->solver.max_iters = ToInt<int>(key, value);
  else if (key == "lbfgs_memory") cfg->solver.lbfgs_memory = ToInt<int>(key, value);
  else if (key == "grad_tol") cfg->solver.grad_tol = ToDouble(key, value);
  else if (key == "sgd_lr") cfg->solver.sgd_lr = ToDouble(key, value);
  else if (key == "sgd_lr_halve_every") cfg->solver.sgd_lr_halve_every = ToInt<int>(key, value);
  else if (key == "batch_size") cfg->solver.batch_size = ToInt<int>(key, value);
  else if (key == "hybrid_switch_frac") cfg->solver.hybrid_switch_frac = ToDouble(key, value);
  else if (key == "weight_rounds") cfg->solver.weight_rounds = ToInt<int>(key, value);
  else if (key == "seed") {
    cfg->solver.seed = ToInt<uint64_t>(key, value);
    cfg->evt.seed = cfg->solver.seed;
  } else if (key == "significance") cfg->evt.significance = ToDouble(key, value);
  else if (key == "open_vocab_sample") cfg->evt.open_vocab_sample = ToInt<int>(key, value);
  else if (key == "threads") {
    cfg->threads = ToInt<int>(key, value);
    cfg->evt.threads = cfg->threads;
  } else {
    Fail(ErrorCode::kConfig, "unknown option '" + key + "'");
  }
}

const std::vector<std::string>& OptionKeys() {
  static const std::vector<std::string> keys = {
      "alpha",        "lambda",        "epsilon",      "margin_c",
      "normalize_triplet", "av",       "bs",           "method",
      "max_iters",    "lbfgs_memory",  "grad_tol",     "sgd_lr",
      "sgd_lr_halve_every", "batch_size", "hybrid_switch_frac", "weight_rounds",
      "seed",         "significance",  "open_vocab_sample", "threads"};
  return keys;
}

std::vector<std::pair<std::string, std::string>> DescribeOptions(const TrainConfig& cfg) {
  return {
      {"alpha", Num(cfg.loss.alpha)},
      {"lambda", Num(cfg.loss.lambda_reg)},
      {"epsilon", Num(cfg.loss.epsilon)},
      {"margin_c", Num(cfg.loss.margin_c)},
      {"normalize_triplet", cfg.loss.normalize_triplet ? "true" : "false"},
      {"av", std::to_string(cfg.av_count)},
      {"bs", std::to_string(cfg.bs_count)},
      {"method", SolverMethodName(cfg.solver.method)},
      {"max_iters", std::to_string(cfg.solver.max_iters)},
      {"lbfgs_memory", std::to_string(cfg.solver.lbfgs_memory)},
      {"grad_tol", Num(cfg.solver.grad_tol)},
      {"sgd_lr", Num(cfg.solver.sgd_lr)},
      {"sgd_lr_halve_every", std::to_string(cfg.solver.sgd_lr_halve_every)},
      {"batch_size", std::to_string(cfg.solver.batch_size)},
      {"hybrid_switch_frac", Num(cfg.solver.hybrid_switch_frac)},
      {"weight_rounds", std::to_string(cfg.solver.weight_rounds)},
      {"seed", std::to_string(cfg.solver.seed)},
      {"significance", Num(cfg.evt.significance)},
      {"open_vocab_sample", std::to_string(cfg.evt.open_vocab_sample)},
      {"threads", std::to_string(cfg.threads)},
  };
}

}  // namespace wmvoc
