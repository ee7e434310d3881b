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

#ifndef WMVOC_OPTIONS_H_
#define WMVOC_OPTIONS_H_

#include <string>
#include <utility>
#include <vector>

#include "solver.h"

namespace wmvoc {

// Training options addressed by flat string keys, shared by the C API and
// the command-line tool.
//
//   alpha lambda epsilon margin_c normalize_triplet av bs method max_iters
//   lbfgs_memory grad_tol sgd_lr sgd_lr_halve_every batch_size
//   hybrid_switch_frac weight_rounds seed significance open_vocab_sample
//   threads
//
// Unknown keys and unparsable values throw kConfig. Range checks are left
// to TrainConfig::Validate.
void SetOption(TrainConfig* cfg, const std::string& key, const std::string& value);

const std::vector<std::string>& OptionKeys();

// Every option as (key, value), values printed so that SetOption reads back
// the identical setting.
std::vector<std::pair<std::string, std::string>> DescribeOptions(const TrainConfig& cfg);

}  // namespace wmvoc

#endif  // WMVOC_OPTIONS_H_
