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

#ifndef WMVOC_PARALLEL_H_
#define WMVOC_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace wmvoc {

// Number of worker threads used by ParallelFor when a caller passes 0.
int DefaultThreadCount();

// Runs body(chunk_index, begin, end) over [0, n) split into fixed-size
// chunks. The chunk layout depends only on n and chunk_size, never on the
// thread count, so callers that reduce per-chunk results in chunk order get
// bit-identical answers for any number of threads.
void ParallelFor(std::size_t n, std::size_t chunk_size, int threads,
                 const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

inline std::size_t ChunkCount(std::size_t n, std::size_t chunk_size) {
  return (n + chunk_size - 1) / chunk_size;
}

}  // namespace wmvoc

#endif  // WMVOC_PARALLEL_H_
