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

#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "embedding.h"
#include "oracles.h"
#include "random.h"
#include "status.h"
#include "test_util.h"

namespace wmvoc {
namespace {

using testing::RandomMatrix;
using testing::RandomVocab;
using testing::RandomW;

TEST(VocabularyTest, NormalizesRowsByDefault) {
  Rng rng(1);
  SemanticVocabulary v(testing::Labels("a", 20), RandomMatrix(rng, 20, 7));
  EXPECT_TRUE(v.normalized());
  for (int r = 0; r < 20; ++r) EXPECT_NEAR(v.prototype(r).norm(), 1.0, 1e-12);
}

TEST(VocabularyTest, KeepsRawVectorsWhenNormalizationIsOff) {
  RowMatrix m(2, 2);
  m << 3, 4, 0, 2;
  SemanticVocabulary v({"x", "y"}, m, false);
  EXPECT_FALSE(v.normalized());
  EXPECT_EQ(v.prototype(0)(1), 4.0);
}

TEST(VocabularyTest, RejectsInvalidInput) {
  RowMatrix m(2, 2);
  m << 1, 0, 0, 1;
  EXPECT_THROW(SemanticVocabulary({"x", "x"}, m), Error);
  RowMatrix z(1, 2);
  z << 0, 0;
  EXPECT_THROW(SemanticVocabulary({"z"}, z, true), Error);
  RowMatrix bad(1, 2);
  bad << 1, std::nan("");
  EXPECT_THROW(SemanticVocabulary({"n"}, bad, false), Error);
}

TEST(VocabularyTest, ClassListsMustBeDisjoint) {
  Rng rng(2);
  SemanticVocabulary v(testing::Labels("a", 5), RandomMatrix(rng, 5, 3));
  EXPECT_THROW(v.SetClasses({0, 1}, {1, 2}), Error);
  EXPECT_THROW(v.SetClasses({0, 7}, {}), Error);
  v.SetClasses({3, 1}, {4});
  EXPECT_EQ(v.SourceClassOf(3), 0);
  EXPECT_EQ(v.SourceClassOf(1), 1);
  EXPECT_EQ(v.SourceClassOf(4), -1);
  EXPECT_TRUE(v.IsSource(1));
  EXPECT_FALSE(v.IsSource(4));
}

TEST(VocabularyTest, LookupByLabel) {
  Rng rng(3);
  SemanticVocabulary v({"cat", "dog"}, RandomMatrix(rng, 2, 3));
  EXPECT_EQ(v.Find("dog"), 1);
  EXPECT_FALSE(v.Find("cow").has_value());
  try {
    v.IndexOf("cow");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat);
    EXPECT_NE(std::string(e.what()).find("cow"), std::string::npos);
  }
}

TEST(VocabularyTest, SubsetRemapsClassesAndSynsets) {
  Rng rng(4);
  SemanticVocabulary v = RandomVocab(rng, 6, 3, 2, 1);
  v.SetSynsets({{0, {0, 4}}, {1, {1, 5}}});
  const std::vector<int> rows = {0, 1, 2, 4};
  SemanticVocabulary s = v.Subset(rows);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s.label(3), v.label(4));
  EXPECT_EQ(s.source_ids(), (std::vector<int>{0, 1}));
  EXPECT_EQ(s.target_ids(), (std::vector<int>{2}));
  EXPECT_EQ(*s.Synset(0), (std::vector<int>{0, 3}));
  EXPECT_EQ(*s.Synset(1), (std::vector<int>{1}));
  EXPECT_EQ(s.prototype(3), v.prototype(4));
}

TEST(ProjectTest, ClosedFormCases) {
  Eigen::Vector2d x(3, 4);
  EXPECT_EQ(Project(Eigen::MatrixXd::Zero(2, 2), x), Vector::Zero(2));
  EXPECT_EQ(Project(Eigen::MatrixXd::Identity(2, 2), x), x);
  Eigen::MatrixXd w(2, 2);
  w << 1, 0, 0, 2;
  EXPECT_EQ(Project(w, x), Eigen::Vector2d(3, 8));
  EXPECT_THROW(Project(Eigen::MatrixXd::Zero(3, 2), x), Error);
}

TEST(ProjectTest, IsLinear) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd w = RandomW(rng, 6, 4);
    const Vector x = RandomMatrix(rng, 1, 6).row(0).transpose();
    const Vector y = RandomMatrix(rng, 1, 6).row(0).transpose();
    const double a = rng.Normal(), b = rng.Normal();
    const Vector lhs = Project(w, a * x + b * y);
    const Vector rhs = a * Project(w, x) + b * Project(w, y);
    EXPECT_LE((lhs - rhs).norm(), 1e-10 * std::max(1.0, rhs.norm()));
  }
}

TEST(ProjectTest, BatchRowsAreBitIdenticalToSingleProjection) {
  Rng rng(6);
  const Eigen::MatrixXd w = RandomW(rng, 9, 5);
  const RowMatrix x = RandomMatrix(rng, 33, 9);
  const RowMatrix e = EmbedRows(x, w);
  for (int i = 0; i < 33; ++i) {
    const Vector single = Project(w, x.row(i).transpose());
    for (int j = 0; j < 5; ++j) EXPECT_EQ(e(i, j), single(j));
    const auto oracle = oracle::Embed(w, x, i);
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(e(i, j), oracle[j], 1e-12);
  }
}

TEST(SqDistanceTest, ClosedFormAndOracle) {
  const double a[2] = {0, 0}, b[2] = {3, 4};
  EXPECT_EQ(SqDistance(a, b, 2), 25.0);
  EXPECT_EQ(SqDistance(b, b, 2), 0.0);
  EXPECT_THROW(SqDistance(std::span<const double>(a, 2), std::span<const double>(b, 1)), Error);
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 1 + static_cast<int>(rng.Below(13));
    std::vector<double> u(dim), v(dim);
    double naive = 0.0;
    for (int j = 0; j < dim; ++j) {
      u[j] = rng.Normal();
      v[j] = rng.Normal();
      naive += (u[j] - v[j]) * (u[j] - v[j]);
    }
    EXPECT_NEAR(SqDistance(u.data(), v.data(), dim), naive, 1e-12);
    EXPECT_EQ(SqDistance(u.data(), v.data(), dim), SqDistance(v.data(), u.data(), dim));
  }
}

TEST(SqDistanceTest, TriangleInequalityOnRoots) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const RowMatrix m = RandomMatrix(rng, 3, 6);
    const double ab = std::sqrt(SqDistance(m.row(0).data(), m.row(1).data(), 6));
    const double bc = std::sqrt(SqDistance(m.row(1).data(), m.row(2).data(), 6));
    const double ac = std::sqrt(SqDistance(m.row(0).data(), m.row(2).data(), 6));
    EXPECT_LE(ac, ab + bc + 1e-12);
  }
}

TEST(NearestPrototypesTest, TrivialCases) {
  Rng rng(9);
  SemanticVocabulary v = RandomVocab(rng, 10, 4, 3, 2);
  const std::vector<int> one = {6};
  std::vector<double> q(4);
  for (double& x : q) x = rng.Normal();
  EXPECT_EQ(NearestPrototypes(q, v, one, 1), one);
  const std::vector<double> on(v.prototype(8).data(), v.prototype(8).data() + 4);
  std::vector<int> all(10);
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(NearestPrototypes(on, v, all, 1), std::vector<int>{8});
  EXPECT_THROW(NearestPrototypes(q, v, std::vector<int>{}, 1), Error);
}

TEST(NearestPrototypesTest, MatchesLinearScanOracle) {
  Rng rng(10);
  SemanticVocabulary v = RandomVocab(rng, 1000, 8, 0, 0);
  std::vector<int> all(1000);
  std::iota(all.begin(), all.end(), 0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> q(8);
    for (double& x : q) x = rng.Normal();
    const auto got = NearestPrototypes(q, v, all, 5);
    const auto want = oracle::BruteForceKnn(q, v.vectors(), 5);
    ASSERT_EQ(got.size(), 5u);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(got[i], want[i].first);
  }
}

TEST(NearestPrototypesTest, TiesGoToLowestIndexUnderPermutation) {
  RowMatrix m(4, 2);
  m << 1, 0, 0, 1, 1, 0, -1, 0;
  SemanticVocabulary v(testing::Labels("t", 4), m, false);
  const std::vector<double> q = {1, 0};
  std::vector<int> ids = {3, 2, 1, 0};
  EXPECT_EQ(NearestPrototypes(q, v, ids, 2), (std::vector<int>{0, 2}));
  std::reverse(ids.begin(), ids.end());
  EXPECT_EQ(NearestPrototypes(q, v, ids, 2), (std::vector<int>{0, 2}));
}

TEST(TopKScanTest, ParallelChunkedScanEqualsSerialScan) {
  Rng rng(11);
  const int rows = static_cast<int>(kParallelScanRows) + 20001;
  RowMatrix table = RandomMatrix(rng, rows, 6);
  // Duplicate rows across chunk boundaries to exercise the tie rule.
  table.row(rows - 1) = table.row(5);
  table.row(kScanChunkRows + 3) = table.row(5);
  std::vector<int> ids(rows);
  std::iota(ids.begin(), ids.end(), 0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> q(6);
    for (double& x : q) x = rng.Normal();
    if (trial == 0) {
      for (int j = 0; j < 6; ++j) q[j] = table(5, j);
    }
    const auto serial = TopKScan(q.data(), table, ids, 10, 1);
    const auto parallel = TopKScan(q.data(), table, ids, 10, 4);
    const auto want = oracle::BruteForceKnn(q, table, 10);
    ASSERT_EQ(serial.size(), 10u);
    ASSERT_EQ(parallel.size(), 10u);
    for (int i = 0; i < 10; ++i) {
      EXPECT_EQ(serial[i].id, parallel[i].id);
      EXPECT_EQ(serial[i].distance, parallel[i].distance);
      EXPECT_EQ(serial[i].id, want[i].first);
    }
    if (trial == 0) {
      EXPECT_EQ(serial[0].id, 5);
      EXPECT_EQ(serial[1].id, static_cast<int>(kScanChunkRows) + 3);
      EXPECT_EQ(serial[2].id, rows - 1);
    }
  }
}

TEST(NeighborSetsTest, EmptyWhenCountsAreZero) {
  Rng rng(12);
  SemanticVocabulary v = RandomVocab(rng, 12, 4, 4, 3);
  const NeighborSets n = BuildNeighborSets(v, 0, 0);
  ASSERT_EQ(n.av_ids.size(), 4u);
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_TRUE(n.av_ids[c].empty());
    EXPECT_TRUE(n.bs_ids[c].empty());
  }
}

TEST(NeighborSetsTest, ExhaustsSmallOpenSet) {
  Rng rng(13);
  SemanticVocabulary v = RandomVocab(rng, 5, 4, 3, 2);
  const NeighborSets n = BuildNeighborSets(v, 2, 5);
  for (int c = 0; c < 3; ++c) {
    ASSERT_EQ(n.av_ids[c].size(), 2u);
    std::vector<int> sorted = n.av_ids[c];
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, (std::vector<int>{3, 4}));
    const double d0 = SqDistance(v.prototype(c).data(), v.prototype(n.av_ids[c][0]).data(), 4);
    const double d1 = SqDistance(v.prototype(c).data(), v.prototype(n.av_ids[c][1]).data(), 4);
    EXPECT_LE(d0, d1);
    EXPECT_EQ(n.bs_ids[c].size(), 2u);
    for (int b : n.bs_ids[c]) EXPECT_NE(b, c);
  }
}

TEST(NeighborSetsTest, MatchesLinearScanOracle) {
  Rng rng(14);
  SemanticVocabulary v = RandomVocab(rng, 120, 6, 50, 10);
  const NeighborSets n = BuildNeighborSets(v, 5, 5);
  for (int c = 0; c < 50; ++c) {
    std::vector<double> u(v.prototype(c).data(), v.prototype(c).data() + 6);
    const auto ranked = oracle::BruteForceKnn(u, v.vectors(), 120);
    std::vector<int> want_av, want_bs;
    for (const auto& [row, dist] : ranked) {
      if (row >= 50 && want_av.size() < 5) want_av.push_back(row);
      if (row < 50 && row != c && want_bs.size() < 5) want_bs.push_back(row);
    }
    EXPECT_EQ(n.av_ids[c], want_av);
    EXPECT_EQ(n.bs_ids[c], want_bs);
  }
}

TEST(LabeledFeaturesTest, Validation) {
  LabeledFeatures d;
  EXPECT_THROW(d.Validate(), Error);
  d.features = RowMatrix::Ones(2, 3);
  d.labels = {0, 2};
  d.class_count = 2;
  EXPECT_THROW(d.Validate(), Error);
  d.labels = {0, 1};
  EXPECT_NO_THROW(d.Validate());
  d.features(1, 1) = std::nan("");
  EXPECT_THROW(d.Validate(), Error);
}

}  // namespace
}  // namespace wmvoc
