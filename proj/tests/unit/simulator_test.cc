// Copyright 2026 The Elicit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "elicit/simulator.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "audit.h"
#include "elicit/analytics.h"
#include "elicit/csv.h"
#include "test_support.h"

namespace elicit {
namespace {

using testing::ReadText;
using testing::TempDir;

SimConfig Small() {
  SimConfig c;
  c.num_users = 50;
  c.num_movies = 200;
  c.horizon_days = 90;
  c.y = 1;
  c.background_max_ratings = 300;
  c.initial_rated_mean = 10;
  c.seed = 11;
  return c;
}

// Average ranks; ties share their mean rank.
std::vector<double> Ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = (i + j) / 2.0 + 1;
    i = j + 1;
  }
  return r;
}

double Spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = Ranks(a), rb = Ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

TEST(SimConfig, ParseAndFormat) {
  const auto c = ParseSimConfig("# comment\nnum_users = 7\nbeta1=0.5  # trailing\n\nseed=9\n");
  EXPECT_EQ(c.num_users, 7);
  EXPECT_EQ(c.beta1, 0.5);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.num_movies, SimConfig{}.num_movies);
  const auto again = ParseSimConfig(FormatSimConfig(c));
  EXPECT_EQ(FormatSimConfig(again), FormatSimConfig(c));
  EXPECT_EQ(SimConfigHash(again), SimConfigHash(c));
  EXPECT_EQ(SimConfigHash(c).size(), 16u);
  EXPECT_NE(SimConfigHash(c), SimConfigHash(SimConfig{}));
}

TEST(SimConfig, Errors) {
  try {
    ParseSimConfig("num_users=3\nmood=happy\n");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(ParseSimConfig("num_users\n"), FormatError);
  EXPECT_THROW(ParseSimConfig("num_users=abc\n"), FormatError);
  EXPECT_THROW(ParseSimConfig("num_users=0\n"), std::invalid_argument);
  EXPECT_THROW(ParseSimConfig("start_date=2023-02-30\n"), FormatError);
}

TEST(Population, RankOneWithoutNoise) {
  SimConfig c = Small();
  c.num_users = 5;
  c.num_movies = 5;
  c.latent_dim = 1;
  c.value_noise = 0;
  c.factor_mean = 1.5;
  c.factor_sd = 0.1;
  const auto p = SpawnPopulation(c);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      EXPECT_NEAR(p.truth[p.At(i, j)], p.user_factors[i] * p.item_factors[j], 1e-5);
      // Every 2x2 minor of a rank-1 matrix vanishes.
      for (int k = 0; k < 5; ++k) {
        for (int l = 0; l < 5; ++l) {
          const double minor = double(p.truth[p.At(i, j)]) * p.truth[p.At(k, l)] -
                               double(p.truth[p.At(i, l)]) * p.truth[p.At(k, j)];
          EXPECT_NEAR(minor, 0.0, 1e-5);
        }
      }
    }
  }
}

TEST(Population, Deterministic) {
  const auto a = SpawnPopulation(Small());
  const auto b = SpawnPopulation(Small());
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_EQ(a.prior_mean, b.prior_mean);
  EXPECT_EQ(a.prior_sd, b.prior_sd);
  EXPECT_EQ(a.rho, b.rho);
  SimConfig other = Small();
  other.seed = 12;
  EXPECT_NE(SpawnPopulation(other).truth, a.truth);
}

TEST(Population, Ranges) {
  const auto p = SpawnPopulation(Small());
  for (float x : p.truth) {
    EXPECT_GE(x, 0.5f);
    EXPECT_LE(x, 5.0f);
  }
  for (float s : p.prior_sd) EXPECT_GT(s, 0.0f);
  for (double r : p.rho) {
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
  }
  for (double sd : {0.01, 0.5, 1.0, 10.0}) {
    EXPECT_GE(p.Certainty(sd), 1);
    EXPECT_LE(p.Certainty(sd), 5);
  }
  EXPECT_GE(p.Certainty(0.01), p.Certainty(10.0));
}

TEST(Population, SdIncreasesWithPopularityRank) {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    SimConfig c = Small();
    c.seed = seed;
    const auto p = SpawnPopulation(c);
    std::vector<double> sd, rank;
    for (int u = 0; u < p.num_users; ++u) {
      for (int m = 0; m < p.num_movies; ++m) {
        sd.push_back(p.prior_sd[p.At(u, m)]);
        rank.push_back(p.popularity_rank[m]);
      }
    }
    EXPECT_GT(Spearman(sd, rank), 0.0) << seed;
  }
}

TEST(Simulation, NoResponsesWhenPropensityZero) {
  SimConfig c = Small();
  c.response_scale = 0;
  c.horizon_days = 10;
  const auto logs = RunSimulation(c);
  EXPECT_GT(logs.requests.size(), 0u);
  EXPECT_EQ(logs.beliefs.size(), logs.requests.size());
  for (const auto& b : logs.beliefs) EXPECT_EQ(b.is_seen, -1);
}

TEST(Simulation, ForcedConsumption) {
  SimConfig c = Small();
  c.beta0 = 1;
  c.beta1 = 0;
  c.beta2 = 0;
  c.seen_unrated_mean = 0;
  c.horizon_days = 20;
  const auto logs = RunSimulation(c);
  std::map<std::pair<UserId, MovieId>, int> presented, consumed;
  for (const auto& q : logs.requests) ++presented[{q.user, q.movie}];
  for (const auto& e : logs.consumption) ++consumed[{e.user, e.movie}];
  ASSERT_FALSE(presented.empty());
  EXPECT_EQ(presented.size(), consumed.size());
  for (const auto& [pair, n] : presented) {
    EXPECT_EQ(n, 1);
    EXPECT_EQ(consumed[pair], 1);
  }
}

TEST(Simulation, ByteIdenticalReruns) {
  const SimConfig c = Small();
  TempDir a, b;
  WriteSimLogs(RunSimulation(c), c, a.path());
  WriteSimLogs(RunSimulation(c), c, b.path());
  for (const char* f : {"movies.csv", "ratings.csv", "beliefs.csv", "elicit_log.csv",
                        "rec_log.csv", "consumption.csv", "manifest.txt"}) {
    const auto x = ReadText(a / f);
    EXPECT_FALSE(x.empty()) << f;
    EXPECT_EQ(x, ReadText(b / f)) << f;
  }
  EXPECT_NE(ReadText(a / "manifest.txt").find(SimConfigHash(c)), std::string::npos);
}

class SmallRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    config_ = new SimConfig(Small());
    logs_ = new SimLogs(RunSimulation(*config_));
  }
  static void TearDownTestSuite() {
    delete logs_;
    delete config_;
  }
  static SimConfig* config_;
  static SimLogs* logs_;
};
SimConfig* SmallRun::config_ = nullptr;
SimLogs* SmallRun::logs_ = nullptr;

TEST_F(SmallRun, SchemaRoundTrip) {
  TempDir dir;
  WriteSimLogs(*logs_, *config_, dir.path());
  const auto report = ValidateCorpus(dir.path());
  EXPECT_TRUE(report.ok()) << report.ToText();
  EXPECT_EQ(ReadBeliefs(dir / "beliefs.csv"), logs_->beliefs);
  EXPECT_EQ(ReadElicitLog(dir / "elicit_log.csv"), logs_->requests);
  EXPECT_EQ(ReadRecLog(dir / "rec_log.csv"), logs_->recommendations);
  EXPECT_EQ(ReadConsumption(dir / "consumption.csv"), logs_->consumption);
  EXPECT_EQ(ReadRatings(dir / "ratings.csv"), logs_->ratings);
  EXPECT_EQ(FormatBeliefs(ReadBeliefs(dir / "beliefs.csv")), ReadText(dir / "beliefs.csv"));
  const auto catalog = Catalog::Ingest(dir / "movies.csv", dir / "ratings.csv");
  EXPECT_EQ(catalog.movies().size(), 200u);
}

TEST_F(SmallRun, FieldRanges) {
  for (const auto& b : logs_->beliefs) {
    EXPECT_FALSE(CheckBelief(b)) << *CheckBelief(b);
  }
  EXPECT_GT(logs_->pool_builds, 1);
  EXPECT_FALSE(logs_->recommendations.empty());
}

TEST_F(SmallRun, NoRatedOrExcludedPresentations) {
  const auto violations = audit::ReplayPresentations(logs_->requests, logs_->ratings);
  EXPECT_TRUE(violations.empty()) << violations.size() << " e.g. user "
                                  << violations[0].request.user << " movie "
                                  << violations[0].request.movie << " "
                                  << violations[0].rule;
}

TEST_F(SmallRun, EveryPresentationHasOneBeliefRow) {
  std::map<std::tuple<UnixSeconds, UserId, MovieId>, int> req;
  for (const auto& q : logs_->requests) ++req[{q.timestamp, q.user, q.movie}];
  EXPECT_EQ(logs_->beliefs.size(), logs_->requests.size());
  std::map<std::pair<UserId, MovieId>, int> reqs, bels;
  for (const auto& q : logs_->requests) ++reqs[{q.user, q.movie}];
  for (const auto& b : logs_->beliefs) ++bels[{b.user, b.movie}];
  EXPECT_EQ(reqs, bels);
}

TEST(Simulation, RecMultiplierRaisesResponseOverlap) {
  SimConfig c = Small();
  c.num_users = 120;
  c.horizon_days = 30;
  c.beta_a = 2;
  c.beta_b = 8;
  c.rec_response_multiplier = 4;
  const auto logs = RunSimulation(c);
  const auto o = ComputeOverlap(logs.requests, logs.beliefs, logs.recommendations);
  EXPECT_GT(o.users_with_responses, 50u);
  EXPECT_GT(o.response_overlap, o.request_overlap);
}

}  // namespace
}  // namespace elicit
