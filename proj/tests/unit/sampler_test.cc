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

#include "elicit/sampler.h"

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include <gtest/gtest.h>

#include "test_support.h"

namespace elicit {
namespace {

using testing::Genres;

constexpr UserId kUser = 42;
const UnixSeconds kNow = StartOfDay(ParseDate("2023-05-20")) + 12 * 3600;

ElicitationPool PoolOf(MovieId first, MovieId last) {
  std::vector<PoolEntry> entries;
  for (MovieId m = first; m <= last; ++m) entries.push_back({m, CriterionSet().set(0)});
  return ElicitationPool({2023, 5}, std::move(entries));
}

// Pool 1..500; movies 1..20 are recent; the user rated 481..500; top picks
// are 300..449 with predictions for all of them.
struct Fixture {
  ElicitationPool pool = PoolOf(1, 500);
  ElicitationHistory history;
  MapPredictedRatings predicted;
  std::vector<MovieId> top_picks;
  std::set<MovieId> rated;

  Fixture() {
    for (MovieId m = 300; m < 450; ++m) {
      top_picks.push_back(m);
      predicted.Set(kUser, m, Rating::FromStars(4));
    }
    for (MovieId m = 481; m <= 500; ++m) rated.insert(m);
  }

  SamplerInputs Inputs() const {
    SamplerInputs in;
    in.pool = &pool;
    in.has_rated = [this](MovieId m) { return rated.contains(m); };
    in.is_recent = [](MovieId m) { return m <= 20; };
    in.history = &history;
    in.predicted = &predicted;
    in.top_picks = top_picks;
    return in;
  }
};

std::set<MovieId> Movies(const ElicitationBatch& b) {
  std::set<MovieId> out;
  for (const auto& s : b.slots) out.insert(s.movie);
  return out;
}

TEST(EligibleSet, SetDifference) {
  const auto pool = PoolOf(1, 3);
  EXPECT_EQ(EligibleSet(pool, [](MovieId m) { return m == 2; }),
            (std::vector<MovieId>{1, 3}));
  EXPECT_EQ(EligibleSet(pool, [](MovieId) { return false; }),
            (std::vector<MovieId>{1, 2, 3}));
  EXPECT_TRUE(EligibleSet(pool, [](MovieId) { return true; }).empty());
}

TEST(EligibleSet, FromCatalogAtTime) {
  std::vector<Movie> movies;
  for (MovieId m = 1; m <= 3; ++m) movies.push_back({m, "m", Genres({Genre::kDrama}), std::nullopt});
  const auto catalog = Catalog::Build(movies, {{kUser, 2, Rating::FromStars(3), kNow}});
  EXPECT_EQ(EligibleSet(kUser, PoolOf(1, 3), catalog, kNow), (std::vector<MovieId>{1, 3}));
  EXPECT_EQ(EligibleSet(kUser, PoolOf(1, 3), catalog, kNow - 1),
            (std::vector<MovieId>{1, 2, 3}));
}

TEST(ExcludedSet, TwoPresentationsInWindow) {
  ElicitationHistory h;
  h.RecordPresentation(kUser, 1, kNow - 10 * kSecondsPerDay);
  h.RecordPresentation(kUser, 1, kNow - kSecondsPerDay);
  h.RecordPresentation(kUser, 2, kNow - 91 * kSecondsPerDay);
  h.RecordPresentation(kUser, 2, kNow - kSecondsPerDay);
  h.RecordPresentation(kUser, 3, kNow - kSecondsPerDay);
  h.RecordPresentation(kUser, 4, kNow - 90 * kSecondsPerDay);
  h.RecordPresentation(kUser, 4, kNow);
  EXPECT_EQ(ExcludedSet(kUser, h, kNow), (std::unordered_set<MovieId>{1, 4}));
  EXPECT_TRUE(ExcludedSet(kUser + 1, h, kNow).empty());
}

TEST(History, Invariants) {
  ElicitationHistory h;
  EXPECT_THROW(h.RecordResponse(kUser, 1, kNow), std::invalid_argument);
  h.RecordPresentation(kUser, 1, kNow);
  EXPECT_THROW(h.RecordPresentation(kUser, 1, kNow - 1), std::invalid_argument);
  h.RecordResponse(kUser, 1, kNow + 5);
  EXPECT_EQ(h.Presentations(kUser, 1).size(), 1u);
  EXPECT_TRUE(h.Presentations(kUser, 2).empty());
}

TEST(RankTopPicks, OrdersByPrediction) {
  MapPredictedRatings p;
  p.Set(1, 10, Rating::FromStars(3));
  p.Set(1, 11, Rating::FromStars(5));
  p.Set(1, 12, Rating::FromStars(3));
  const std::vector<MovieId> candidates = {12, 10, 11, 13};
  EXPECT_EQ(RankTopPicks(1, candidates, p), (std::vector<MovieId>{11, 10, 12}));
  EXPECT_EQ(RankTopPicks(1, candidates, p, 2), (std::vector<MovieId>{11, 10}));
}

TEST(SampleBatch, AbundantComposition) {
  Fixture f;
  std::mt19937_64 rng(1);
  const auto b = SampleBatch(kUser, kNow, "b1", f.Inputs(), rng);
  EXPECT_EQ(b.counts(), (SourceCounts{3, 4, 1}));
  EXPECT_EQ(b.slots.size(), 8u);
  EXPECT_EQ(Movies(b).size(), 8u);
  EXPECT_FALSE(b.shortfall_reason);
  EXPECT_EQ(b.id, "b1");
  EXPECT_EQ(b.created_at, kNow);
  for (const auto& s : b.slots) {
    EXPECT_FALSE(f.rated.contains(s.movie));
    if (s.source == SlotSource::kRec) EXPECT_TRUE(s.movie >= 300 && s.movie < 400);
    if (s.source == SlotSource::kNew) EXPECT_LE(s.movie, 20);
  }
}

TEST(SampleBatch, EmptyTopPicksFallsBackToBroad) {
  Fixture f;
  f.top_picks.clear();
  std::mt19937_64 rng(2);
  const auto b = SampleBatch(kUser, kNow, "b", f.Inputs(), rng);
  EXPECT_EQ(b.counts(), (SourceCounts{7, 0, 1}));
}

TEST(SampleBatch, PicksWithoutPredictionAreNotRec) {
  Fixture f;
  f.predicted = MapPredictedRatings();
  f.predicted.Set(kUser, 300, Rating::FromStars(4));
  std::mt19937_64 rng(2);
  const auto b = SampleBatch(kUser, kNow, "b", f.Inputs(), rng);
  EXPECT_EQ(b.counts(), (SourceCounts{6, 1, 1}));
}

TEST(SampleBatch, FiveEligibleGivesShortBatch) {
  Fixture f;
  f.pool = PoolOf(101, 105);
  f.top_picks.clear();
  std::mt19937_64 rng(3);
  const auto b = SampleBatch(kUser, kNow, "b", f.Inputs(), rng);
  EXPECT_EQ(b.counts(), (SourceCounts{5, 0, 0}));
  EXPECT_EQ(Movies(b), (std::set<MovieId>{101, 102, 103, 104, 105}));
  ASSERT_TRUE(b.shortfall_reason);
  EXPECT_NE(*b.shortfall_reason, "exhausted");
}

TEST(SampleBatch, ExhaustedWhenNothingEligible) {
  Fixture f;
  f.pool = PoolOf(481, 500);
  std::mt19937_64 rng(4);
  const auto b = SampleBatch(kUser, kNow, "b", f.Inputs(), rng);
  EXPECT_TRUE(b.slots.empty());
  EXPECT_EQ(b.shortfall_reason, "exhausted");
}

TEST(SampleBatch, ExcludedMoviesNeverDrawn) {
  Fixture f;
  f.pool = PoolOf(1, 12);
  f.top_picks.clear();
  for (MovieId m = 1; m <= 6; ++m) {
    f.history.RecordPresentation(kUser, m, kNow - 20 * kSecondsPerDay);
    f.history.RecordPresentation(kUser, m, kNow - 2 * kSecondsPerDay);
  }
  for (int s = 0; s < 50; ++s) {
    std::mt19937_64 rng(s);
    const auto b = SampleBatch(kUser, kNow, "b", f.Inputs(), rng);
    EXPECT_EQ(Movies(b), (std::set<MovieId>{7, 8, 9, 10, 11, 12}));
  }
}

TEST(SampleBatch, OnlyFirstHundredTopPicksUsed) {
  Fixture f;
  for (int s = 0; s < 300; ++s) {
    std::mt19937_64 rng(s);
    for (const auto& slot : SampleBatch(kUser, kNow, "b", f.Inputs(), rng).slots) {
      if (slot.source == SlotSource::kRec) EXPECT_LT(slot.movie, 400);
    }
  }
}

TEST(SampleBatch, Deterministic) {
  Fixture f;
  std::mt19937_64 a(9), b(9);
  const auto x = SampleBatch(kUser, kNow, "b", f.Inputs(), a);
  const auto y = SampleBatch(kUser, kNow, "b", f.Inputs(), b);
  EXPECT_EQ(x.slots, y.slots);
}

TEST(SampleBatchProperty, BroadSlotsUniform) {
  // 4 top picks, 1 recent release and a 10-movie broad reservoir: each
  // reservoir movie lands in a broad slot with probability 3/10.
  Fixture f;
  f.pool = PoolOf(1, 15);
  f.rated.clear();
  f.top_picks = {11, 12, 13, 14};
  f.predicted = MapPredictedRatings();
  for (MovieId m : f.top_picks) f.predicted.Set(kUser, m, Rating::FromStars(4));
  SamplerInputs in = f.Inputs();
  in.is_recent = [](MovieId m) { return m == 15; };
  std::map<MovieId, int> freq;
  constexpr int kDraws = 10000;
  std::mt19937_64 rng(123);
  for (int i = 0; i < kDraws; ++i) {
    const auto b = SampleBatch(kUser, kNow, "b", in, rng);
    ASSERT_EQ(b.counts(), (SourceCounts{3, 4, 1}));
    for (const auto& s : b.slots) {
      if (s.source == SlotSource::kBroad) ++freq[s.movie];
    }
  }
  const double p = 0.3;
  const double se = std::sqrt(kDraws * p * (1 - p));
  for (MovieId m = 1; m <= 10; ++m) {
    EXPECT_NEAR(freq[m], kDraws * p, 3 * se) << m;
  }
}

TEST(RefreshBatch, NothingAnsweredIsNoOp) {
  Fixture f;
  std::mt19937_64 rng(5);
  const auto b = SampleBatch(kUser, kNow, "b1", f.Inputs(), rng);
  const auto r = RefreshBatch(b, {}, kNow + 60, "b2", f.Inputs(), rng);
  EXPECT_EQ(r.id, "b1");
  EXPECT_EQ(r.slots, b.slots);
}

TEST(RefreshBatch, ReplacesOnlyAnsweredSlots) {
  Fixture f;
  std::mt19937_64 rng(6);
  const auto b = SampleBatch(kUser, kNow, "b1", f.Inputs(), rng);
  const std::unordered_set<MovieId> answered = {b.slots[1].movie, b.slots[5].movie};
  for (MovieId m : answered) f.rated.insert(m);
  const auto r = RefreshBatch(b, answered, kNow + 60, "b2", f.Inputs(), rng);
  EXPECT_EQ(r.id, "b2");
  ASSERT_EQ(r.slots.size(), 8u);
  int same = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    if (answered.contains(b.slots[i].movie)) {
      EXPECT_FALSE(answered.contains(r.slots[i].movie));
      EXPECT_FALSE(Movies(b).contains(r.slots[i].movie));
    } else {
      EXPECT_EQ(r.slots[i], b.slots[i]);
      ++same;
    }
  }
  EXPECT_EQ(same, 6);
  EXPECT_EQ(r.counts(), b.counts());
  EXPECT_EQ(Movies(r).size(), 8u);
}

TEST(RefreshBatch, AllAnsweredReplacesEverything) {
  Fixture f;
  std::mt19937_64 rng(7);
  const auto b = SampleBatch(kUser, kNow, "b1", f.Inputs(), rng);
  const auto old = Movies(b);
  std::unordered_set<MovieId> answered(old.begin(), old.end());
  const auto r = RefreshBatch(b, answered, kNow + 60, "b2", f.Inputs(), rng);
  ASSERT_EQ(r.slots.size(), 8u);
  for (const auto& s : r.slots) EXPECT_FALSE(old.contains(s.movie));
  EXPECT_EQ(r.counts(), (SourceCounts{3, 4, 1}));
}

TEST(Source, Names) {
  for (auto s : {SlotSource::kBroad, SlotSource::kRec, SlotSource::kNew}) {
    EXPECT_EQ(ParseSource(SourceName(s)), s);
  }
  EXPECT_FALSE(ParseSource("other"));
}

TEST(Predictors, Means) {
  const Date as_of = ParseDate("2023-05-20");
  std::vector<Movie> movies = {{1, "a", Genres({Genre::kDrama}), std::nullopt},
                               {2, "b", Genres({Genre::kDrama}), std::nullopt}};
  const auto catalog = Catalog::Build(
      movies, {{1, 1, Rating::FromStars(4), 0}, {2, 1, Rating::FromStars(3), 0},
               {1, 2, Rating::FromStars(2), 0}});
  const ItemMeanPredictor item(CatalogSnapshot::Compute(catalog, as_of));
  EXPECT_EQ(item.Predict(9, 1)->stars(), 3.5);
  EXPECT_EQ(item.Predict(9, 2)->stars(), 2.0);
  const UserMeanPredictor user(catalog);
  EXPECT_EQ(user.Predict(1, 7)->stars(), 3.0);
  EXPECT_FALSE(user.Predict(99, 1));
}

}  // namespace
}  // namespace elicit
