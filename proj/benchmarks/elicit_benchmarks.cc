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

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "elicit/catalog.h"
#include "elicit/choice_model.h"
#include "elicit/pool.h"
#include "elicit/sampler.h"

namespace {

using namespace elicit;

CatalogSnapshot MakeSnapshot(int movies) {
  const Date as_of = ParseDate("2023-06-15");
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> genre(0, kNumGenres - 1);
  std::uniform_int_distribution<std::int64_t> count(0, 5000);
  std::uniform_real_distribution<double> avg(0.5, 5.0);
  std::uniform_int_distribution<int> age(0, 4000);
  std::vector<MovieStats> stats;
  for (int i = 1; i <= movies; ++i) {
    MovieStats s;
    s.movie = i;
    s.genres.set(static_cast<std::size_t>(genre(rng)));
    s.genres.set(static_cast<std::size_t>(genre(rng)));
    s.release_date = AddDays(as_of, -age(rng));
    s.num_ratings_now = count(rng);
    s.num_ratings_one_month_ago = s.num_ratings_now * 9 / 10;
    if (s.num_ratings_now > 0) s.avg_rating = avg(rng);
    stats.push_back(s);
  }
  return CatalogSnapshot::FromStats(as_of, std::move(stats));
}

void BM_BuildPool(benchmark::State& state) {
  const auto snapshot = MakeSnapshot(static_cast<int>(state.range(0)));
  const auto shares = ComputeGenreShares(snapshot);
  PoolConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(BuildPool(snapshot, shares, config));
  }
}
BENCHMARK(BM_BuildPool)->Arg(1000)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_SampleBatch(benchmark::State& state) {
  const auto snapshot = MakeSnapshot(5000);
  const auto pool = BuildPool(snapshot, ComputeGenreShares(snapshot), PoolConfig{});
  const ItemMeanPredictor predictor(snapshot);
  std::vector<MovieId> all;
  for (const auto& m : snapshot.entries()) all.push_back(m.movie);
  const auto top = RankTopPicks(1, all, predictor);
  const ElicitationHistory history;
  SamplerInputs inputs;
  inputs.pool = &pool;
  inputs.has_rated = [](MovieId m) { return m % 7 == 0; };
  inputs.is_recent = [&](MovieId m) {
    return IsRecentRelease(snapshot.Find(m)->release_date, snapshot.as_of());
  };
  inputs.history = &history;
  inputs.predicted = &predictor;
  inputs.top_picks = top;
  std::mt19937_64 rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(SampleBatch(1, 0, "b", inputs, rng));
  }
}
BENCHMARK(BM_SampleBatch);

void BM_ExpectedUtility(benchmark::State& state) {
  const auto u = UtilityFunction::Power(0.5);
  const auto belief = GoodBelief::Normal(3.0, 1.2);
  for (auto _ : state) benchmark::DoNotOptimize(ExpectedUtility(belief, u));
}
BENCHMARK(BM_ExpectedUtility);

void BM_OptimalSlate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  BeliefMap beliefs;
  TruthMap truths;
  std::vector<MovieId> candidates;
  for (int i = 1; i <= n; ++i) {
    beliefs.emplace(i, GoodBelief::Normal(2.5 + 0.1 * i, 0.5 + 0.05 * i));
    truths.emplace(i, 2.0 + 0.2 * i);
    candidates.push_back(i);
  }
  const MonteCarloOptions options{500, 3};
  for (auto _ : state) {
    benchmark::DoNotOptimize(OptimalSlate(beliefs, truths, SignalModel{},
                                          UtilityFunction::Exponential(0.5), 2,
                                          candidates, options));
  }
}
BENCHMARK(BM_OptimalSlate)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
