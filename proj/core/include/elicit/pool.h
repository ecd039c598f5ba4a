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

#ifndef ELICIT_POOL_H_
#define ELICIT_POOL_H_

#include <array>
#include <bitset>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "elicit/calendar.h"
#include "elicit/catalog.h"

namespace elicit {

enum class Criterion : std::uint8_t {
  kPopularity,
  kRating,
  kRecentPopular,
  kTrendy,
  kSerendipity,
};
inline constexpr int kNumCriteria = 5;
// Per-criterion size multipliers; criterion c contributes about base[c] * y
// movies.
inline constexpr std::array<int, kNumCriteria> kCriterionBase = {50, 25, 10, 10,
                                                                 5};

using CriterionSet = std::bitset<kNumCriteria>;

std::string_view CriterionName(Criterion c);
std::optional<Criterion> ParseCriterion(std::string_view name);

struct PoolConfig {
  double y = 11.0;
  int recent_threshold_months = kDefaultRecentThresholdMonths;
  std::int64_t num_rating_threshold = kDefaultNumRatingThreshold;
  std::uint64_t rng_seed = 0;

  // Throws std::invalid_argument unless y > 0 and thresholds are positive.
  void Validate() const;
};

struct PoolEntry {
  MovieId movie = 0;
  CriterionSet criteria;

  friend bool operator==(const PoolEntry&, const PoolEntry&) = default;
};

// One genre's pick under one criterion, before duplicates are merged.
struct PoolSelection {
  Criterion criterion;
  Genre genre;
  std::int64_t quota = 0;
  std::vector<MovieId> movies;
};

// The month's elicitation pool, shared by all users.
class ElicitationPool {
 public:
  ElicitationPool() = default;
  ElicitationPool(MonthKey month, std::vector<PoolEntry> entries,
                  std::vector<PoolSelection> selections = {});

  const MonthKey& month() const { return month_; }
  // Sorted by movie id, ids unique, every entry has at least one criterion.
  const std::vector<PoolEntry>& entries() const { return entries_; }
  // Pre-merge audit trail. Empty for pools read back from a file.
  const std::vector<PoolSelection>& selections() const { return selections_; }

  std::size_t size() const { return entries_.size(); }
  const PoolEntry* Find(MovieId movie) const;
  bool Contains(MovieId movie) const { return Find(movie) != nullptr; }

 private:
  MonthKey month_{};
  std::vector<PoolEntry> entries_;
  std::vector<PoolSelection> selections_;
};

// ceil(s_g * base * y), evaluated so that products that are integral in exact
// arithmetic (0.3 * 50 * 11 = 165) do not round up because of floating-point
// noise.
std::int64_t GenreQuota(const GenreShares& shares, Genre genre, int base,
                        double y);

// Upper bound on the merged pool size: 100y plus one unit of ceil() slack per
// genre and criterion.
std::int64_t PoolSizeBound(double y);

// Builds the pool for the snapshot's month. For each genre and criterion the
// top movies (ties: score desc, ratings desc, id asc) or, for serendipity, a
// uniform sample without replacement are selected; a genre with too few
// eligible movies contributes all of them. Duplicates across genres and
// criteria merge into one entry carrying the union of criterion tags.
// Throws std::invalid_argument for an empty snapshot or invalid config.
ElicitationPool BuildPool(const CatalogSnapshot& snapshot,
                          const GenreShares& shares, const PoolConfig& config);

// Pools are keyed by calendar month and rebuilt when the month changes.
MonthKey RefreshKey(const Date& clock_date);

// Month-keyed cache: one build per month, shared read-only afterwards.
class PoolSchedule {
 public:
  using Builder = std::function<ElicitationPool(const Date& clock_date)>;

  explicit PoolSchedule(Builder builder);

  // Returns the pool for the clock date's month, building it on the first
  // request of a month.
  std::shared_ptr<const ElicitationPool> Get(const Date& clock_date);
  std::shared_ptr<const ElicitationPool> Current() const;
  // Installs an externally built or loaded pool.
  void Install(std::shared_ptr<const ElicitationPool> pool);
  int builds() const;

 private:
  Builder builder_;
  mutable std::mutex mu_;
  std::shared_ptr<const ElicitationPool> current_;
  int builds_ = 0;
};

// Header `month,movieId,criteria`, criteria pipe-separated, rows ascending by
// movie id.
void WritePoolCsv(const ElicitationPool& pool, const std::filesystem::path& path);
ElicitationPool ReadPoolCsv(const std::filesystem::path& path);

}  // namespace elicit

#endif  // ELICIT_POOL_H_
