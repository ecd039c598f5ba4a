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

#ifndef ELICIT_SAMPLER_H_
#define ELICIT_SAMPLER_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "elicit/calendar.h"
#include "elicit/catalog.h"
#include "elicit/pool.h"
#include "elicit/rating.h"

namespace elicit {

enum class SlotSource : std::uint8_t { kBroad, kRec, kNew };

std::string_view SourceName(SlotSource source);
std::optional<SlotSource> ParseSource(std::string_view name);

inline constexpr int kBatchSize = 8;
inline constexpr int kBroadSlots = 3;
inline constexpr int kRecSlots = 4;
inline constexpr int kNewSlots = 1;
inline constexpr std::size_t kTopPicksDepth = 100;
inline constexpr UnixSeconds kExclusionWindow = 90 * kSecondsPerDay;
inline constexpr int kMaxPresentationsInWindow = 2;

// Presentation and response timestamps for every (user, movie) pair. Not
// synchronized; owners serialize access per user.
class ElicitationHistory {
 public:
  struct PairHistory {
    std::vector<UnixSeconds> presented;
    std::vector<UnixSeconds> responded;
  };
  using UserHistory = std::unordered_map<MovieId, PairHistory>;

  // Throws std::invalid_argument when `at` precedes the pair's last
  // presentation.
  void RecordPresentation(UserId user, MovieId movie, UnixSeconds at);
  // Throws std::invalid_argument when the pair was never presented.
  void RecordResponse(UserId user, MovieId movie, UnixSeconds at);

  const UserHistory* ForUser(UserId user) const;
  std::span<const UnixSeconds> Presentations(UserId user, MovieId movie) const;
  std::size_t num_users() const { return users_.size(); }

 private:
  std::unordered_map<UserId, UserHistory> users_;
};

// Source of per-user predicted ratings. Any (user, movie) -> grid rating map
// works; the platform's production recommender is not modelled.
class PredictedRatings {
 public:
  virtual ~PredictedRatings() = default;
  virtual std::optional<Rating> Predict(UserId user, MovieId movie) const = 0;
  virtual std::string_view provider() const = 0;
};

class MapPredictedRatings final : public PredictedRatings {
 public:
  void Set(UserId user, MovieId movie, Rating rating);
  std::optional<Rating> Predict(UserId user, MovieId movie) const override;
  std::string_view provider() const override { return "map"; }

 private:
  std::map<std::pair<UserId, MovieId>, Rating> ratings_;
};

// Predicts every user's rating as the movie's community average.
class ItemMeanPredictor final : public PredictedRatings {
 public:
  explicit ItemMeanPredictor(const CatalogSnapshot& snapshot);
  std::optional<Rating> Predict(UserId user, MovieId movie) const override;
  std::string_view provider() const override { return "item-mean"; }

 private:
  std::unordered_map<MovieId, Rating> means_;
};

// Predicts every movie as the user's own average rating.
class UserMeanPredictor final : public PredictedRatings {
 public:
  explicit UserMeanPredictor(const Catalog& catalog);
  std::optional<Rating> Predict(UserId user, MovieId movie) const override;
  std::string_view provider() const override { return "user-mean"; }

 private:
  std::unordered_map<UserId, Rating> means_;
};

// Orders `candidates` by predicted rating (desc, then id asc), skipping movies
// without a prediction, and returns at most `depth` of them.
std::vector<MovieId> RankTopPicks(UserId user, std::span<const MovieId> candidates,
                                  const PredictedRatings& predicted,
                                  std::size_t depth = kTopPicksDepth);

struct BatchSlot {
  MovieId movie = 0;
  SlotSource source = SlotSource::kBroad;

  friend bool operator==(const BatchSlot&, const BatchSlot&) = default;
};

struct SourceCounts {
  int broad = 0;
  int rec = 0;
  int fresh = 0;

  friend bool operator==(const SourceCounts&, const SourceCounts&) = default;
};

struct ElicitationBatch {
  std::string id;
  UserId user = 0;
  UnixSeconds created_at = 0;
  std::vector<BatchSlot> slots;
  std::optional<std::string> shortfall_reason;

  SourceCounts counts() const;
  bool Contains(MovieId movie) const;
};

// Everything the sampler reads about one user at one instant.
struct SamplerInputs {
  const ElicitationPool* pool = nullptr;
  std::function<bool(MovieId)> has_rated;
  std::function<bool(MovieId)> is_recent;
  const ElicitationHistory* history = nullptr;
  const PredictedRatings* predicted = nullptr;
  // The user's recommendation-ordered list; only the first kTopPicksDepth
  // entries are used.
  std::span<const MovieId> top_picks;
};

// Pool movies the user has not rated, ascending by id.
std::vector<MovieId> EligibleSet(const ElicitationPool& pool,
                                 const std::function<bool(MovieId)>& has_rated);
std::vector<MovieId> EligibleSet(UserId user, const ElicitationPool& pool,
                                 const Catalog& catalog, UnixSeconds now);

// Movies presented to the user at least twice in the 90 days ending at `now`.
std::unordered_set<MovieId> ExcludedSet(UserId user,
                                        const ElicitationHistory& history,
                                        UnixSeconds now);

// Draws one batch. Slots are filled in the order rec (uniform over the
// eligible, non-excluded, predicted movies among the top picks), new (uniform
// over eligible recent releases), broad (uniform over what remains); rec and
// new shortfalls fall back to broad. The filled slots are shuffled. An empty
// candidate set yields an empty batch with shortfall_reason "exhausted".
ElicitationBatch SampleBatch(UserId user, UnixSeconds now, std::string batch_id,
                             const SamplerInputs& inputs, std::mt19937_64& rng);

// Replaces the slots whose movies are in `answered`, in place and with the
// same source targets; unanswered slots keep their movie and position. With
// nothing answered the batch is returned unchanged (same id).
ElicitationBatch RefreshBatch(const ElicitationBatch& current,
                              const std::unordered_set<MovieId>& answered,
                              UnixSeconds now, std::string batch_id,
                              const SamplerInputs& inputs, std::mt19937_64& rng);

}  // namespace elicit

#endif  // ELICIT_SAMPLER_H_
