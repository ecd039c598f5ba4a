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

#include <algorithm>
#include <stdexcept>

namespace elicit {
namespace {

constexpr std::array<std::string_view, 3> kSourceNames = {"broad", "rec", "new"};

// Removes and returns up to k uniformly chosen elements of `from`.
std::vector<MovieId> DrawWithoutReplacement(std::vector<MovieId>& from,
                                            std::size_t k,
                                            std::mt19937_64& rng) {
  const std::size_t take = std::min(k, from.size());
  for (std::size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, from.size() - 1);
    std::swap(from[i], from[pick(rng)]);
  }
  std::vector<MovieId> drawn(from.begin(), from.begin() + take);
  from.erase(from.begin(), from.begin() + take);
  return drawn;
}

struct FillResult {
  std::vector<BatchSlot> slots;
  bool exhausted = false;
};

FillResult FillSlots(UserId user, UnixSeconds now, SourceCounts targets,
                     const std::unordered_set<MovieId>& blocked,
                     const SamplerInputs& in, std::mt19937_64& rng) {
  if (in.pool == nullptr || in.history == nullptr) {
    throw std::invalid_argument("sampler inputs need a pool and a history");
  }
  const auto excluded = ExcludedSet(user, *in.history, now);
  std::vector<MovieId> base;
  std::unordered_set<MovieId> base_set;
  for (const PoolEntry& e : in.pool->entries()) {
    if (blocked.contains(e.movie) || excluded.contains(e.movie)) continue;
    if (in.has_rated && in.has_rated(e.movie)) continue;
    base.push_back(e.movie);
  }
  FillResult result;
  if (base.empty()) {
    result.exhausted = true;
    return result;
  }
  base_set.insert(base.begin(), base.end());

  std::unordered_set<MovieId> chosen;
  auto append = [&](const std::vector<MovieId>& movies, SlotSource source) {
    for (MovieId m : movies) {
      result.slots.push_back({m, source});
      chosen.insert(m);
    }
  };

  // (a) recommendation slots
  std::vector<MovieId> rec_candidates;
  if (targets.rec > 0 && in.predicted != nullptr) {
    std::unordered_set<MovieId> seen;
    const std::size_t depth = std::min(in.top_picks.size(), kTopPicksDepth);
    for (std::size_t i = 0; i < depth; ++i) {
      const MovieId m = in.top_picks[i];
      if (!seen.insert(m).second) continue;
      if (!base_set.contains(m)) continue;
      if (!in.predicted->Predict(user, m)) continue;
      rec_candidates.push_back(m);
    }
  }
  append(DrawWithoutReplacement(rec_candidates,
                                static_cast<std::size_t>(std::max(targets.rec, 0)),
                                rng),
         SlotSource::kRec);

  // (b) recent-release slot
  std::vector<MovieId> new_candidates;
  if (targets.fresh > 0 && in.is_recent) {
    for (MovieId m : base) {
      if (!chosen.contains(m) && in.is_recent(m)) new_candidates.push_back(m);
    }
  }
  append(DrawWithoutReplacement(
             new_candidates, static_cast<std::size_t>(std::max(targets.fresh, 0)),
             rng),
         SlotSource::kNew);

  // (c) broad slots absorb the shortfall of (a) and (b)
  const int wanted = targets.broad + targets.rec + targets.fresh;
  const int broad_needed = wanted - static_cast<int>(result.slots.size());
  std::vector<MovieId> broad_candidates;
  for (MovieId m : base) {
    if (!chosen.contains(m)) broad_candidates.push_back(m);
  }
  append(DrawWithoutReplacement(broad_candidates,
                                static_cast<std::size_t>(std::max(broad_needed, 0)),
                                rng),
         SlotSource::kBroad);
  return result;
}

std::string ShortfallReason(std::size_t filled, int wanted) {
  return "shortfall: filled " + std::to_string(filled) + " of " +
         std::to_string(wanted) + " slots";
}

}  // namespace

std::string_view SourceName(SlotSource source) {
  return kSourceNames[static_cast<int>(source)];
}

std::optional<SlotSource> ParseSource(std::string_view name) {
  for (int i = 0; i < 3; ++i) {
    if (kSourceNames[i] == name) return static_cast<SlotSource>(i);
  }
  return std::nullopt;
}

void ElicitationHistory::RecordPresentation(UserId user, MovieId movie,
                                            UnixSeconds at) {
  auto& pair = users_[user][movie];
  if (!pair.presented.empty() && at < pair.presented.back()) {
    throw std::invalid_argument("presentation timestamps must not decrease");
  }
  pair.presented.push_back(at);
}

void ElicitationHistory::RecordResponse(UserId user, MovieId movie,
                                        UnixSeconds at) {
  auto uit = users_.find(user);
  if (uit == users_.end() || !uit->second.contains(movie) ||
      uit->second.at(movie).presented.empty()) {
    throw std::invalid_argument("response without a presentation for user " +
                                std::to_string(user) + " movie " +
                                std::to_string(movie));
  }
  uit->second.at(movie).responded.push_back(at);
}

const ElicitationHistory::UserHistory* ElicitationHistory::ForUser(
    UserId user) const {
  auto it = users_.find(user);
  return it == users_.end() ? nullptr : &it->second;
}

std::span<const UnixSeconds> ElicitationHistory::Presentations(
    UserId user, MovieId movie) const {
  const UserHistory* h = ForUser(user);
  if (h == nullptr) return {};
  auto it = h->find(movie);
  if (it == h->end()) return {};
  return it->second.presented;
}

void MapPredictedRatings::Set(UserId user, MovieId movie, Rating rating) {
  ratings_.insert_or_assign({user, movie}, rating);
}

std::optional<Rating> MapPredictedRatings::Predict(UserId user,
                                                   MovieId movie) const {
  auto it = ratings_.find({user, movie});
  if (it == ratings_.end()) return std::nullopt;
  return it->second;
}

ItemMeanPredictor::ItemMeanPredictor(const CatalogSnapshot& snapshot) {
  for (const MovieStats& s : snapshot.entries()) {
    if (s.avg_rating) means_.emplace(s.movie, Rating::Nearest(*s.avg_rating));
  }
}

std::optional<Rating> ItemMeanPredictor::Predict(UserId, MovieId movie) const {
  auto it = means_.find(movie);
  if (it == means_.end()) return std::nullopt;
  return it->second;
}

UserMeanPredictor::UserMeanPredictor(const Catalog& catalog) {
  std::unordered_map<UserId, std::pair<double, int>> sums;
  for (const RatingEvent& e : catalog.CurrentRatings()) {
    auto& [sum, n] = sums[e.user];
    sum += e.rating.stars();
    ++n;
  }
  for (const auto& [user, agg] : sums) {
    means_.emplace(user, Rating::Nearest(agg.first / agg.second));
  }
}

std::optional<Rating> UserMeanPredictor::Predict(UserId user, MovieId) const {
  auto it = means_.find(user);
  if (it == means_.end()) return std::nullopt;
  return it->second;
}

std::vector<MovieId> RankTopPicks(UserId user,
                                  std::span<const MovieId> candidates,
                                  const PredictedRatings& predicted,
                                  std::size_t depth) {
  std::vector<std::pair<int, MovieId>> scored;
  for (MovieId m : candidates) {
    if (auto r = predicted.Predict(user, m)) scored.emplace_back(r->halves(), m);
  }
  const std::size_t take = std::min(depth, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + take, scored.end(),
                    [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  std::vector<MovieId> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(scored[i].second);
  return out;
}

SourceCounts ElicitationBatch::counts() const {
  SourceCounts c;
  for (const BatchSlot& s : slots) {
    switch (s.source) {
      case SlotSource::kBroad: ++c.broad; break;
      case SlotSource::kRec: ++c.rec; break;
      case SlotSource::kNew: ++c.fresh; break;
    }
  }
  return c;
}

bool ElicitationBatch::Contains(MovieId movie) const {
  return std::any_of(slots.begin(), slots.end(),
                     [movie](const BatchSlot& s) { return s.movie == movie; });
}

std::vector<MovieId> EligibleSet(const ElicitationPool& pool,
                                 const std::function<bool(MovieId)>& has_rated) {
  std::vector<MovieId> out;
  out.reserve(pool.size());
  for (const PoolEntry& e : pool.entries()) {
    if (!has_rated || !has_rated(e.movie)) out.push_back(e.movie);
  }
  return out;
}

std::vector<MovieId> EligibleSet(UserId user, const ElicitationPool& pool,
                                 const Catalog& catalog, UnixSeconds now) {
  return EligibleSet(pool, [&](MovieId m) { return catalog.HasRated(user, m, now); });
}

std::unordered_set<MovieId> ExcludedSet(UserId user,
                                        const ElicitationHistory& history,
                                        UnixSeconds now) {
  std::unordered_set<MovieId> out;
  const auto* h = history.ForUser(user);
  if (h == nullptr) return out;
  const UnixSeconds window_start = now - kExclusionWindow;
  for (const auto& [movie, pair] : *h) {
    int in_window = 0;
    for (UnixSeconds t : pair.presented) {
      if (t >= window_start && t <= now) ++in_window;
    }
    if (in_window >= kMaxPresentationsInWindow) out.insert(movie);
  }
  return out;
}

ElicitationBatch SampleBatch(UserId user, UnixSeconds now, std::string batch_id,
                             const SamplerInputs& inputs, std::mt19937_64& rng) {
  ElicitationBatch batch;
  batch.id = std::move(batch_id);
  batch.user = user;
  batch.created_at = now;
  auto fill = FillSlots(user, now, {kBroadSlots, kRecSlots, kNewSlots}, {},
                        inputs, rng);
  if (fill.exhausted) {
    batch.shortfall_reason = "exhausted";
    return batch;
  }
  batch.slots = std::move(fill.slots);
  std::shuffle(batch.slots.begin(), batch.slots.end(), rng);
  if (batch.slots.size() < static_cast<std::size_t>(kBatchSize)) {
    batch.shortfall_reason = ShortfallReason(batch.slots.size(), kBatchSize);
  }
  return batch;
}

ElicitationBatch RefreshBatch(const ElicitationBatch& current,
                              const std::unordered_set<MovieId>& answered,
                              UnixSeconds now, std::string batch_id,
                              const SamplerInputs& inputs, std::mt19937_64& rng) {
  std::vector<std::size_t> replace;
  SourceCounts targets;
  std::unordered_set<MovieId> blocked;
  for (std::size_t i = 0; i < current.slots.size(); ++i) {
    const BatchSlot& slot = current.slots[i];
    blocked.insert(slot.movie);
    if (!answered.contains(slot.movie)) continue;
    replace.push_back(i);
    switch (slot.source) {
      case SlotSource::kBroad: ++targets.broad; break;
      case SlotSource::kRec: ++targets.rec; break;
      case SlotSource::kNew: ++targets.fresh; break;
    }
  }
  if (replace.empty()) return current;

  ElicitationBatch next;
  next.id = std::move(batch_id);
  next.user = current.user;
  next.created_at = now;

  auto fill = FillSlots(current.user, now, targets, blocked, inputs, rng);
  std::shuffle(fill.slots.begin(), fill.slots.end(), rng);
  std::size_t used = 0;
  std::size_t r = 0;
  for (std::size_t i = 0; i < current.slots.size(); ++i) {
    if (r < replace.size() && replace[r] == i) {
      ++r;
      if (used < fill.slots.size()) next.slots.push_back(fill.slots[used++]);
      continue;
    }
    next.slots.push_back(current.slots[i]);
  }
  if (next.slots.empty()) {
    next.shortfall_reason = "exhausted";
  } else if (next.slots.size() < static_cast<std::size_t>(kBatchSize)) {
    next.shortfall_reason = ShortfallReason(next.slots.size(), kBatchSize);
  }
  return next;
}

}  // namespace elicit
