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

#include "elicit/pool.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>

#include "elicit/csv.h"

namespace elicit {
namespace {

constexpr std::array<std::string_view, kNumCriteria> kCriterionNames = {
    "popularity", "rating", "recent_popular", "trendy", "serendipity"};

struct Candidate {
  MovieId movie;
  double score;
  std::int64_t num_ratings;
};

bool Ranks(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.num_ratings != b.num_ratings) return a.num_ratings > b.num_ratings;
  return a.movie < b.movie;
}

std::vector<MovieId> TopK(std::vector<Candidate> candidates, std::int64_t k) {
  const auto take = static_cast<std::size_t>(
      std::min<std::int64_t>(k, static_cast<std::int64_t>(candidates.size())));
  std::partial_sort(candidates.begin(), candidates.begin() + take,
                    candidates.end(), Ranks);
  std::vector<MovieId> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(candidates[i].movie);
  return out;
}

// Uniform k-subset without replacement; `movies` must be in a canonical
// order for the result to be reproducible.
std::vector<MovieId> UniformSample(std::vector<MovieId> movies, std::int64_t k,
                                   std::mt19937_64& rng) {
  const auto take = static_cast<std::size_t>(
      std::min<std::int64_t>(k, static_cast<std::int64_t>(movies.size())));
  for (std::size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, movies.size() - 1);
    std::swap(movies[i], movies[pick(rng)]);
  }
  movies.resize(take);
  return movies;
}

}  // namespace

std::string_view CriterionName(Criterion c) {
  return kCriterionNames[static_cast<int>(c)];
}

std::optional<Criterion> ParseCriterion(std::string_view name) {
  for (int i = 0; i < kNumCriteria; ++i) {
    if (kCriterionNames[i] == name) return static_cast<Criterion>(i);
  }
  return std::nullopt;
}

void PoolConfig::Validate() const {
  if (!(y > 0.0) || !std::isfinite(y)) {
    throw std::invalid_argument("pool size multiplier y must be positive");
  }
  if (recent_threshold_months <= 0) {
    throw std::invalid_argument("recent_threshold_months must be positive");
  }
  if (num_rating_threshold < 0) {
    throw std::invalid_argument("num_rating_threshold must be non-negative");
  }
}

ElicitationPool::ElicitationPool(MonthKey month, std::vector<PoolEntry> entries,
                                 std::vector<PoolSelection> selections)
    : month_(month),
      entries_(std::move(entries)),
      selections_(std::move(selections)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const PoolEntry& a, const PoolEntry& b) {
              return a.movie < b.movie;
            });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].criteria.none()) {
      throw std::invalid_argument("pool entry without criteria: " +
                                  std::to_string(entries_[i].movie));
    }
    if (i > 0 && entries_[i - 1].movie == entries_[i].movie) {
      throw std::invalid_argument("duplicate pool entry: " +
                                  std::to_string(entries_[i].movie));
    }
  }
}

const PoolEntry* ElicitationPool::Find(MovieId movie) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), movie,
      [](const PoolEntry& e, MovieId m) { return e.movie < m; });
  return (it != entries_.end() && it->movie == movie) ? &*it : nullptr;
}

std::int64_t GenreQuota(const GenreShares& shares, Genre genre, int base,
                        double y) {
  const double exact = static_cast<double>(shares.count(genre)) * base * y /
                       static_cast<double>(shares.total());
  const double nearest = std::round(exact);
  if (std::abs(exact - nearest) <= 1e-9 * std::max(1.0, exact)) {
    return static_cast<std::int64_t>(nearest);
  }
  return static_cast<std::int64_t>(std::ceil(exact));
}

std::int64_t PoolSizeBound(double y) {
  return static_cast<std::int64_t>(std::floor(100.0 * y + 1e-9)) +
         kNumCriteria * kNumGenres;
}

ElicitationPool BuildPool(const CatalogSnapshot& snapshot,
                          const GenreShares& shares, const PoolConfig& config) {
  config.Validate();
  if (snapshot.empty()) {
    throw std::invalid_argument("cannot build a pool from an empty snapshot");
  }

  const auto& entries = snapshot.entries();
  std::vector<double> trendy(entries.size());
  std::vector<bool> recent(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    trendy[i] = TrendyScore(entries[i], config.num_rating_threshold);
    recent[i] = IsRecentRelease(entries[i].release_date, snapshot.as_of(),
                                config.recent_threshold_months);
  }

  std::vector<PoolSelection> selections;
  std::map<MovieId, CriterionSet> merged;
  for (int g = 0; g < kNumGenres; ++g) {
    const Genre genre = GenreAt(g);
    if (shares.count(genre) == 0) continue;

    std::array<std::vector<Candidate>, kNumCriteria> eligible;
    std::vector<MovieId> in_genre;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const MovieStats& m = entries[i];
      if (!m.genres.test(g)) continue;
      const auto n = m.num_ratings_now;
      const auto count = static_cast<double>(n);
      in_genre.push_back(m.movie);
      eligible[static_cast<int>(Criterion::kPopularity)].push_back(
          {m.movie, count, n});
      if (n > 0) {
        eligible[static_cast<int>(Criterion::kRating)].push_back(
            {m.movie, snapshot.rating_score_at(i), n});
      }
      if (recent[i]) {
        eligible[static_cast<int>(Criterion::kRecentPopular)].push_back(
            {m.movie, count, n});
      }
      if (trendy[i] > 0.0) {
        eligible[static_cast<int>(Criterion::kTrendy)].push_back(
            {m.movie, trendy[i], n});
      }
    }

    for (int c = 0; c < kNumCriteria; ++c) {
      const auto criterion = static_cast<Criterion>(c);
      const std::int64_t quota =
          GenreQuota(shares, genre, kCriterionBase[c], config.y);
      PoolSelection sel{criterion, genre, quota, {}};
      if (criterion == Criterion::kSerendipity) {
        std::seed_seq seq{static_cast<std::uint32_t>(config.rng_seed),
                          static_cast<std::uint32_t>(config.rng_seed >> 32),
                          static_cast<std::uint32_t>(g)};
        std::mt19937_64 rng(seq);
        sel.movies = UniformSample(in_genre, quota, rng);
      } else {
        sel.movies = TopK(std::move(eligible[c]), quota);
      }
      for (MovieId m : sel.movies) merged[m].set(c);
      selections.push_back(std::move(sel));
    }
  }

  std::vector<PoolEntry> pool_entries;
  pool_entries.reserve(merged.size());
  for (const auto& [movie, criteria] : merged) {
    pool_entries.push_back({movie, criteria});
  }
  return ElicitationPool(MonthOf(snapshot.as_of()), std::move(pool_entries),
                         std::move(selections));
}

MonthKey RefreshKey(const Date& clock_date) { return MonthOf(clock_date); }

PoolSchedule::PoolSchedule(Builder builder) : builder_(std::move(builder)) {}

std::shared_ptr<const ElicitationPool> PoolSchedule::Get(const Date& clock_date) {
  std::lock_guard<std::mutex> lock(mu_);
  const MonthKey key = RefreshKey(clock_date);
  if (!current_ || current_->month() != key) {
    auto built = std::make_shared<const ElicitationPool>(builder_(clock_date));
    ++builds_;
    current_ = std::move(built);
  }
  return current_;
}

std::shared_ptr<const ElicitationPool> PoolSchedule::Current() const {
  std::lock_guard<std::mutex> lock(mu_);
  return current_;
}

void PoolSchedule::Install(std::shared_ptr<const ElicitationPool> pool) {
  std::lock_guard<std::mutex> lock(mu_);
  current_ = std::move(pool);
}

int PoolSchedule::builds() const {
  std::lock_guard<std::mutex> lock(mu_);
  return builds_;
}

void WritePoolCsv(const ElicitationPool& pool,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "month,movieId,criteria\n";
  const std::string month = FormatMonth(pool.month());
  for (const PoolEntry& e : pool.entries()) {
    out << month << ',' << e.movie << ',';
    bool first = true;
    for (int c = 0; c < kNumCriteria; ++c) {
      if (!e.criteria.test(c)) continue;
      if (!first) out << '|';
      out << kCriterionNames[c];
      first = false;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

ElicitationPool ReadPoolCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvReader reader(in, path.string());
  std::vector<std::string> fields;
  if (!reader.Next(fields) ||
      fields != std::vector<std::string>{"month", "movieId", "criteria"}) {
    reader.Fail("expected header month,movieId,criteria");
  }
  std::optional<MonthKey> month;
  std::vector<PoolEntry> entries;
  while (reader.Next(fields)) {
    if (fields.size() != 3) reader.Fail("expected 3 columns");
    MonthKey row_month;
    PoolEntry entry;
    try {
      row_month = ParseMonth(fields[0]);
      entry.movie = ParseInt64(fields[1]);
    } catch (const std::invalid_argument& e) {
      reader.Fail(e.what());
    }
    if (month && *month != row_month) reader.Fail("mixed months in pool file");
    month = row_month;
    std::string_view crit = fields[2];
    while (!crit.empty()) {
      const auto bar = crit.find('|');
      auto c = ParseCriterion(crit.substr(0, bar));
      if (!c) reader.Fail("unknown criterion '" + std::string(crit.substr(0, bar)) + "'");
      entry.criteria.set(static_cast<int>(*c));
      if (bar == std::string_view::npos) break;
      crit.remove_prefix(bar + 1);
    }
    if (entry.criteria.none()) reader.Fail("entry has no criteria");
    entries.push_back(entry);
  }
  try {
    return ElicitationPool(month.value_or(MonthKey{}), std::move(entries));
  } catch (const std::invalid_argument& e) {
    throw FormatError(path.string(), 0, e.what());
  }
}

}  // namespace elicit
