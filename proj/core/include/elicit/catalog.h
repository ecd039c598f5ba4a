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

#ifndef ELICIT_CATALOG_H_
#define ELICIT_CATALOG_H_

#include <array>
#include <bitset>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "elicit/calendar.h"
#include "elicit/rating.h"

namespace elicit {

inline constexpr int kNumGenres = 18;

enum class Genre : std::uint8_t {
  kAction,
  kAdventure,
  kAnimation,
  kComedy,
  kCrime,
  kDocumentary,
  kDrama,
  kFantasy,
  kHistory,
  kHorror,
  kMusic,
  kMystery,
  kRomance,
  kScienceFiction,
  kTvMovie,
  kThriller,
  kWar,
  kWestern,
};

using GenreSet = std::bitset<kNumGenres>;

std::string_view GenreName(Genre genre);
std::optional<Genre> ParseGenre(std::string_view label);
inline Genre GenreAt(int index) { return static_cast<Genre>(index); }
// Pipe-separated genre labels in canonical order.
std::string FormatGenres(const GenreSet& genres);

struct Movie {
  MovieId id = 0;
  std::string title;
  GenreSet genres;
  std::optional<Date> release_date;
};

struct RatingEvent {
  UserId user = 0;
  MovieId movie = 0;
  Rating rating = Rating::FromHalves(Rating::kMaxHalves);
  UnixSeconds timestamp = 0;

  friend bool operator==(const RatingEvent&, const RatingEvent&) = default;
};

// Movies plus the full rating event history. Immutable once built; a
// (user, movie) pair has one current rating, the one with the latest
// timestamp as of the time of interest.
class Catalog {
 public:
  // Validates ids and genres. Throws std::invalid_argument on duplicate movie
  // ids, empty genre sets, or ratings for unknown movies.
  static Catalog Build(std::vector<Movie> movies,
                       std::vector<RatingEvent> events);

  // Reads the movies and ratings CSV files. Throws FormatError naming the
  // offending line for malformed rows, off-grid ratings or unknown genres.
  static Catalog Ingest(const std::filesystem::path& movies_file,
                        const std::filesystem::path& ratings_file);

  const std::vector<Movie>& movies() const { return movies_; }
  const Movie* FindMovie(MovieId id) const;
  bool empty() const { return movies_.empty(); }

  // Every ingested event, sorted by (movie, user, timestamp).
  std::span<const RatingEvent> events() const { return events_; }
  // One event per (user, movie): the latest.
  std::vector<RatingEvent> CurrentRatings() const;

  // True when the user has a rating for the movie at or before `at`.
  bool HasRated(UserId user, MovieId movie, UnixSeconds at) const;
  // Movies rated by the user at or before `at`, ascending.
  std::vector<MovieId> RatedBy(UserId user, UnixSeconds at) const;

  std::optional<UnixSeconds> LatestTimestamp() const;

 private:
  struct FirstRating {
    MovieId movie;
    UnixSeconds first;
  };

  std::vector<Movie> movies_;
  std::unordered_map<MovieId, std::size_t> movie_index_;
  std::vector<RatingEvent> events_;
  std::unordered_map<UserId, std::vector<FirstRating>> by_user_;
};

void WriteMoviesCsv(const std::vector<Movie>& movies,
                    const std::filesystem::path& path);

struct MovieStats {
  MovieId movie = 0;
  GenreSet genres;
  std::optional<Date> release_date;
  std::int64_t num_ratings_now = 0;
  std::int64_t num_ratings_one_month_ago = 0;
  // Absent when the movie has no ratings as of the snapshot date.
  std::optional<double> avg_rating;
  // Population variance of the current ratings; 0 with fewer than 2.
  double rating_variance = 0.0;
};

// Per-movie statistics as of the end of a given day. Movies released after
// that day are not part of the snapshot.
class CatalogSnapshot {
 public:
  static CatalogSnapshot Compute(const Catalog& catalog, const Date& as_of);
  // Builds a snapshot from precomputed statistics; used by fixtures and by
  // callers that maintain their own counters.
  static CatalogSnapshot FromStats(const Date& as_of,
                                   std::vector<MovieStats> stats);

  const Date& as_of() const { return as_of_; }
  // as_of minus one calendar month, clamped to month end.
  const Date& lag_date() const { return lag_date_; }
  const std::vector<MovieStats>& entries() const { return entries_; }
  const MovieStats* Find(MovieId movie) const;
  bool empty() const { return entries_.empty(); }

  // Rating score of entries()[i]; see RatingScore().
  double rating_score_at(std::size_t i) const { return rating_scores_[i]; }

 private:
  void Index();

  Date as_of_{};
  Date lag_date_{};
  std::vector<MovieStats> entries_;
  std::unordered_map<MovieId, std::size_t> index_;
  std::vector<double> rating_scores_;
};

// Fraction of movies listing each genre. Kept as integer counts so that
// quota arithmetic stays exact.
class GenreShares {
 public:
  GenreShares(std::array<std::int64_t, kNumGenres> counts, std::int64_t total);

  double share(Genre genre) const;
  std::int64_t count(Genre genre) const {
    return counts_[static_cast<int>(genre)];
  }
  std::int64_t total() const { return total_; }
  double sum() const;

 private:
  std::array<std::int64_t, kNumGenres> counts_;
  std::int64_t total_;
};

// Throws std::invalid_argument on an empty catalog.
GenreShares ComputeGenreShares(const Catalog& catalog);
GenreShares ComputeGenreShares(const CatalogSnapshot& snapshot);

// (percentile of num_ratings_now) x (percentile of avg_rating), where the
// percentile of a value is its rank / N among movies with at least one
// rating, ties taking their average rank. Movies with no ratings score 0.
// Returns nullopt when the movie is not in the snapshot.
std::optional<double> RatingScore(MovieId movie,
                                  const CatalogSnapshot& snapshot);

inline constexpr std::int64_t kDefaultNumRatingThreshold = 100;
inline constexpr int kDefaultRecentThresholdMonths = 6;

// delta * ln(delta) / now with delta = now - one_month_ago; 0 when the movie
// has fewer than `num_rating_threshold` ratings or delta <= 0.
double TrendyScore(const MovieStats& stats,
                   std::int64_t num_rating_threshold =
                       kDefaultNumRatingThreshold);

// True iff as_of - `months` calendar months <= release_date <= as_of.
// Movies without a release date are never recent.
bool IsRecentRelease(const std::optional<Date>& release_date,
                     const Date& as_of,
                     int months = kDefaultRecentThresholdMonths);

}  // namespace elicit

#endif  // ELICIT_CATALOG_H_
