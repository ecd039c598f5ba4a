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

#include "elicit/catalog.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "elicit/csv.h"

namespace elicit {
namespace {

constexpr std::array<std::string_view, kNumGenres> kGenreNames = {
    "Action",  "Adventure", "Animation",       "Comedy",   "Crime",
    "Documentary", "Drama", "Fantasy",         "History",  "Horror",
    "Music",   "Mystery",   "Romance",         "Science Fiction",
    "TV Movie", "Thriller", "War",             "Western",
};

// Ascending ranks 1..N with ties sharing their average rank.
std::vector<double> AverageRanks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::string_view GenreName(Genre genre) {
  return kGenreNames[static_cast<int>(genre)];
}

std::optional<Genre> ParseGenre(std::string_view label) {
  for (int i = 0; i < kNumGenres; ++i) {
    if (kGenreNames[i] == label) return GenreAt(i);
  }
  return std::nullopt;
}

std::string FormatGenres(const GenreSet& genres) {
  std::string out;
  for (int i = 0; i < kNumGenres; ++i) {
    if (!genres.test(i)) continue;
    if (!out.empty()) out += '|';
    out += kGenreNames[i];
  }
  return out;
}

Catalog Catalog::Build(std::vector<Movie> movies,
                       std::vector<RatingEvent> events) {
  Catalog catalog;
  std::sort(movies.begin(), movies.end(),
            [](const Movie& a, const Movie& b) { return a.id < b.id; });
  catalog.movie_index_.reserve(movies.size());
  for (std::size_t i = 0; i < movies.size(); ++i) {
    const Movie& m = movies[i];
    if (m.id <= 0) {
      throw std::invalid_argument("movie id must be positive: " +
                                  std::to_string(m.id));
    }
    if (m.genres.none()) {
      throw std::invalid_argument("movie " + std::to_string(m.id) +
                                  " has no genres");
    }
    if (!catalog.movie_index_.emplace(m.id, i).second) {
      throw std::invalid_argument("duplicate movie id " + std::to_string(m.id));
    }
  }
  catalog.movies_ = std::move(movies);

  for (const RatingEvent& e : events) {
    if (e.user <= 0) {
      throw std::invalid_argument("user id must be positive: " +
                                  std::to_string(e.user));
    }
    if (!catalog.movie_index_.contains(e.movie)) {
      throw std::invalid_argument("rating for unknown movie " +
                                  std::to_string(e.movie));
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const RatingEvent& a, const RatingEvent& b) {
                     if (a.movie != b.movie) return a.movie < b.movie;
                     if (a.user != b.user) return a.user < b.user;
                     return a.timestamp < b.timestamp;
                   });
  catalog.events_ = std::move(events);

  const auto& ev = catalog.events_;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (i > 0 && ev[i - 1].movie == ev[i].movie && ev[i - 1].user == ev[i].user) {
      continue;
    }
    catalog.by_user_[ev[i].user].push_back({ev[i].movie, ev[i].timestamp});
  }
  for (auto& [user, list] : catalog.by_user_) {
    std::sort(list.begin(), list.end(),
              [](const FirstRating& a, const FirstRating& b) {
                return a.movie < b.movie;
              });
  }
  return catalog;
}

Catalog Catalog::Ingest(const std::filesystem::path& movies_file,
                        const std::filesystem::path& ratings_file) {
  std::vector<Movie> movies;
  {
    std::ifstream in(movies_file);
    if (!in) {
      throw std::runtime_error("cannot open " + movies_file.string());
    }
    CsvReader reader(in, movies_file.string());
    std::vector<std::string> fields;
    if (!reader.Next(fields) ||
        fields != std::vector<std::string>{"movieId", "title", "genres",
                                           "releaseDate"}) {
      reader.Fail("expected header movieId,title,genres,releaseDate");
    }
    while (reader.Next(fields)) {
      if (fields.size() != 4) reader.Fail("expected 4 columns");
      Movie m;
      try {
        m.id = ParseInt64(fields[0]);
      } catch (const std::invalid_argument& e) {
        reader.Fail(e.what());
      }
      if (m.id <= 0) reader.Fail("movieId must be positive");
      m.title = fields[1];
      std::string_view genres = fields[2];
      while (!genres.empty()) {
        const auto bar = genres.find('|');
        const auto label = genres.substr(0, bar);
        auto genre = ParseGenre(label);
        if (!genre) reader.Fail("unknown genre '" + std::string(label) + "'");
        m.genres.set(static_cast<int>(*genre));
        if (bar == std::string_view::npos) break;
        genres.remove_prefix(bar + 1);
      }
      if (m.genres.none()) reader.Fail("movie has no genres");
      if (!fields[3].empty()) {
        try {
          m.release_date = ParseDate(fields[3]);
        } catch (const std::invalid_argument& e) {
          reader.Fail(e.what());
        }
      }
      movies.push_back(std::move(m));
    }
  }

  std::vector<RatingEvent> events;
  {
    std::ifstream in(ratings_file);
    if (!in) {
      throw std::runtime_error("cannot open " + ratings_file.string());
    }
    CsvReader reader(in, ratings_file.string());
    std::vector<std::string> fields;
    if (!reader.Next(fields) ||
        fields != std::vector<std::string>{"userId", "movieId", "rating",
                                           "timestamp"}) {
      reader.Fail("expected header userId,movieId,rating,timestamp");
    }
    while (reader.Next(fields)) {
      if (fields.size() != 4) reader.Fail("expected 4 columns");
      RatingEvent e;
      try {
        e.user = ParseInt64(fields[0]);
        e.movie = ParseInt64(fields[1]);
        e.timestamp = ParseInt64(fields[3]);
      } catch (const std::invalid_argument& err) {
        reader.Fail(err.what());
      }
      auto rating = Rating::TryParse(fields[2]);
      if (!rating) reader.Fail("off-grid rating '" + fields[2] + "'");
      e.rating = *rating;
      events.push_back(e);
    }
  }

  try {
    return Build(std::move(movies), std::move(events));
  } catch (const std::invalid_argument& e) {
    throw FormatError(ratings_file.string(), 0, e.what());
  }
}

const Movie* Catalog::FindMovie(MovieId id) const {
  auto it = movie_index_.find(id);
  return it == movie_index_.end() ? nullptr : &movies_[it->second];
}

std::vector<RatingEvent> Catalog::CurrentRatings() const {
  std::vector<RatingEvent> out;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const bool last_of_pair = i + 1 == events_.size() ||
                              events_[i + 1].movie != events_[i].movie ||
                              events_[i + 1].user != events_[i].user;
    if (last_of_pair) out.push_back(events_[i]);
  }
  return out;
}

bool Catalog::HasRated(UserId user, MovieId movie, UnixSeconds at) const {
  auto it = by_user_.find(user);
  if (it == by_user_.end()) return false;
  const auto& list = it->second;
  auto pos = std::lower_bound(
      list.begin(), list.end(), movie,
      [](const FirstRating& r, MovieId m) { return r.movie < m; });
  return pos != list.end() && pos->movie == movie && pos->first <= at;
}

std::vector<MovieId> Catalog::RatedBy(UserId user, UnixSeconds at) const {
  std::vector<MovieId> out;
  auto it = by_user_.find(user);
  if (it == by_user_.end()) return out;
  for (const FirstRating& r : it->second) {
    if (r.first <= at) out.push_back(r.movie);
  }
  return out;
}

std::optional<UnixSeconds> Catalog::LatestTimestamp() const {
  if (events_.empty()) return std::nullopt;
  UnixSeconds latest = events_.front().timestamp;
  for (const auto& e : events_) latest = std::max(latest, e.timestamp);
  return latest;
}

void WriteMoviesCsv(const std::vector<Movie>& movies,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "movieId,title,genres,releaseDate\n";
  for (const Movie& m : movies) {
    out << m.id << ',' << CsvEscape(m.title) << ',' << FormatGenres(m.genres)
        << ',' << (m.release_date ? FormatDate(*m.release_date) : "") << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

CatalogSnapshot CatalogSnapshot::Compute(const Catalog& catalog,
                                         const Date& as_of) {
  CatalogSnapshot snap;
  snap.as_of_ = as_of;
  snap.lag_date_ = AddMonths(as_of, -1);
  const UnixSeconds now_cut = EndOfDay(as_of);
  const UnixSeconds lag_cut = EndOfDay(snap.lag_date_);

  std::unordered_map<MovieId, std::size_t> slot;
  for (const Movie& m : catalog.movies()) {
    if (m.release_date && *m.release_date > as_of) continue;
    slot.emplace(m.id, snap.entries_.size());
    snap.entries_.push_back(
        MovieStats{m.id, m.genres, m.release_date, 0, 0, std::nullopt, 0.0});
  }

  std::vector<double> sum(snap.entries_.size(), 0.0);
  std::vector<double> sum_sq(snap.entries_.size(), 0.0);
  auto events = catalog.events();
  std::size_t i = 0;
  while (i < events.size()) {
    std::size_t j = i;
    while (j + 1 < events.size() && events[j + 1].movie == events[i].movie &&
           events[j + 1].user == events[i].user) {
      ++j;
    }
    auto it = slot.find(events[i].movie);
    if (it != slot.end()) {
      // Events within the pair are ascending in time.
      const RatingEvent* at_now = nullptr;
      bool at_lag = false;
      for (std::size_t k = i; k <= j; ++k) {
        if (events[k].timestamp <= now_cut) at_now = &events[k];
        if (events[k].timestamp <= lag_cut) at_lag = true;
      }
      MovieStats& s = snap.entries_[it->second];
      if (at_now != nullptr) {
        ++s.num_ratings_now;
        const double r = at_now->rating.stars();
        sum[it->second] += r;
        sum_sq[it->second] += r * r;
      }
      if (at_lag) ++s.num_ratings_one_month_ago;
    }
    i = j + 1;
  }
  for (std::size_t k = 0; k < snap.entries_.size(); ++k) {
    MovieStats& s = snap.entries_[k];
    if (s.num_ratings_now > 0) {
      const double n = static_cast<double>(s.num_ratings_now);
      const double mean = sum[k] / n;
      s.avg_rating = mean;
      s.rating_variance = std::max(0.0, sum_sq[k] / n - mean * mean);
    }
  }
  snap.Index();
  return snap;
}

CatalogSnapshot CatalogSnapshot::FromStats(const Date& as_of,
                                           std::vector<MovieStats> stats) {
  CatalogSnapshot snap;
  snap.as_of_ = as_of;
  snap.lag_date_ = AddMonths(as_of, -1);
  std::sort(stats.begin(), stats.end(),
            [](const MovieStats& a, const MovieStats& b) {
              return a.movie < b.movie;
            });
  snap.entries_ = std::move(stats);
  snap.Index();
  return snap;
}

void CatalogSnapshot::Index() {
  index_.clear();
  index_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!index_.emplace(entries_[i].movie, i).second) {
      throw std::invalid_argument("duplicate movie in snapshot: " +
                                  std::to_string(entries_[i].movie));
    }
  }

  std::vector<std::size_t> rated;
  std::vector<double> counts;
  std::vector<double> avgs;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].num_ratings_now > 0 && entries_[i].avg_rating) {
      rated.push_back(i);
      counts.push_back(static_cast<double>(entries_[i].num_ratings_now));
      avgs.push_back(*entries_[i].avg_rating);
    }
  }
  rating_scores_.assign(entries_.size(), 0.0);
  const auto count_ranks = AverageRanks(counts);
  const auto avg_ranks = AverageRanks(avgs);
  const double n = static_cast<double>(rated.size());
  for (std::size_t k = 0; k < rated.size(); ++k) {
    rating_scores_[rated[k]] = (count_ranks[k] / n) * (avg_ranks[k] / n);
  }
}

const MovieStats* CatalogSnapshot::Find(MovieId movie) const {
  auto it = index_.find(movie);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

GenreShares::GenreShares(std::array<std::int64_t, kNumGenres> counts,
                         std::int64_t total)
    : counts_(counts), total_(total) {
  if (total_ <= 0) {
    throw std::invalid_argument("genre shares need a non-empty catalog");
  }
}

double GenreShares::share(Genre genre) const {
  return static_cast<double>(count(genre)) / static_cast<double>(total_);
}

double GenreShares::sum() const {
  double s = 0.0;
  for (int g = 0; g < kNumGenres; ++g) s += share(GenreAt(g));
  return s;
}

GenreShares ComputeGenreShares(const Catalog& catalog) {
  std::array<std::int64_t, kNumGenres> counts{};
  for (const Movie& m : catalog.movies()) {
    for (int g = 0; g < kNumGenres; ++g) counts[g] += m.genres.test(g);
  }
  return GenreShares(counts, static_cast<std::int64_t>(catalog.movies().size()));
}

GenreShares ComputeGenreShares(const CatalogSnapshot& snapshot) {
  std::array<std::int64_t, kNumGenres> counts{};
  for (const MovieStats& m : snapshot.entries()) {
    for (int g = 0; g < kNumGenres; ++g) counts[g] += m.genres.test(g);
  }
  return GenreShares(counts,
                     static_cast<std::int64_t>(snapshot.entries().size()));
}

std::optional<double> RatingScore(MovieId movie,
                                  const CatalogSnapshot& snapshot) {
  const MovieStats* s = snapshot.Find(movie);
  if (s == nullptr) return std::nullopt;
  return snapshot.rating_score_at(
      static_cast<std::size_t>(s - snapshot.entries().data()));
}

double TrendyScore(const MovieStats& stats, std::int64_t num_rating_threshold) {
  if (stats.num_ratings_now < num_rating_threshold) return 0.0;
  const std::int64_t delta =
      stats.num_ratings_now - stats.num_ratings_one_month_ago;
  if (delta <= 0 || stats.num_ratings_now <= 0) return 0.0;
  const double d = static_cast<double>(delta);
  return d * std::log(d) / static_cast<double>(stats.num_ratings_now);
}

bool IsRecentRelease(const std::optional<Date>& release_date,
                     const Date& as_of, int months) {
  if (!release_date) return false;
  return AddMonths(as_of, -months) <= *release_date && *release_date <= as_of;
}

}  // namespace elicit
