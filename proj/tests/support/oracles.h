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

#ifndef ELICIT_TESTS_ORACLES_H_
#define ELICIT_TESTS_ORACLES_H_

// Slow reference implementations written from the definitions, without
// sharing code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "elicit/calendar.h"
#include "elicit/catalog.h"

namespace elicit::oracle {

// Percentile = (movies strictly below + half of the ties, self included) / N
// over rated movies.
inline double RatingScore(MovieId movie, const std::vector<MovieStats>& all) {
  std::vector<const MovieStats*> rated;
  const MovieStats* self = nullptr;
  for (const auto& s : all) {
    if (s.num_ratings_now > 0) rated.push_back(&s);
    if (s.movie == movie) self = &s;
  }
  if (self == nullptr || self->num_ratings_now == 0) return 0.0;
  auto pct = [&](auto key) {
    double below = 0, equal = 0;
    for (const auto* o : rated) {
      if (key(*o) < key(*self)) ++below;
      if (key(*o) == key(*self)) ++equal;
    }
    return (below + (equal + 1) / 2) / static_cast<double>(rated.size());
  };
  return pct([](const MovieStats& s) { return static_cast<double>(s.num_ratings_now); }) *
         pct([](const MovieStats& s) { return *s.avg_rating; });
}

inline double Trendy(std::int64_t now, std::int64_t ago, std::int64_t threshold = 100) {
  if (now < threshold) return 0.0;
  const double d = static_cast<double>(now - ago);
  if (d <= 0) return 0.0;
  return d * std::log(d) / static_cast<double>(now);
}

// Release within [as_of - months, as_of], month arithmetic by hand.
inline bool Recent(const std::optional<Date>& release, const Date& as_of, int months = 6) {
  if (!release) return false;
  int y = static_cast<int>(as_of.year());
  int m = static_cast<int>(static_cast<unsigned>(as_of.month())) - months;
  while (m <= 0) {
    m += 12;
    --y;
  }
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int last = kDays[m - 1];
  if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) last = 29;
  const int d = std::min(static_cast<int>(static_cast<unsigned>(as_of.day())), last);
  const auto key = [](int yy, int mm, int dd) { return (yy * 100 + mm) * 100 + dd; };
  const auto r = key(static_cast<int>(release->year()),
                     static_cast<int>(static_cast<unsigned>(release->month())),
                     static_cast<int>(static_cast<unsigned>(release->day())));
  const auto a = key(static_cast<int>(as_of.year()),
                     static_cast<int>(static_cast<unsigned>(as_of.month())),
                     static_cast<int>(static_cast<unsigned>(as_of.day())));
  return key(y, m, d) <= r && r <= a;
}

// ceil(count * base * y_num / (total * y_den)) in integers.
inline std::int64_t Quota(std::int64_t count, std::int64_t total, int base,
                          std::int64_t y_num, std::int64_t y_den = 1) {
  const std::int64_t num = count * base * y_num;
  const std::int64_t den = total * y_den;
  return (num + den - 1) / den;
}

struct Pick {
  MovieId movie;
  double score;
  std::int64_t ratings;
};

// Expected top-k for every deterministic criterion (0..3) and genre.
inline std::map<std::pair<int, int>, std::set<MovieId>> DeterministicSelections(
    const std::vector<MovieStats>& all, const Date& as_of, std::int64_t y_num,
    std::int64_t y_den = 1) {
  static constexpr int kBase[] = {50, 25, 10, 10};
  std::map<MovieId, double> rscore;
  for (const auto& s : all) rscore[s.movie] = RatingScore(s.movie, all);
  std::map<std::pair<int, int>, std::set<MovieId>> out;
  for (int g = 0; g < kNumGenres; ++g) {
    std::int64_t count = 0;
    for (const auto& s : all) count += s.genres.test(g) ? 1 : 0;
    if (count == 0) continue;
    for (int c = 0; c < 4; ++c) {
      std::vector<Pick> picks;
      for (const auto& s : all) {
        if (!s.genres.test(g)) continue;
        const auto n = s.num_ratings_now;
        if (c == 0) picks.push_back({s.movie, static_cast<double>(n), n});
        if (c == 1 && n >= 1) picks.push_back({s.movie, rscore[s.movie], n});
        if (c == 2 && Recent(s.release_date, as_of)) {
          picks.push_back({s.movie, static_cast<double>(n), n});
        }
        if (c == 3) {
          const double t = Trendy(n, s.num_ratings_one_month_ago);
          if (t > 0) picks.push_back({s.movie, t, n});
        }
      }
      // Selection by repeated scans for the best remaining pick.
      const std::int64_t quota = Quota(count, static_cast<std::int64_t>(all.size()),
                                       kBase[c], y_num, y_den);
      std::set<MovieId> chosen;
      std::vector<bool> used(picks.size(), false);
      for (std::int64_t k = 0; k < quota && k < static_cast<std::int64_t>(picks.size()); ++k) {
        int best = -1;
        for (std::size_t i = 0; i < picks.size(); ++i) {
          if (used[i]) continue;
          if (best < 0) {
            best = static_cast<int>(i);
            continue;
          }
          const Pick& a = picks[i];
          const Pick& b = picks[best];
          const bool better = a.score > b.score ||
                              (a.score == b.score && (a.ratings > b.ratings ||
                                                      (a.ratings == b.ratings && a.movie < b.movie)));
          if (better) best = static_cast<int>(i);
        }
        used[best] = true;
        chosen.insert(picks[best].movie);
      }
      out[{g, c}] = std::move(chosen);
    }
  }
  return out;
}

// Gaussian beliefs only; utility is linear (risk_aversion == 0) or
// -exp(-a x), both evaluated in closed form.
struct SlateProblem {
  std::map<MovieId, std::pair<double, double>> beliefs;  // mean, sd
  std::map<MovieId, double> truths;
  double noise_sd = 1.0;
  double risk_aversion = 0.0;
  int draws = 2000;
  std::uint64_t seed = 0x5eed;
};

inline double ClosedFormEu(double mean, double sd, double a) {
  if (a == 0.0) return mean;
  return -std::exp(-a * mean + a * a * sd * sd / 2);
}

// Mean of max expected utility after updating the slate movies on signals
// drawn in slate order, one N(0,1) per movie per draw.
inline double SlateValue(const SlateProblem& p, const std::vector<MovieId>& slate) {
  double outside = -INFINITY;
  for (const auto& [m, b] : p.beliefs) {
    if (std::find(slate.begin(), slate.end(), m) == slate.end()) {
      outside = std::max(outside, ClosedFormEu(b.first, b.second, p.risk_aversion));
    }
  }
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> z(0.0, 1.0);
  double total = 0.0;
  for (int d = 0; d < p.draws; ++d) {
    double best = outside;
    for (MovieId m : slate) {
      const auto [mu, sd] = p.beliefs.at(m);
      const double s = p.truths.at(m) + p.noise_sd * z(rng);
      double post_mu = mu, post_sd = sd;
      if (sd > 0) {
        const double tau = 1 / (sd * sd) + 1 / (p.noise_sd * p.noise_sd);
        post_mu = (mu / (sd * sd) + s / (p.noise_sd * p.noise_sd)) / tau;
        post_sd = std::sqrt(1 / tau);
      }
      best = std::max(best, ClosedFormEu(post_mu, post_sd, p.risk_aversion));
    }
    total += best;
  }
  return total / p.draws;
}

struct SlateChoice {
  std::vector<MovieId> slate;
  double value;
  // Gap to the runner-up.
  double margin;
};

// Every k-subset via bitmasks over the sorted candidates.
inline SlateChoice BestSlate(const SlateProblem& p, std::vector<MovieId> candidates, int k) {
  std::sort(candidates.begin(), candidates.end());
  const int n = static_cast<int>(candidates.size());
  std::vector<std::pair<std::vector<MovieId>, double>> all;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != k) continue;
    std::vector<MovieId> slate;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) slate.push_back(candidates[i]);
    }
    all.emplace_back(slate, SlateValue(p, slate));
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  const double margin = all.size() > 1 ? all[0].second - all[1].second : INFINITY;
  return {all[0].first, all[0].second, margin};
}

}  // namespace elicit::oracle

#endif  // ELICIT_TESTS_ORACLES_H_
