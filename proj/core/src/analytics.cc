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

#include "elicit/analytics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <boost/math/distributions/students_t.hpp>

namespace elicit {
namespace {

std::string JoinNames(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

double TwoSidedP(double t, double df) {
  if (!(df > 0.0) || !std::isfinite(t)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

struct PairKey {
  UserId user;
  MovieId movie;
  bool operator==(const PairKey&) const = default;
};

struct PairHash {
  std::size_t operator()(const PairKey& k) const {
    return std::hash<std::int64_t>()(k.user * 1000003 + k.movie);
  }
};

}  // namespace

RankDeficientError::RankDeficientError(std::vector<std::string> columns)
    : std::invalid_argument("rank-deficient design; collinear columns: " +
                            JoinNames(columns)),
      columns_(std::move(columns)) {}

RegressionResult Ols(std::span<const DesignRow> rows,
                     std::vector<std::string> names) {
  const std::size_t k = rows.empty() ? names.size() : rows.front().features.size();
  if (names.empty()) {
    for (std::size_t j = 0; j < k; ++j) names.push_back("x" + std::to_string(j + 1));
  }
  if (names.size() != k) {
    throw std::invalid_argument("feature names do not match the design width");
  }
  for (const auto& r : rows) {
    if (r.features.size() != k) {
      throw std::invalid_argument("ragged design rows");
    }
  }
  const std::size_t p = k + 1;
  std::vector<std::string> all_names = {"intercept"};
  all_names.insert(all_names.end(), names.begin(), names.end());

  // Normal equations, accumulated in long double.
  std::vector<long double> xtx(p * p, 0.0L);
  std::vector<long double> xty(p, 0.0L);
  std::vector<long double> x(p);
  for (const auto& r : rows) {
    x[0] = 1.0L;
    for (std::size_t j = 0; j < k; ++j) x[j + 1] = r.features[j];
    for (std::size_t a = 0; a < p; ++a) {
      xty[a] += x[a] * r.target;
      for (std::size_t b = 0; b <= a; ++b) xtx[a * p + b] += x[a] * x[b];
    }
  }
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a + 1; b < p; ++b) xtx[a * p + b] = xtx[b * p + a];
  }

  // Cholesky; a pivot that collapses relative to its diagonal marks a column
  // spanned by the ones before it.
  std::vector<long double> chol(p * p, 0.0L);
  for (std::size_t j = 0; j < p; ++j) {
    long double d = xtx[j * p + j];
    for (std::size_t m = 0; m < j; ++m) d -= chol[j * p + m] * chol[j * p + m];
    const long double scale = xtx[j * p + j];
    if (!(d > 1e-10L * std::max(scale, 1e-300L))) {
      std::vector<std::string> cols;
      for (std::size_t m = 0; m < j; ++m) cols.push_back(all_names[m]);
      cols.push_back(all_names[j]);
      if (rows.size() < p) cols = all_names;
      throw RankDeficientError(cols);
    }
    chol[j * p + j] = std::sqrt(d);
    for (std::size_t i = j + 1; i < p; ++i) {
      long double s = xtx[i * p + j];
      for (std::size_t m = 0; m < j; ++m) s -= chol[i * p + m] * chol[j * p + m];
      chol[i * p + j] = s / chol[j * p + j];
    }
  }

  auto solve = [&](std::vector<long double> rhs) {
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t m = 0; m < i; ++m) rhs[i] -= chol[i * p + m] * rhs[m];
      rhs[i] /= chol[i * p + i];
    }
    for (std::size_t i = p; i-- > 0;) {
      for (std::size_t m = i + 1; m < p; ++m) rhs[i] -= chol[m * p + i] * rhs[m];
      rhs[i] /= chol[i * p + i];
    }
    return rhs;
  };
  const auto beta = solve(xty);

  long double mean_y = 0.0L;
  for (const auto& r : rows) mean_y += r.target;
  mean_y /= static_cast<long double>(rows.size());
  long double ssr = 0.0L;
  long double sst = 0.0L;
  for (const auto& r : rows) {
    long double fit = beta[0];
    for (std::size_t j = 0; j < k; ++j) fit += beta[j + 1] * r.features[j];
    ssr += (r.target - fit) * (r.target - fit);
    sst += (r.target - mean_y) * (r.target - mean_y);
  }

  RegressionResult out;
  out.names = names;
  out.n = rows.size();
  out.intercept = static_cast<double>(beta[0]);
  const double df = static_cast<double>(rows.size()) - static_cast<double>(p);
  const long double sigma2 = df > 0 ? ssr / static_cast<long double>(df) : 0.0L;
  std::vector<double> se(p);
  for (std::size_t j = 0; j < p; ++j) {
    std::vector<long double> e(p, 0.0L);
    e[j] = 1.0L;
    const auto col = solve(e);
    se[j] = static_cast<double>(std::sqrt(std::max(0.0L, sigma2 * col[j])));
  }
  out.intercept_standard_error = se[0];
  for (std::size_t j = 0; j < k; ++j) {
    out.coefficients.push_back(static_cast<double>(beta[j + 1]));
    out.standard_errors.push_back(se[j + 1]);
    const double t = se[j + 1] > 0 ? out.coefficients.back() / se[j + 1]
                                   : std::numeric_limits<double>::quiet_NaN();
    out.p_values.push_back(TwoSidedP(t, df));
  }
  out.r_squared = sst > 0 ? static_cast<double>(std::clamp(1.0L - ssr / sst, 0.0L, 1.0L))
                          : 0.0;
  return out;
}

ResponseStats ComputeResponseStats(std::span<const ElicitationRequest> requests,
                                   std::span<const BeliefRecord> beliefs) {
  ResponseStats s;
  std::unordered_map<UserId, std::pair<std::size_t, std::size_t>> per_user;
  std::unordered_set<MovieId> requested_movies;
  std::unordered_set<MovieId> responded_movies;
  for (const auto& q : requests) {
    ++per_user[q.user].first;
    requested_movies.insert(q.movie);
  }
  for (const auto& b : beliefs) {
    if (b.is_seen == -1) continue;
    ++per_user[b.user].second;
    responded_movies.insert(b.movie);
    ++s.total_responses;
  }
  s.total_requests = requests.size();
  s.requested_movies = requested_movies.size();
  s.responded_movies = responded_movies.size();
  std::vector<double> ratios;
  for (const auto& [user, counts] : per_user) {
    const auto [req, resp] = counts;
    if (req > 0) ++s.requested_users;
    if (resp == 0) {
      ++s.never_responders;
      continue;
    }
    ++s.responding_users;
    ratios.push_back(static_cast<double>(resp) /
                     static_cast<double>(std::max(req, resp)));
  }
  if (!ratios.empty()) {
    double sum = 0.0;
    for (double r : ratios) sum += r;
    s.mean_response_ratio = sum / static_cast<double>(ratios.size());
    std::sort(ratios.begin(), ratios.end());
    const std::size_t n = ratios.size();
    s.median_response_ratio =
        n % 2 == 1 ? ratios[n / 2] : (ratios[n / 2 - 1] + ratios[n / 2]) / 2.0;
    s.mean_responses_per_responder =
        static_cast<double>(s.total_responses) / static_cast<double>(n);
  }
  return s;
}

double Popularity(const MovieStats& stats) {
  return std::log1p(static_cast<double>(stats.num_ratings_now));
}

RegressionResult MovieSelectionRegression(
    std::span<const ElicitationRequest> requests,
    std::span<const BeliefRecord> beliefs, const CatalogSnapshot& snapshot) {
  std::map<MovieId, std::pair<std::size_t, std::size_t>> per_movie;
  for (const auto& q : requests) ++per_movie[q.movie].first;
  for (const auto& b : beliefs) {
    if (b.is_seen == -1) continue;
    auto it = per_movie.find(b.movie);
    if (it != per_movie.end()) ++it->second.second;
  }
  std::vector<DesignRow> rows;
  for (const auto& [movie, counts] : per_movie) {
    const MovieStats* s = snapshot.Find(movie);
    if (s == nullptr) continue;
    rows.push_back({{Popularity(*s), s->rating_variance},
                    static_cast<double>(counts.second) /
                        static_cast<double>(counts.first)});
  }
  return Ols(rows, {"popularity", "rating_variance"});
}

RegressionResult UncertaintyPopularityRegression(
    std::span<const BeliefRecord> beliefs, const CatalogSnapshot& snapshot) {
  std::vector<DesignRow> rows;
  for (const auto& b : beliefs) {
    if (b.is_seen != 0 || !b.certainty) continue;
    const MovieStats* s = snapshot.Find(b.movie);
    if (s == nullptr) continue;
    rows.push_back({{Popularity(*s)}, 6.0 - *b.certainty});
  }
  return Ols(rows, {"popularity"});
}

RegressionResult WatchLpm(std::span<const BeliefRecord> beliefs,
                          std::span<const RatingEvent> ratings) {
  std::unordered_map<PairKey, UnixSeconds, PairHash> last_rating;
  for (const auto& r : ratings) {
    auto [it, inserted] = last_rating.try_emplace({r.user, r.movie}, r.timestamp);
    if (!inserted) it->second = std::max(it->second, r.timestamp);
  }
  std::vector<DesignRow> rows;
  for (const auto& b : beliefs) {
    if (b.is_seen != 0 || !b.predict_rating || !b.certainty) continue;
    auto it = last_rating.find({b.user, b.movie});
    const bool watched = it != last_rating.end() && it->second > b.timestamp;
    rows.push_back({{b.predict_rating->stars(), 6.0 - *b.certainty},
                    watched ? 1.0 : 0.0});
  }
  return Ols(rows, {"predicted_rating", "uncertainty"});
}

OverlapMetrics ComputeOverlap(std::span<const ElicitationRequest> requests,
                              std::span<const BeliefRecord> beliefs,
                              std::span<const RecommendationLogRecord> recs) {
  std::unordered_map<UserId, std::unordered_set<MovieId>> recommended;
  for (const auto& r : recs) recommended[r.user].insert(r.movie);
  std::map<UserId, std::set<MovieId>> requested;
  std::map<UserId, std::set<MovieId>> responded;
  for (const auto& q : requests) requested[q.user].insert(q.movie);
  for (const auto& b : beliefs) {
    if (b.is_seen != -1) responded[b.user].insert(b.movie);
  }
  auto mean_overlap = [&](const std::map<UserId, std::set<MovieId>>& sets,
                          std::size_t* users) {
    double sum = 0.0;
    for (const auto& [user, movies] : sets) {
      auto it = recommended.find(user);
      std::size_t hit = 0;
      if (it != recommended.end()) {
        for (MovieId m : movies) hit += it->second.contains(m);
      }
      sum += static_cast<double>(hit) / static_cast<double>(movies.size());
    }
    *users = sets.size();
    return sets.empty() ? 0.0 : sum / static_cast<double>(sets.size());
  };
  OverlapMetrics m;
  m.request_overlap = mean_overlap(requested, &m.users_with_requests);
  m.response_overlap = mean_overlap(responded, &m.users_with_responses);
  return m;
}

namespace {

void AppendRegressionKv(std::ostringstream& out, const std::string& key,
                        const RegressionResult& r) {
  out << key << ".n=" << r.n << '\n';
  out << key << ".r_squared=" << r.r_squared << '\n';
  out << key << ".intercept=" << r.intercept << '\n';
  for (std::size_t j = 0; j < r.names.size(); ++j) {
    out << key << '.' << r.names[j] << ".coef=" << r.coefficients[j] << '\n';
    out << key << '.' << r.names[j] << ".se=" << r.standard_errors[j] << '\n';
    out << key << '.' << r.names[j] << ".p=" << r.p_values[j] << '\n';
  }
}

void AppendRegressionText(std::ostringstream& out, const std::string& title,
                          const RegressionResult& r) {
  char line[160];
  out << title << " (n=" << r.n << ", R^2=" << r.r_squared << ")\n";
  std::snprintf(line, sizeof(line), "  %-18s %12s %12s %10s\n", "term", "coef",
                "se", "p");
  out << line;
  std::snprintf(line, sizeof(line), "  %-18s %12.6f %12.6f %10s\n", "intercept",
                r.intercept, r.intercept_standard_error, "");
  out << line;
  for (std::size_t j = 0; j < r.names.size(); ++j) {
    std::snprintf(line, sizeof(line), "  %-18s %12.6f %12.6f %10.4g\n",
                  r.names[j].c_str(), r.coefficients[j], r.standard_errors[j],
                  r.p_values[j]);
    out << line;
  }
}

}  // namespace

std::string AnalysisReport::ToText() const {
  std::ostringstream out;
  char line[160];
  const auto row = [&](const char* name, double value) {
    std::snprintf(line, sizeof(line), "  %-34s %14.6g\n", name, value);
    out << line;
  };
  out << "Response volume\n";
  row("elicitation requests", static_cast<double>(responses.total_requests));
  row("belief responses", static_cast<double>(responses.total_responses));
  row("requested users", static_cast<double>(responses.requested_users));
  row("responding users", static_cast<double>(responses.responding_users));
  row("responded movies", static_cast<double>(responses.responded_movies));
  row("never responders", static_cast<double>(responses.never_responders));
  row("response ratio mean", responses.mean_response_ratio);
  row("response ratio median", responses.median_response_ratio);
  row("responses per responder", responses.mean_responses_per_responder);
  out << "\nRecommendation overlap\n";
  row("request overlap", overlap.request_overlap);
  row("response overlap", overlap.response_overlap);
  out << '\n';
  if (movie_selection) AppendRegressionText(out, "Movie selection", *movie_selection);
  if (uncertainty_popularity) {
    AppendRegressionText(out, "Uncertainty on popularity", *uncertainty_popularity);
  }
  if (watch_lpm) AppendRegressionText(out, "Watch LPM", *watch_lpm);
  for (const auto& [key, note] : notes) out << key << ": " << note << '\n';
  return out.str();
}

std::string AnalysisReport::ToKeyValue() const {
  std::ostringstream out;
  out.precision(10);
  out << "responses.total_requests=" << responses.total_requests << '\n';
  out << "responses.total_responses=" << responses.total_responses << '\n';
  out << "responses.requested_users=" << responses.requested_users << '\n';
  out << "responses.requested_movies=" << responses.requested_movies << '\n';
  out << "responses.responding_users=" << responses.responding_users << '\n';
  out << "responses.responded_movies=" << responses.responded_movies << '\n';
  out << "responses.never_responders=" << responses.never_responders << '\n';
  out << "responses.mean_ratio=" << responses.mean_response_ratio << '\n';
  out << "responses.median_ratio=" << responses.median_response_ratio << '\n';
  out << "responses.per_responder=" << responses.mean_responses_per_responder << '\n';
  out << "overlap.request=" << overlap.request_overlap << '\n';
  out << "overlap.response=" << overlap.response_overlap << '\n';
  if (movie_selection) AppendRegressionKv(out, "movie_selection", *movie_selection);
  if (uncertainty_popularity) {
    AppendRegressionKv(out, "uncertainty_popularity", *uncertainty_popularity);
  }
  if (watch_lpm) AppendRegressionKv(out, "watch_lpm", *watch_lpm);
  for (const auto& [key, note] : notes) out << key << ".error=" << note << '\n';
  return out.str();
}

AnalysisReport AnalyzeCorpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  auto read_if = [&](std::string_view file, auto reader) {
    using T = decltype(reader(dir / file));
    return fs::exists(dir / file) ? reader(dir / file) : T{};
  };
  const auto requests = read_if(kElicitLogFile, ReadElicitLog);
  const auto beliefs = read_if(kBeliefsFile, ReadBeliefs);
  const auto ratings = read_if(kRatingsFile, ReadRatings);
  const auto recs = read_if(kRecLogFile, ReadRecLog);

  AnalysisReport report;
  report.responses = ComputeResponseStats(requests, beliefs);
  report.overlap = ComputeOverlap(requests, beliefs, recs);

  auto attempt = [&](const char* key, auto fn, std::optional<RegressionResult>& slot) {
    try {
      slot = fn();
    } catch (const std::exception& e) {
      report.notes.emplace_back(key, e.what());
    }
  };
  attempt("watch_lpm", [&] { return WatchLpm(beliefs, ratings); }, report.watch_lpm);

  if (!fs::exists(dir / kMoviesFile)) {
    report.notes.emplace_back("snapshot", "movies.csv missing; snapshot regressions skipped");
    return report;
  }
  UnixSeconds latest = 0;
  for (const auto& q : requests) latest = std::max(latest, q.timestamp);
  for (const auto& b : beliefs) latest = std::max(latest, b.timestamp);
  for (const auto& r : ratings) latest = std::max(latest, r.timestamp);
  const Catalog catalog = Catalog::Ingest(dir / kMoviesFile, dir / kRatingsFile);
  const auto snapshot = CatalogSnapshot::Compute(catalog, DateOf(latest));
  attempt("movie_selection",
          [&] { return MovieSelectionRegression(requests, beliefs, snapshot); },
          report.movie_selection);
  attempt("uncertainty_popularity",
          [&] { return UncertaintyPopularityRegression(beliefs, snapshot); },
          report.uncertainty_popularity);
  return report;
}

}  // namespace elicit
