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
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "test_support.h"

namespace elicit {
namespace {

using testing::Stats;

std::vector<DesignRow> Points(std::initializer_list<std::pair<double, double>> xy) {
  std::vector<DesignRow> rows;
  for (auto [x, y] : xy) rows.push_back({{x}, y});
  return rows;
}

TEST(Ols, ExactLine) {
  const auto r = Ols(Points({{0, 0}, {1, 1}, {2, 2}}));
  EXPECT_NEAR(r.coefficients[0], 1.0, 1e-12);
  EXPECT_NEAR(r.intercept, 0.0, 1e-12);
  EXPECT_NEAR(r.r_squared, 1.0, 1e-12);
  EXPECT_EQ(r.n, 3u);
  EXPECT_EQ(r.names, (std::vector<std::string>{"x1"}));
}

TEST(Ols, ConstantTarget) {
  const auto r = Ols(Points({{0, 4}, {1, 4}, {2, 4}, {5, 4}}), {"pop"});
  EXPECT_NEAR(r.coefficients[0], 0.0, 1e-12);
  EXPECT_NEAR(r.intercept, 4.0, 1e-12);
  EXPECT_EQ(r.r_squared, 0.0);
  EXPECT_EQ(r.names[0], "pop");
}

TEST(Ols, PValueMatchesTable) {
  // Two-sided p for t = 2.228 with 10 degrees of freedom is 0.05.
  // Build residuals so that slope / se = t exactly: symmetric design.
  std::vector<DesignRow> rows;
  for (int i = -6; i <= 5; ++i) rows.push_back({{static_cast<double>(i)}, 0.0});
  // Target = b x + e with e orthogonal to (1, x).
  const double b = 0.3;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  std::vector<double> e(rows.size());
  for (auto& v : e) v = z(rng);
  Eigen::MatrixXd X(rows.size(), 2);
  Eigen::VectorXd E(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    X(i, 0) = 1;
    X(i, 1) = rows[i].features[0];
    E(i) = e[i];
  }
  E -= X * (X.transpose() * X).ldlt().solve(X.transpose() * E);
  // Scale residuals so that t = 2.228.
  const double sxx = (X.col(1).array() - X.col(1).mean()).square().sum();
  const double se_unit = std::sqrt(E.squaredNorm() / 10 / sxx);
  E *= b / (2.228 * se_unit);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].target = b * X(i, 1) + E(i);
  const auto r = Ols(rows);
  EXPECT_NEAR(r.coefficients[0] / r.standard_errors[0], 2.228, 1e-9);
  EXPECT_NEAR(r.p_values[0], 0.05, 1e-4);
}

TEST(Ols, RankDeficiencyNamesColumns) {
  std::vector<DesignRow> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({{double(i), 2.0 * i, 1.0 * (i % 3)}, double(i)});
  try {
    Ols(rows, {"a", "b", "c"});
    FAIL();
  } catch (const RankDeficientError& e) {
    const auto& cols = e.columns();
    EXPECT_NE(std::find(cols.begin(), cols.end(), "b"), cols.end());
    EXPECT_NE(std::find(cols.begin(), cols.end(), "a"), cols.end());
    EXPECT_NE(std::string(e.what()).find("b"), std::string::npos);
  }
  // A constant feature collides with the intercept.
  try {
    Ols(Points({{1, 0}, {1, 1}, {1, 2}}), {"k"});
    FAIL();
  } catch (const RankDeficientError& e) {
    EXPECT_NE(std::find(e.columns().begin(), e.columns().end(), "k"), e.columns().end());
  }
  EXPECT_THROW(Ols(Points({{1, 1}})), RankDeficientError);
}

TEST(OlsProperty, MatchesPseudoInverse) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> scale(0.1, 10);
  for (int t = 0; t < 100; ++t) {
    const int n = t == 0 ? 200 : 20 + static_cast<int>(rng() % 300);
    const int p = 1 + static_cast<int>(rng() % 4);
    std::vector<DesignRow> rows(n);
    Eigen::MatrixXd X(n, p + 1);
    Eigen::VectorXd y(n);
    std::vector<double> s(p);
    for (auto& v : s) v = scale(rng);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = 1;
      rows[i].features.resize(p);
      double target = z(rng);
      for (int j = 0; j < p; ++j) {
        const double x = s[j] * z(rng) + j;
        rows[i].features[j] = x;
        X(i, j + 1) = x;
        target += 0.5 * (j + 1) * x;
      }
      rows[i].target = target;
      y(i) = target;
    }
    const Eigen::MatrixXd pinv = X.completeOrthogonalDecomposition().pseudoInverse();
    const Eigen::VectorXd beta = pinv * y;
    const Eigen::VectorXd resid = y - X * beta;
    const double sigma2 = resid.squaredNorm() / (n - p - 1);
    const Eigen::MatrixXd cov = sigma2 * (pinv * pinv.transpose());
    const double sst = (y.array() - y.mean()).square().sum();
    const auto r = Ols(rows);
    EXPECT_NEAR(r.intercept, beta(0), 1e-9);
    EXPECT_NEAR(r.intercept_standard_error, std::sqrt(cov(0, 0)), 1e-9);
    for (int j = 0; j < p; ++j) {
      EXPECT_NEAR(r.coefficients[j], beta(j + 1), 1e-9) << t;
      EXPECT_NEAR(r.standard_errors[j], std::sqrt(cov(j + 1, j + 1)), 1e-9) << t;
    }
    EXPECT_NEAR(r.r_squared, 1 - resid.squaredNorm() / sst, 1e-9);
    EXPECT_GE(r.r_squared, 0.0);
    EXPECT_LE(r.r_squared, 1.0);
  }
}

std::vector<ElicitationRequest> Requests(UserId user, int n, MovieId first = 1) {
  std::vector<ElicitationRequest> out;
  for (int i = 0; i < n; ++i) out.push_back({100, user, first + i, SlotSource::kBroad, "b"});
  return out;
}

BeliefRecord Unseen(UserId user, MovieId movie, double predict, int certainty,
                    UnixSeconds at = 200) {
  return {at, user, movie, 0, std::nullopt, std::nullopt, Rating::FromStars(predict), certainty};
}

BeliefRecord NoResponse(UserId user, MovieId movie) {
  return {200, user, movie, -1, {}, {}, {}, {}};
}

TEST(ResponseStats, Ratio) {
  const auto req = Requests(1, 10);
  std::vector<BeliefRecord> beliefs = {Unseen(1, 1, 3, 3), Unseen(1, 2, 3, 3), NoResponse(1, 3)};
  const auto s = ComputeResponseStats(req, beliefs);
  EXPECT_EQ(s.total_requests, 10u);
  EXPECT_EQ(s.total_responses, 2u);
  EXPECT_DOUBLE_EQ(s.mean_response_ratio, 0.2);
  EXPECT_DOUBLE_EQ(s.median_response_ratio, 0.2);
  EXPECT_EQ(s.never_responders, 0u);
}

TEST(ResponseStats, NeverRespondersExcludedFromRatio) {
  auto req = Requests(1, 10);
  for (const auto& r : Requests(2, 4)) req.push_back(r);
  for (const auto& r : Requests(3, 5)) req.push_back(r);
  std::vector<BeliefRecord> beliefs = {Unseen(1, 1, 3, 3), Unseen(3, 1, 3, 3), NoResponse(2, 1)};
  const auto s = ComputeResponseStats(req, beliefs);
  EXPECT_EQ(s.never_responders, 1u);
  EXPECT_EQ(s.responding_users, 2u);
  EXPECT_EQ(s.requested_users, 3u);
  EXPECT_DOUBLE_EQ(s.mean_response_ratio, (0.1 + 0.2) / 2);
  EXPECT_DOUBLE_EQ(s.mean_responses_per_responder, 1.0);
}

TEST(ResponseStats, EmptyLogs) {
  const auto s = ComputeResponseStats({}, {});
  EXPECT_EQ(s.total_requests, 0u);
  EXPECT_EQ(s.mean_response_ratio, 0.0);
}

TEST(Overlap, Definition) {
  const auto req = Requests(1, 3);
  std::vector<BeliefRecord> beliefs = {Unseen(1, 1, 3, 3), Unseen(1, 2, 3, 3)};
  std::vector<RecommendationLogRecord> recs = {{50, 1, 1, 1}, {50, 2, 1, 1}};
  const auto o = ComputeOverlap(req, beliefs, recs);
  EXPECT_DOUBLE_EQ(o.request_overlap, 1.0 / 3);
  EXPECT_DOUBLE_EQ(o.response_overlap, 0.5);
  EXPECT_EQ(o.users_with_requests, 1u);
  const auto d = ComputeOverlap(req, beliefs, std::vector<RecommendationLogRecord>{{50, 1, 1, 99}});
  EXPECT_EQ(d.request_overlap, 0.0);
  EXPECT_EQ(d.response_overlap, 0.0);
}

CatalogSnapshot SnapshotWithCounts(int movies) {
  std::vector<MovieStats> stats;
  for (int m = 1; m <= movies; ++m) {
    auto s = Stats(m, m * m, 0, 3.0);
    s.rating_variance = 0.5 + (m * 37 % 11) / 10.0;
    stats.push_back(s);
  }
  return CatalogSnapshot::FromStats(ParseDate("2023-05-01"), stats);
}

TEST(MovieSelection, SingleMovieIsRankDeficient) {
  const auto snap = SnapshotWithCounts(3);
  EXPECT_THROW(MovieSelectionRegression(Requests(1, 1), {}, snap), RankDeficientError);
}

TEST(MovieSelection, PlantedPopularityDependence) {
  const int kMovies = 60;
  const auto snap = SnapshotWithCounts(kMovies);
  std::mt19937_64 rng(4);
  std::vector<ElicitationRequest> req;
  std::vector<BeliefRecord> beliefs;
  for (MovieId m = 1; m <= kMovies; ++m) {
    const double p = 0.02 + 0.1 * Popularity(*snap.Find(m)) / Popularity(*snap.Find(kMovies));
    for (UserId u = 1; u <= 200; ++u) {
      req.push_back({100, u, m, SlotSource::kBroad, "b"});
      if (std::bernoulli_distribution(p)(rng)) beliefs.push_back(Unseen(u, m, 3, 3));
    }
  }
  const auto r = MovieSelectionRegression(req, beliefs, snap);
  EXPECT_GT(r.coefficients[0], 0.0);
  EXPECT_LT(r.p_values[0], 0.001);
}

TEST(MovieSelection, IndependentResponseIsNull) {
  const int kMovies = 80;
  const auto snap = SnapshotWithCounts(kMovies);
  std::mt19937_64 rng(6);
  std::vector<ElicitationRequest> req;
  std::vector<BeliefRecord> beliefs;
  for (MovieId m = 1; m <= kMovies; ++m) {
    for (UserId u = 1; u <= 200; ++u) {
      req.push_back({100, u, m, SlotSource::kBroad, "b"});
      if (std::bernoulli_distribution(0.08)(rng)) beliefs.push_back(Unseen(u, m, 3, 3));
    }
  }
  const auto r = MovieSelectionRegression(req, beliefs, snap);
  for (int j = 0; j < 2; ++j) EXPECT_LT(std::abs(r.coefficients[j]), 3 * r.standard_errors[j]);
}

TEST(UncertaintyPopularity, ConstantCertaintyGivesZeroSlope) {
  const auto snap = SnapshotWithCounts(20);
  std::vector<BeliefRecord> beliefs;
  for (MovieId m = 1; m <= 20; ++m) beliefs.push_back(Unseen(1, m, 3, 4));
  const auto r = UncertaintyPopularityRegression(beliefs, snap);
  EXPECT_NEAR(r.coefficients[0], 0.0, 1e-12);
  EXPECT_NEAR(r.intercept, 2.0, 1e-12);
}

TEST(UncertaintyPopularity, PlantedAndShuffled) {
  const int kMovies = 100;
  const auto snap = SnapshotWithCounts(kMovies);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  std::vector<BeliefRecord> beliefs;
  for (int i = 0; i < 5000; ++i) {
    const MovieId m = 1 + static_cast<MovieId>(rng() % kMovies);
    const double unc = 5.0 - 0.4 * Popularity(*snap.Find(m)) + z(rng);
    const int cert = std::clamp(static_cast<int>(std::lround(6 - unc)), 1, 5);
    beliefs.push_back(Unseen(1 + i, m, 3, cert));
  }
  const auto planted = UncertaintyPopularityRegression(beliefs, snap);
  EXPECT_LT(planted.coefficients[0], 0.0);

  // Permutation null: certainty shuffled across rows.
  std::vector<int> certs;
  for (const auto& b : beliefs) certs.push_back(*b.certainty);
  std::shuffle(certs.begin(), certs.end(), rng);
  for (std::size_t i = 0; i < beliefs.size(); ++i) beliefs[i].certainty = certs[i];
  const auto shuffled = UncertaintyPopularityRegression(beliefs, snap);
  EXPECT_LT(std::abs(shuffled.coefficients[0]), 3 * shuffled.standard_errors[0]);
}

TEST(WatchLpm, NoWatchesGivesZeroSlopes) {
  std::vector<BeliefRecord> beliefs;
  for (int i = 0; i < 30; ++i) beliefs.push_back(Unseen(i + 1, 1, 0.5 + 0.5 * (i % 10), 1 + i % 5));
  const auto r = WatchLpm(beliefs, {});
  EXPECT_NEAR(r.coefficients[0], 0.0, 1e-12);
  EXPECT_NEAR(r.coefficients[1], 0.0, 1e-12);
  EXPECT_EQ(r.names, (std::vector<std::string>{"predicted_rating", "uncertainty"}));
}

TEST(WatchLpm, ThresholdDesign) {
  std::vector<BeliefRecord> beliefs;
  std::vector<RatingEvent> ratings;
  for (int i = 0; i < 400; ++i) {
    const double predict = 0.5 + 0.5 * (i % 10);
    beliefs.push_back(Unseen(i + 1, 7, predict, 1 + (i / 10) % 5, 1000));
    if (predict >= 4) ratings.push_back({i + 1, 7, Rating::FromStars(4), 2000});
    // A rating before the response is not a watch.
    if (i % 10 == 0) ratings.push_back({i + 1, 8, Rating::FromStars(4), 999});
  }
  const auto r = WatchLpm(beliefs, ratings);
  EXPECT_GT(r.coefficients[0], 0.2);
  EXPECT_LT(r.p_values[0], 1e-6);
  EXPECT_NEAR(r.coefficients[1], 0.0, 1e-9);
}

TEST(WatchLpm, RatingBeforeResponseIgnored) {
  std::vector<BeliefRecord> beliefs;
  std::vector<RatingEvent> ratings;
  for (int i = 0; i < 50; ++i) {
    beliefs.push_back(Unseen(i + 1, 7, 0.5 + 0.5 * (i % 10), 1 + i % 5, 1000));
    ratings.push_back({i + 1, 7, Rating::FromStars(3), 1000});
  }
  const auto r = WatchLpm(beliefs, ratings);
  EXPECT_NEAR(r.intercept, 0.0, 1e-12);
}

TEST(Report, KeyValueIsStable) {
  AnalysisReport report;
  report.responses.total_requests = 10;
  report.responses.mean_response_ratio = 0.2;
  report.watch_lpm = Ols(Points({{0, 0}, {1, 1}, {2, 2.5}}), {"predicted_rating"});
  const auto kv = report.ToKeyValue();
  EXPECT_NE(kv.find("responses.mean_ratio="), std::string::npos);
  EXPECT_NE(kv.find("watch_lpm.predicted_rating.coef="), std::string::npos);
  EXPECT_EQ(kv, report.ToKeyValue());
  EXPECT_FALSE(report.ToText().empty());
}

}  // namespace
}  // namespace elicit
