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

#ifndef ELICIT_ANALYTICS_H_
#define ELICIT_ANALYTICS_H_

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "elicit/catalog.h"
#include "elicit/dataset_io.h"

namespace elicit {

struct DesignRow {
  std::vector<double> features;
  double target = 0.0;
};

struct RegressionResult {
  std::vector<std::string> names;          // one per feature
  std::vector<double> coefficients;        // one per feature
  std::vector<double> standard_errors;     // one per feature
  std::vector<double> p_values;            // two-sided, Student t
  double intercept = 0.0;
  double intercept_standard_error = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

// Raised for a design that is not of full column rank once the intercept is
// added; names the offending columns.
class RankDeficientError : public std::invalid_argument {
 public:
  explicit RankDeficientError(std::vector<std::string> columns);
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::vector<std::string> columns_;
};

// Least squares with an intercept, solved through the normal equations.
// Standard errors use the homoskedastic variance estimate SSR / (n - p).
// R^2 is 0 for a constant target. Feature names default to x1, x2, ...
RegressionResult Ols(std::span<const DesignRow> rows,
                     std::vector<std::string> names = {});

struct ResponseStats {
  std::size_t total_requests = 0;
  std::size_t total_responses = 0;
  std::size_t requested_users = 0;
  std::size_t requested_movies = 0;
  std::size_t responding_users = 0;
  std::size_t responded_movies = 0;
  std::size_t never_responders = 0;
  // Per-user responses / requests over users with at least one response.
  double mean_response_ratio = 0.0;
  double median_response_ratio = 0.0;
  double mean_responses_per_responder = 0.0;
};

// A response is a belief row with isSeen != -1.
ResponseStats ComputeResponseStats(std::span<const ElicitationRequest> requests,
                                   std::span<const BeliefRecord> beliefs);

// ln(1 + ratings), the popularity measure used by the regressions.
double Popularity(const MovieStats& stats);

// Per-movie response rate on popularity and community rating variance.
RegressionResult MovieSelectionRegression(
    std::span<const ElicitationRequest> requests,
    std::span<const BeliefRecord> beliefs, const CatalogSnapshot& snapshot);

// Uncertainty (6 - userCertainty) on popularity over not-seen responses.
RegressionResult UncertaintyPopularityRegression(
    std::span<const BeliefRecord> beliefs, const CatalogSnapshot& snapshot);

// Linear probability model over not-seen responses: 1 if the user rated the
// movie after the response, on userPredictRating and uncertainty
// (6 - userCertainty).
RegressionResult WatchLpm(std::span<const BeliefRecord> beliefs,
                          std::span<const RatingEvent> ratings);

struct OverlapMetrics {
  // Mean over users with requests of |requested & ever recommended| /
  // |requested|.
  double request_overlap = 0.0;
  // Same over users with responses, for the responded movies.
  double response_overlap = 0.0;
  std::size_t users_with_requests = 0;
  std::size_t users_with_responses = 0;
};

OverlapMetrics ComputeOverlap(std::span<const ElicitationRequest> requests,
                              std::span<const BeliefRecord> beliefs,
                              std::span<const RecommendationLogRecord> recs);

struct AnalysisReport {
  ResponseStats responses;
  OverlapMetrics overlap;
  std::optional<RegressionResult> movie_selection;
  std::optional<RegressionResult> uncertainty_popularity;
  std::optional<RegressionResult> watch_lpm;
  // Why a regression is missing, keyed like the kv file.
  std::vector<std::pair<std::string, std::string>> notes;

  std::string ToText() const;
  std::string ToKeyValue() const;
};

// Reads the tables in `dir` (movies.csv is needed for the snapshot-based
// regressions) and computes every statistic. The snapshot is taken as of
// the date of the latest logged event.
AnalysisReport AnalyzeCorpus(const std::filesystem::path& dir);

}  // namespace elicit

#endif  // ELICIT_ANALYTICS_H_
