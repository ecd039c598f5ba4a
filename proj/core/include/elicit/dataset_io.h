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

#ifndef ELICIT_DATASET_IO_H_
#define ELICIT_DATASET_IO_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "elicit/calendar.h"
#include "elicit/catalog.h"
#include "elicit/rating.h"
#include "elicit/sampler.h"

namespace elicit {

// One elicitation outcome. isSeen is -1 for no response, 0 for "not seen"
// (predicted rating and certainty present), 1 for "seen" (rating present,
// watch date optional).
struct BeliefRecord {
  UnixSeconds timestamp = 0;
  UserId user = 0;
  MovieId movie = 0;
  int is_seen = -1;
  std::optional<Rating> elicit_rating;
  std::optional<Date> watch_date;
  std::optional<Rating> predict_rating;
  std::optional<int> certainty;

  friend bool operator==(const BeliefRecord&, const BeliefRecord&) = default;
};

// Returns a description of the first invariant the record violates.
std::optional<std::string> CheckBelief(const BeliefRecord& record);

struct RecommendationLogRecord {
  UnixSeconds timestamp = 0;
  UserId user = 0;
  int position = 1;
  MovieId movie = 0;

  friend bool operator==(const RecommendationLogRecord&,
                         const RecommendationLogRecord&) = default;
};

// One presented batch slot.
struct ElicitationRequest {
  UnixSeconds timestamp = 0;
  UserId user = 0;
  MovieId movie = 0;
  SlotSource source = SlotSource::kBroad;
  std::string batch_id;

  friend bool operator==(const ElicitationRequest&,
                         const ElicitationRequest&) = default;
};

struct ConsumptionRecord {
  UnixSeconds timestamp = 0;
  UserId user = 0;
  MovieId movie = 0;

  friend bool operator==(const ConsumptionRecord&,
                         const ConsumptionRecord&) = default;
};

inline constexpr std::string_view kBeliefsFile = "beliefs.csv";
inline constexpr std::string_view kRatingsFile = "ratings.csv";
inline constexpr std::string_view kRecLogFile = "rec_log.csv";
inline constexpr std::string_view kElicitLogFile = "elicit_log.csv";
inline constexpr std::string_view kConsumptionFile = "consumption.csv";
inline constexpr std::string_view kMoviesFile = "movies.csv";

inline constexpr std::string_view kBeliefsHeader =
    "timestamp,userId,movieId,isSeen,userElicitRating,watchDate,"
    "userPredictRating,userCertainty";
inline constexpr std::string_view kRatingsHeader = "userId,movieId,rating,timestamp";
inline constexpr std::string_view kRecLogHeader = "timestamp,userId,position,movieId";
inline constexpr std::string_view kElicitLogHeader =
    "timestamp,userId,movieId,source,batchId";
inline constexpr std::string_view kConsumptionHeader = "timestamp,userId,movieId";

// Canonical rows, without the trailing LF.
std::string FormatRow(const BeliefRecord& r);
std::string FormatRow(const RatingEvent& r);
std::string FormatRow(const RecommendationLogRecord& r);
std::string FormatRow(const ElicitationRequest& r);
std::string FormatRow(const ConsumptionRecord& r);

struct RowIssue {
  std::string file;
  std::size_t line = 0;
  std::string message;
};

// Records parsed from one table plus every row-level problem. Invalid rows
// are skipped, never fatal.
template <typename Record>
struct ParsedTable {
  std::vector<Record> records;
  // 1-based file line of each record.
  std::vector<std::size_t> lines;
  std::vector<RowIssue> issues;
};

// Lenient parsers: columns may appear in any order and common synonyms of the
// canonical names are accepted (userId/user_id, isSeen/is_seen, ...). An
// unrecognized or missing column is reported on line 1.
ParsedTable<BeliefRecord> ParseBeliefs(std::istream& in, const std::string& name);
ParsedTable<RatingEvent> ParseRatings(std::istream& in, const std::string& name);
ParsedTable<RecommendationLogRecord> ParseRecLog(std::istream& in,
                                                 const std::string& name);
ParsedTable<ElicitationRequest> ParseElicitLog(std::istream& in,
                                               const std::string& name);
ParsedTable<ConsumptionRecord> ParseConsumption(std::istream& in,
                                                const std::string& name);

// Strict readers: throw FormatError at the first issue.
std::vector<BeliefRecord> ReadBeliefs(const std::filesystem::path& path);
std::vector<RatingEvent> ReadRatings(const std::filesystem::path& path);
std::vector<RecommendationLogRecord> ReadRecLog(const std::filesystem::path& path);
std::vector<ElicitationRequest> ReadElicitLog(const std::filesystem::path& path);
std::vector<ConsumptionRecord> ReadConsumption(const std::filesystem::path& path);

// Canonical writers: fixed column order, empty fields for absent optionals,
// one decimal for ratings, LF endings. Writing what a reader returned for a
// canonical file reproduces it byte for byte. Belief records are checked
// first; an invalid record throws std::invalid_argument.
void WriteBeliefs(const std::vector<BeliefRecord>& records,
                  const std::filesystem::path& path);
void WriteRatings(const std::vector<RatingEvent>& records,
                  const std::filesystem::path& path);
void WriteRecLog(const std::vector<RecommendationLogRecord>& records,
                 const std::filesystem::path& path);
void WriteElicitLog(const std::vector<ElicitationRequest>& records,
                    const std::filesystem::path& path);
void WriteConsumption(const std::vector<ConsumptionRecord>& records,
                      const std::filesystem::path& path);

std::string FormatBeliefs(const std::vector<BeliefRecord>& records);
std::string FormatRatings(const std::vector<RatingEvent>& records);
std::string FormatRecLog(const std::vector<RecommendationLogRecord>& records);
std::string FormatElicitLog(const std::vector<ElicitationRequest>& records);
std::string FormatConsumption(const std::vector<ConsumptionRecord>& records);

struct TableSummary {
  std::string file;
  bool present = false;
  std::size_t rows = 0;
  std::size_t distinct_users = 0;
  std::size_t distinct_movies = 0;
};

struct ValidationReport {
  std::vector<TableSummary> tables;
  std::vector<RowIssue> issues;
  // Belief rows with isSeen != -1.
  std::size_t belief_responses = 0;
  // Distinct users/movies over belief responses.
  std::size_t responding_users = 0;
  std::size_t responded_movies = 0;

  bool ok() const { return issues.empty(); }
  const TableSummary* Table(std::string_view file) const;
  std::string ToText() const;
};

// Checks every table present in `dir`: row validity, positions unique per
// (user, timestamp) in the recommendation log, and, when the request log is
// present, that every belief row follows a request for the same user and
// movie. Never throws for file contents.
ValidationReport ValidateCorpus(const std::filesystem::path& dir);

}  // namespace elicit

#endif  // ELICIT_DATASET_IO_H_
