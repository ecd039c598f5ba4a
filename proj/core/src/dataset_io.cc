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

#include "elicit/dataset_io.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "elicit/csv.h"

namespace elicit {
namespace {

std::string Normalize(std::string_view name) {
  std::string out;
  for (char c : name) {
    if (c == '_' || c == ' ' || c == '-') continue;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

struct Column {
  std::string_view canonical;
  std::vector<std::string_view> aliases;  // normalized forms
};

const std::vector<Column>& BeliefColumns() {
  static const std::vector<Column> cols = {
      {"timestamp", {"timestamp", "tstamp", "time"}},
      {"userId", {"userid", "user"}},
      {"movieId", {"movieid", "movie", "itemid"}},
      {"isSeen", {"isseen", "seen"}},
      {"userElicitRating", {"userelicitrating", "elicitrating", "elicitedrating"}},
      {"watchDate", {"watchdate"}},
      {"userPredictRating",
       {"userpredictrating", "predictrating", "predictedrating"}},
      {"userCertainty", {"usercertainty", "certainty"}},
  };
  return cols;
}

const std::vector<Column>& RatingColumns() {
  static const std::vector<Column> cols = {
      {"userId", {"userid", "user"}},
      {"movieId", {"movieid", "movie", "itemid"}},
      {"rating", {"rating"}},
      {"timestamp", {"timestamp", "tstamp", "time"}},
  };
  return cols;
}

const std::vector<Column>& RecLogColumns() {
  static const std::vector<Column> cols = {
      {"timestamp", {"timestamp", "tstamp", "time"}},
      {"userId", {"userid", "user"}},
      {"position", {"position", "pos", "rank"}},
      {"movieId", {"movieid", "movie", "itemid"}},
  };
  return cols;
}

const std::vector<Column>& ElicitLogColumns() {
  static const std::vector<Column> cols = {
      {"timestamp", {"timestamp", "tstamp", "time"}},
      {"userId", {"userid", "user"}},
      {"movieId", {"movieid", "movie", "itemid"}},
      {"source", {"source"}},
      {"batchId", {"batchid", "batch"}},
  };
  return cols;
}

const std::vector<Column>& ConsumptionColumns() {
  static const std::vector<Column> cols = {
      {"timestamp", {"timestamp", "tstamp", "time"}},
      {"userId", {"userid", "user"}},
      {"movieId", {"movieid", "movie", "itemid"}},
  };
  return cols;
}

class RowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::int64_t Int(std::string_view text, std::string_view column) {
  try {
    return ParseInt64(text);
  } catch (const std::invalid_argument&) {
    throw RowError(std::string(column) + ": not an integer '" +
                   std::string(text) + "'");
  }
}

std::int64_t PositiveId(std::string_view text, std::string_view column) {
  const auto v = Int(text, column);
  if (v <= 0) throw RowError(std::string(column) + " must be positive");
  return v;
}

UnixSeconds Timestamp(std::string_view text) {
  if (text.size() >= 19 && text[4] == '-' && (text[10] == ' ' || text[10] == 'T')) {
    try {
      const Date d = ParseDate(text.substr(0, 10));
      const auto hh = ParseInt64(text.substr(11, 2));
      const auto mm = ParseInt64(text.substr(14, 2));
      const auto ss = ParseInt64(text.substr(17, 2));
      return StartOfDay(d) + hh * 3600 + mm * 60 + ss;
    } catch (const std::invalid_argument& e) {
      throw RowError(std::string("timestamp: ") + e.what());
    }
  }
  return Int(text, "timestamp");
}

std::optional<Rating> OptionalRating(std::string_view text,
                                     std::string_view column) {
  if (text.empty()) return std::nullopt;
  auto r = Rating::TryParse(text);
  if (!r) {
    throw RowError(std::string(column) + ": off-grid rating '" +
                   std::string(text) + "'");
  }
  return r;
}

std::optional<Date> OptionalDate(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.size() > 10 && (text[10] == ' ' || text[10] == 'T')) {
    text = text.substr(0, 10);
  }
  try {
    return ParseDate(text);
  } catch (const std::invalid_argument& e) {
    throw RowError(std::string("watchDate: ") + e.what());
  }
}

// Maps each canonical column to its position in the file header.
std::optional<std::vector<std::size_t>> MapHeader(
    const std::vector<std::string>& header, const std::vector<Column>& columns,
    std::string* error) {
  std::vector<std::size_t> where(columns.size(), SIZE_MAX);
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string norm = Normalize(header[i]);
    bool matched = false;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto& aliases = columns[c].aliases;
      if (std::find(aliases.begin(), aliases.end(), norm) == aliases.end()) continue;
      if (where[c] != SIZE_MAX) {
        *error = "duplicate column '" + header[i] + "'";
        return std::nullopt;
      }
      where[c] = i;
      matched = true;
      break;
    }
    if (!matched) {
      *error = "unknown column '" + header[i] + "'";
      return std::nullopt;
    }
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (where[c] == SIZE_MAX) {
      *error = "missing column '" + std::string(columns[c].canonical) + "'";
      return std::nullopt;
    }
  }
  return where;
}

template <typename Record, typename RowFn>
ParsedTable<Record> ParseTable(std::istream& in, const std::string& name,
                               const std::vector<Column>& columns, RowFn row_fn) {
  ParsedTable<Record> out;
  CsvReader reader(in, name);
  std::vector<std::string> fields;
  std::optional<std::vector<std::size_t>> where;
  try {
    if (!reader.Next(fields)) {
      out.issues.push_back({name, 1, "missing header"});
      return out;
    }
    std::string error;
    where = MapHeader(fields, columns, &error);
    if (!where) {
      out.issues.push_back({name, reader.line(), error});
      return out;
    }
  } catch (const FormatError& e) {
    out.issues.push_back({name, e.line(), e.reason()});
    return out;
  }
  const std::size_t width = fields.size();
  std::vector<std::string> ordered(columns.size());
  while (true) {
    try {
      if (!reader.Next(fields)) break;
    } catch (const FormatError& e) {
      out.issues.push_back({name, e.line(), e.reason()});
      continue;
    }
    if (fields.size() != width) {
      out.issues.push_back({name, reader.line(),
                            "expected " + std::to_string(width) + " columns, got " +
                                std::to_string(fields.size())});
      continue;
    }
    for (std::size_t c = 0; c < columns.size(); ++c) ordered[c] = fields[(*where)[c]];
    try {
      out.records.push_back(row_fn(ordered));
      out.lines.push_back(reader.line());
    } catch (const RowError& e) {
      out.issues.push_back({name, reader.line(), e.what()});
    }
  }
  return out;
}

template <typename Record>
std::vector<Record> Strict(ParsedTable<Record> table) {
  if (!table.issues.empty()) {
    const RowIssue& first = table.issues.front();
    throw FormatError(first.file, first.line, first.message);
  }
  return std::move(table.records);
}

template <typename Fn>
auto WithFile(const std::filesystem::path& path, Fn fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return fn(in, path.string());
}

template <typename Record>
std::string FormatTable(std::string_view header,
                        const std::vector<Record>& records) {
  std::string out(header);
  out += '\n';
  for (const auto& r : records) {
    out += FormatRow(r);
    out += '\n';
  }
  return out;
}

void WriteText(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::optional<std::string> CheckBelief(const BeliefRecord& r) {
  if (r.user <= 0) return "userId must be positive";
  if (r.movie <= 0) return "movieId must be positive";
  if (r.certainty && (*r.certainty < 1 || *r.certainty > 5)) {
    return "userCertainty " + std::to_string(*r.certainty) + " outside 1..5";
  }
  switch (r.is_seen) {
    case -1:
      if (r.elicit_rating || r.watch_date || r.predict_rating || r.certainty) {
        return "isSeen=-1 requires all response fields empty";
      }
      return std::nullopt;
    case 0:
      if (!r.predict_rating) return "isSeen=0 requires userPredictRating";
      if (!r.certainty) return "isSeen=0 requires userCertainty";
      if (r.elicit_rating || r.watch_date) {
        return "isSeen=0 requires userElicitRating and watchDate empty";
      }
      return std::nullopt;
    case 1:
      if (!r.elicit_rating) return "isSeen=1 requires userElicitRating";
      if (r.predict_rating || r.certainty) {
        return "isSeen=1 requires userPredictRating and userCertainty empty";
      }
      return std::nullopt;
    default:
      return "isSeen must be -1, 0 or 1";
  }
}

std::string FormatRow(const BeliefRecord& r) {
  std::string out = std::to_string(r.timestamp);
  out += ',';
  out += std::to_string(r.user);
  out += ',';
  out += std::to_string(r.movie);
  out += ',';
  out += std::to_string(r.is_seen);
  out += ',';
  if (r.elicit_rating) out += r.elicit_rating->ToString();
  out += ',';
  if (r.watch_date) out += FormatDate(*r.watch_date);
  out += ',';
  if (r.predict_rating) out += r.predict_rating->ToString();
  out += ',';
  if (r.certainty) out += std::to_string(*r.certainty);
  return out;
}

std::string FormatRow(const RatingEvent& r) {
  return std::to_string(r.user) + ',' + std::to_string(r.movie) + ',' +
         r.rating.ToString() + ',' + std::to_string(r.timestamp);
}

std::string FormatRow(const RecommendationLogRecord& r) {
  return std::to_string(r.timestamp) + ',' + std::to_string(r.user) + ',' +
         std::to_string(r.position) + ',' + std::to_string(r.movie);
}

std::string FormatRow(const ElicitationRequest& r) {
  return std::to_string(r.timestamp) + ',' + std::to_string(r.user) + ',' +
         std::to_string(r.movie) + ',' + std::string(SourceName(r.source)) + ',' +
         CsvEscape(r.batch_id);
}

std::string FormatRow(const ConsumptionRecord& r) {
  return std::to_string(r.timestamp) + ',' + std::to_string(r.user) + ',' +
         std::to_string(r.movie);
}

ParsedTable<BeliefRecord> ParseBeliefs(std::istream& in, const std::string& name) {
  return ParseTable<BeliefRecord>(
      in, name, BeliefColumns(), [](const std::vector<std::string>& f) {
        BeliefRecord r;
        r.timestamp = Timestamp(f[0]);
        r.user = PositiveId(f[1], "userId");
        r.movie = PositiveId(f[2], "movieId");
        r.is_seen = static_cast<int>(Int(f[3], "isSeen"));
        r.elicit_rating = OptionalRating(f[4], "userElicitRating");
        r.watch_date = OptionalDate(f[5]);
        r.predict_rating = OptionalRating(f[6], "userPredictRating");
        if (!f[7].empty()) r.certainty = static_cast<int>(Int(f[7], "userCertainty"));
        if (auto violation = CheckBelief(r)) throw RowError(*violation);
        return r;
      });
}

ParsedTable<RatingEvent> ParseRatings(std::istream& in, const std::string& name) {
  return ParseTable<RatingEvent>(
      in, name, RatingColumns(), [](const std::vector<std::string>& f) {
        RatingEvent r;
        r.user = PositiveId(f[0], "userId");
        r.movie = PositiveId(f[1], "movieId");
        auto rating = Rating::TryParse(f[2]);
        if (!rating) throw RowError("rating: off-grid rating '" + f[2] + "'");
        r.rating = *rating;
        r.timestamp = Timestamp(f[3]);
        return r;
      });
}

ParsedTable<RecommendationLogRecord> ParseRecLog(std::istream& in,
                                                 const std::string& name) {
  return ParseTable<RecommendationLogRecord>(
      in, name, RecLogColumns(), [](const std::vector<std::string>& f) {
        RecommendationLogRecord r;
        r.timestamp = Timestamp(f[0]);
        r.user = PositiveId(f[1], "userId");
        r.position = static_cast<int>(Int(f[2], "position"));
        if (r.position < 1) throw RowError("position must be >= 1");
        r.movie = PositiveId(f[3], "movieId");
        return r;
      });
}

ParsedTable<ElicitationRequest> ParseElicitLog(std::istream& in,
                                               const std::string& name) {
  return ParseTable<ElicitationRequest>(
      in, name, ElicitLogColumns(), [](const std::vector<std::string>& f) {
        ElicitationRequest r;
        r.timestamp = Timestamp(f[0]);
        r.user = PositiveId(f[1], "userId");
        r.movie = PositiveId(f[2], "movieId");
        auto source = ParseSource(f[3]);
        if (!source) throw RowError("unknown source '" + f[3] + "'");
        r.source = *source;
        r.batch_id = f[4];
        return r;
      });
}

ParsedTable<ConsumptionRecord> ParseConsumption(std::istream& in,
                                                const std::string& name) {
  return ParseTable<ConsumptionRecord>(
      in, name, ConsumptionColumns(), [](const std::vector<std::string>& f) {
        ConsumptionRecord r;
        r.timestamp = Timestamp(f[0]);
        r.user = PositiveId(f[1], "userId");
        r.movie = PositiveId(f[2], "movieId");
        return r;
      });
}

std::vector<BeliefRecord> ReadBeliefs(const std::filesystem::path& path) {
  return WithFile(path, [](std::istream& in, const std::string& name) {
    return Strict(ParseBeliefs(in, name));
  });
}

std::vector<RatingEvent> ReadRatings(const std::filesystem::path& path) {
  return WithFile(path, [](std::istream& in, const std::string& name) {
    return Strict(ParseRatings(in, name));
  });
}

std::vector<RecommendationLogRecord> ReadRecLog(const std::filesystem::path& path) {
  return WithFile(path, [](std::istream& in, const std::string& name) {
    return Strict(ParseRecLog(in, name));
  });
}

std::vector<ElicitationRequest> ReadElicitLog(const std::filesystem::path& path) {
  return WithFile(path, [](std::istream& in, const std::string& name) {
    return Strict(ParseElicitLog(in, name));
  });
}

std::vector<ConsumptionRecord> ReadConsumption(const std::filesystem::path& path) {
  return WithFile(path, [](std::istream& in, const std::string& name) {
    return Strict(ParseConsumption(in, name));
  });
}

std::string FormatBeliefs(const std::vector<BeliefRecord>& records) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (auto violation = CheckBelief(records[i])) {
      throw std::invalid_argument("belief record " + std::to_string(i) + ": " +
                                  *violation);
    }
  }
  return FormatTable(kBeliefsHeader, records);
}
std::string FormatRatings(const std::vector<RatingEvent>& records) {
  return FormatTable(kRatingsHeader, records);
}
std::string FormatRecLog(const std::vector<RecommendationLogRecord>& records) {
  return FormatTable(kRecLogHeader, records);
}
std::string FormatElicitLog(const std::vector<ElicitationRequest>& records) {
  return FormatTable(kElicitLogHeader, records);
}
std::string FormatConsumption(const std::vector<ConsumptionRecord>& records) {
  return FormatTable(kConsumptionHeader, records);
}

void WriteBeliefs(const std::vector<BeliefRecord>& records,
                  const std::filesystem::path& path) {
  WriteText(FormatBeliefs(records), path);
}
void WriteRatings(const std::vector<RatingEvent>& records,
                  const std::filesystem::path& path) {
  WriteText(FormatRatings(records), path);
}
void WriteRecLog(const std::vector<RecommendationLogRecord>& records,
                 const std::filesystem::path& path) {
  WriteText(FormatRecLog(records), path);
}
void WriteElicitLog(const std::vector<ElicitationRequest>& records,
                    const std::filesystem::path& path) {
  WriteText(FormatElicitLog(records), path);
}
void WriteConsumption(const std::vector<ConsumptionRecord>& records,
                      const std::filesystem::path& path) {
  WriteText(FormatConsumption(records), path);
}

const TableSummary* ValidationReport::Table(std::string_view file) const {
  for (const auto& t : tables) {
    if (t.file == file) return &t;
  }
  return nullptr;
}

std::string ValidationReport::ToText() const {
  std::ostringstream out;
  out << "table                 present      rows     users    movies\n";
  for (const auto& t : tables) {
    char line[128];
    std::snprintf(line, sizeof(line), "%-20s %8s %9zu %9zu %9zu\n",
                  t.file.c_str(), t.present ? "yes" : "no", t.rows,
                  t.distinct_users, t.distinct_movies);
    out << line;
  }
  out << "belief responses: " << belief_responses << " from " << responding_users
      << " users over " << responded_movies << " movies\n";
  out << "violations: " << issues.size() << '\n';
  for (const auto& issue : issues) {
    out << "  " << issue.file << ':' << issue.line << ": " << issue.message << '\n';
  }
  return out.str();
}

namespace {

template <typename Record>
TableSummary Summarize(const std::string& file, const ParsedTable<Record>& t) {
  TableSummary s;
  s.file = file;
  s.present = true;
  s.rows = t.records.size();
  std::unordered_set<UserId> users;
  std::unordered_set<MovieId> movies;
  for (const auto& r : t.records) {
    users.insert(r.user);
    movies.insert(r.movie);
  }
  s.distinct_users = users.size();
  s.distinct_movies = movies.size();
  return s;
}

template <typename Record, typename ParseFn>
std::optional<ParsedTable<Record>> LoadTable(const std::filesystem::path& dir,
                                             std::string_view file, ParseFn parse,
                                             ValidationReport& report) {
  const auto path = dir / file;
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    report.tables.push_back({std::string(file), false, 0, 0, 0});
    return std::nullopt;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    report.tables.push_back({std::string(file), false, 0, 0, 0});
    report.issues.push_back({std::string(file), 0, "cannot open"});
    return std::nullopt;
  }
  ParsedTable<Record> table = parse(in, std::string(file));
  report.tables.push_back(Summarize(std::string(file), table));
  for (auto& issue : table.issues) report.issues.push_back(issue);
  return table;
}

}  // namespace

ValidationReport ValidateCorpus(const std::filesystem::path& dir) {
  ValidationReport report;
  try {
    auto beliefs = LoadTable<BeliefRecord>(dir, kBeliefsFile, ParseBeliefs, report);
    LoadTable<RatingEvent>(dir, kRatingsFile, ParseRatings, report);
    auto recs = LoadTable<RecommendationLogRecord>(dir, kRecLogFile, ParseRecLog,
                                                   report);
    auto requests =
        LoadTable<ElicitationRequest>(dir, kElicitLogFile, ParseElicitLog, report);
    LoadTable<ConsumptionRecord>(dir, kConsumptionFile, ParseConsumption, report);

    if (beliefs) {
      std::unordered_set<UserId> users;
      std::unordered_set<MovieId> movies;
      for (const auto& b : beliefs->records) {
        if (b.is_seen == -1) continue;
        ++report.belief_responses;
        users.insert(b.user);
        movies.insert(b.movie);
      }
      report.responding_users = users.size();
      report.responded_movies = movies.size();
    }

    if (recs) {
      std::set<std::tuple<UnixSeconds, UserId, int>> seen;
      for (std::size_t i = 0; i < recs->records.size(); ++i) {
        const auto& r = recs->records[i];
        const std::size_t line = recs->lines[i];
        if (!seen.insert({r.timestamp, r.user, r.position}).second) {
          report.issues.push_back(
              {std::string(kRecLogFile), line,
               "duplicate position " + std::to_string(r.position) +
                   " for user " + std::to_string(r.user) + " at " +
                   std::to_string(r.timestamp)});
        }
      }
    }

    if (beliefs && requests) {
      std::unordered_map<UserId, std::unordered_map<MovieId, UnixSeconds>> first;
      for (const auto& q : requests->records) {
        auto& slot = first[q.user];
        auto it = slot.find(q.movie);
        if (it == slot.end() || q.timestamp < it->second) slot[q.movie] = q.timestamp;
      }
      for (std::size_t i = 0; i < beliefs->records.size(); ++i) {
        const auto& b = beliefs->records[i];
        const std::size_t line = beliefs->lines[i];
        auto uit = first.find(b.user);
        bool ok = false;
        if (uit != first.end()) {
          auto mit = uit->second.find(b.movie);
          ok = mit != uit->second.end() && mit->second <= b.timestamp;
        }
        if (!ok) {
          report.issues.push_back({std::string(kBeliefsFile), line,
                                   "belief for user " + std::to_string(b.user) +
                                       " movie " + std::to_string(b.movie) +
                                       " has no preceding elicitation request"});
        }
      }
    }
  } catch (const std::exception& e) {
    report.issues.push_back({dir.string(), 0, std::string("validator error: ") + e.what()});
  }
  return report;
}

}  // namespace elicit
