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

#include "elicit/service.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "elicit/catalog.h"
#include "elicit/journal.h"
#include "elicit/pool.h"

namespace elicit {
namespace {

using nlohmann::json;

constexpr std::string_view kJournalFile = "journal.log";

UnixSeconds SystemNow() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string NewToken() {
  std::random_device rd;
  char buf[33];
  std::snprintf(buf, sizeof(buf), "%08x%08x%08x%08x", rd(), rd(), rd(), rd());
  return buf;
}

struct Session {
  ElicitationBatch batch;
  std::vector<bool> answered;
  std::uint64_t counter = 0;

  bool open() const {
    return !batch.slots.empty() &&
           std::find(answered.begin(), answered.end(), false) != answered.end();
  }
};

struct PendingRow {
  std::string file;
  std::string text;
};

}  // namespace

struct ElicitationService::Impl {
  ServiceOptions options;
  std::mutex mu;
  RecoveryStats stats;

  AppendFile journal;
  std::map<std::string, AppendFile, std::less<>> logs;

  Catalog catalog = Catalog::Build({}, {});
  std::set<std::pair<UserId, MovieId>> rated_since_start;
  std::map<UserId, std::string> tokens;
  std::map<UserId, Session> sessions;
  ElicitationHistory history;
  // Last rec_log timestamp per user; slates get distinct timestamps so
  // positions stay unique per (user, timestamp).
  std::map<UserId, UnixSeconds> last_slate;

  std::shared_ptr<const ElicitationPool> pool;
  // Catalog movies ordered by community average, for the month of `pool`.
  std::vector<MovieId> ranking;
  std::unique_ptr<ItemMeanPredictor> predictor;
  std::optional<MonthKey> ranking_month;

  UnixSeconds Now() const { return options.clock ? options.clock() : SystemNow(); }

  bool HasRated(UserId user, MovieId movie, UnixSeconds at) const {
    return rated_since_start.contains({user, movie}) ||
           catalog.HasRated(user, movie, at);
  }

  std::string Title(MovieId movie) const {
    const Movie* m = catalog.FindMovie(movie);
    return m ? m->title : std::string();
  }

  // Journals `entry` with the offsets its rows will occupy, then appends them.
  void Commit(json entry, const std::vector<PendingRow>& rows) {
    std::map<std::string, std::uint64_t, std::less<>> next;
    json jrows = json::array();
    for (const auto& r : rows) {
      auto it = next.find(r.file);
      if (it == next.end()) it = next.emplace(r.file, logs.at(r.file).size()).first;
      jrows.push_back({r.file, it->second, r.text});
      it->second += r.text.size();
    }
    entry["rows"] = std::move(jrows);
    journal.Append(entry.dump() + "\n");
    for (const auto& r : rows) logs.at(r.file).Append(r.text);
  }

  void Recover() {
    namespace fs = std::filesystem;
    const auto& dir = options.data_dir;
    fs::create_directories(dir / "pools");
    logs.emplace(std::string(kRatingsFile),
                 AppendFile(dir / kRatingsFile, kRatingsHeader));
    logs.emplace(std::string(kElicitLogFile),
                 AppendFile(dir / kElicitLogFile, kElicitLogHeader));
    logs.emplace(std::string(kBeliefsFile), AppendFile(dir / kBeliefsFile, kBeliefsHeader));
    logs.emplace(std::string(kRecLogFile), AppendFile(dir / kRecLogFile, kRecLogHeader));
    journal = AppendFile(dir / kJournalFile, "");

    std::vector<json> entries;
    for (const auto& line : ReadCompleteLines(dir / kJournalFile)) {
      entries.push_back(json::parse(line));
    }
    stats.journal_entries = entries.size();

    // Redo rows that never reached their log, in journal order.
    for (const auto& e : entries) {
      for (const auto& r : e.at("rows")) {
        AppendFile& f = logs.at(r.at(0).get<std::string>());
        const auto offset = r.at(1).get<std::uint64_t>();
        const auto text = r.at(2).get<std::string>();
        if (f.size() >= offset + text.size()) continue;
        if (f.size() < offset) {
          throw std::runtime_error("log " + f.path().string() +
                                   " is shorter than its journal");
        }
        f.Truncate(offset);
        f.Append(text);
        ++stats.rows_restored;
      }
    }

    if (fs::exists(dir / kMoviesFile)) {
      catalog = Catalog::Ingest(dir / kMoviesFile, dir / kRatingsFile);
    }

    for (const auto& e : entries) {
      const std::string op = e.at("op");
      if (op == "token") {
        tokens[e.at("user").get<UserId>()] = e.at("token").get<std::string>();
      } else if (op == "batch") {
        const UserId user = e.at("user");
        Session& s = sessions[user];
        ElicitationBatch b;
        b.id = e.at("id");
        b.user = user;
        b.created_at = e.at("ts");
        for (const auto& slot : e.at("slots")) {
          b.slots.push_back(
              {slot.at(0).get<MovieId>(), *ParseSource(slot.at(1).get<std::string>())});
        }
        if (e.contains("shortfall")) b.shortfall_reason = e.at("shortfall");
        for (std::size_t i : e.at("new").get<std::vector<std::size_t>>()) {
          history.RecordPresentation(user, b.slots.at(i).movie, b.created_at);
        }
        s.batch = std::move(b);
        s.answered.assign(s.batch.slots.size(), false);
        s.counter = e.at("counter").get<std::uint64_t>() + 1;
      } else if (op == "answer") {
        const UserId user = e.at("user");
        const MovieId movie = e.at("movie");
        Session& s = sessions.at(user);
        for (std::size_t i = 0; i < s.batch.slots.size(); ++i) {
          if (s.batch.slots[i].movie == movie) s.answered[i] = true;
        }
        history.RecordResponse(user, movie, e.at("ts").get<UnixSeconds>());
        if (e.at("rated").get<bool>()) rated_since_start.insert({user, movie});
      } else if (op == "toppicks") {
        last_slate[e.at("user").get<UserId>()] = e.at("ts").get<UnixSeconds>();
      }
    }

    // The pool for the current month, if one was saved.
    const MonthKey month = MonthOf(DateOf(Now()));
    const auto path = dir / "pools" / (FormatMonth(month) + ".csv");
    if (fs::exists(path)) {
      pool = std::make_shared<const ElicitationPool>(ReadPoolCsv(path));
    }
  }

  // Makes `pool` the current month's pool, building it when needed.
  bool EnsurePool(UnixSeconds now) {
    const Date today = DateOf(now);
    const MonthKey month = MonthOf(today);
    bool built = false;
    if (!pool || pool->month() != month) {
      const auto path = options.data_dir / "pools" / (FormatMonth(month) + ".csv");
      if (std::filesystem::exists(path)) {
        pool = std::make_shared<const ElicitationPool>(ReadPoolCsv(path));
      } else {
        try {
          const auto snapshot = CatalogSnapshot::Compute(catalog, today);
          PoolConfig config;
          config.y = options.pool_y;
          config.rng_seed = options.seed;
          auto fresh = BuildPool(snapshot, ComputeGenreShares(snapshot), config);
          std::string csv_path = path.string();
          WritePoolCsv(fresh, csv_path + ".tmp");
          std::filesystem::rename(csv_path + ".tmp", path);
          pool = std::make_shared<const ElicitationPool>(std::move(fresh));
          Commit({{"op", "pool"}, {"month", FormatMonth(month)}}, {});
          built = true;
        } catch (const std::invalid_argument& e) {
          throw ServiceError(503, std::string("elicitation pool unavailable: ") +
                                      e.what());
        }
      }
    }
    if (ranking_month != month) {
      const auto snapshot = CatalogSnapshot::Compute(catalog, today);
      predictor = std::make_unique<ItemMeanPredictor>(snapshot);
      std::vector<MovieId> all;
      for (const auto& m : snapshot.entries()) all.push_back(m.movie);
      ranking = RankTopPicks(0, all, *predictor, all.size());
      ranking_month = month;
    }
    return built;
  }

  std::vector<MovieId> TopPicksFor(UserId user, UnixSeconds now, std::size_t depth) {
    std::vector<MovieId> out;
    for (MovieId m : ranking) {
      if (out.size() >= depth) break;
      if (!HasRated(user, m, now)) out.push_back(m);
    }
    return out;
  }

  BatchView View(const Session& s, std::size_t new_requests) const {
    BatchView v;
    v.batch_id = s.batch.id;
    v.user = s.batch.user;
    v.created_at = s.batch.created_at;
    v.shortfall_reason = s.batch.shortfall_reason;
    v.new_requests = new_requests;
    for (std::size_t i = 0; i < s.batch.slots.size(); ++i) {
      v.slots.push_back({s.batch.slots[i].movie, Title(s.batch.slots[i].movie),
                         s.batch.slots[i].source, s.answered[i]});
    }
    return v;
  }
};

ElicitationService::ElicitationService(ServiceOptions options)
    : impl_(std::make_unique<Impl>()) {
  if (!(options.pool_y > 0)) throw std::invalid_argument("pool_y must be positive");
  impl_->options = std::move(options);
  impl_->Recover();
}

ElicitationService::~ElicitationService() = default;

const RecoveryStats& ElicitationService::recovery() const { return impl_->stats; }

std::optional<std::string> ElicitationService::Authenticate(
    UserId user, std::optional<std::string_view> bearer) {
  if (user <= 0) throw ServiceError(404, "unknown user");
  std::lock_guard lock(impl_->mu);
  auto it = impl_->tokens.find(user);
  if (it == impl_->tokens.end()) {
    std::string token = NewToken();
    impl_->Commit({{"op", "token"}, {"user", user}, {"token", token}}, {});
    impl_->tokens[user] = token;
    return token;
  }
  if (!bearer || *bearer != it->second) {
    throw ServiceError(401, "missing or invalid bearer token");
  }
  return std::nullopt;
}

BatchView ElicitationService::GetBatch(UserId user, bool refresh) {
  std::lock_guard lock(impl_->mu);
  Impl& im = *impl_;
  const UnixSeconds now = im.Now();
  im.EnsurePool(now);
  Session& s = im.sessions[user];
  if (s.open() && !refresh) return im.View(s, 0);

  const auto top = im.TopPicksFor(user, now, kTopPicksDepth);
  SamplerInputs inputs;
  inputs.pool = im.pool.get();
  inputs.has_rated = [&](MovieId m) { return im.HasRated(user, m, now); };
  inputs.is_recent = [&](MovieId m) {
    const Movie* movie = im.catalog.FindMovie(m);
    return movie != nullptr && IsRecentRelease(movie->release_date, DateOf(now));
  };
  inputs.history = &im.history;
  inputs.predicted = im.predictor.get();
  inputs.top_picks = top;

  std::seed_seq seq{static_cast<std::uint32_t>(im.options.seed),
                    static_cast<std::uint32_t>(im.options.seed >> 32),
                    static_cast<std::uint32_t>(user),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(user) >> 32),
                    static_cast<std::uint32_t>(s.counter)};
  std::mt19937_64 rng(seq);
  const std::string id = "b" + std::to_string(user) + "-" + std::to_string(s.counter);

  ElicitationBatch next;
  std::vector<std::size_t> fresh;
  if (s.open() && refresh) {
    std::unordered_set<MovieId> answered;
    for (std::size_t i = 0; i < s.batch.slots.size(); ++i) {
      if (s.answered[i]) answered.insert(s.batch.slots[i].movie);
    }
    if (answered.empty()) return im.View(s, 0);
    next = RefreshBatch(s.batch, answered, now, id, inputs, rng);
    for (std::size_t i = 0; i < next.slots.size(); ++i) {
      if (i >= s.batch.slots.size() || next.slots[i].movie != s.batch.slots[i].movie) {
        fresh.push_back(i);
      }
    }
  } else {
    next = SampleBatch(user, now, id, inputs, rng);
    for (std::size_t i = 0; i < next.slots.size(); ++i) fresh.push_back(i);
  }
  if (next.slots.empty()) {
    BatchView v;
    v.user = user;
    v.created_at = now;
    v.shortfall_reason = next.shortfall_reason;
    return v;
  }

  json slots = json::array();
  for (const auto& slot : next.slots) slots.push_back({slot.movie, SourceName(slot.source)});
  json entry = {{"op", "batch"}, {"user", user},   {"counter", s.counter},
                {"id", next.id}, {"ts", now},      {"slots", slots},
                {"new", fresh}};
  if (next.shortfall_reason) entry["shortfall"] = *next.shortfall_reason;
  std::vector<PendingRow> rows;
  for (std::size_t i : fresh) {
    const auto& slot = next.slots[i];
    rows.push_back({std::string(kElicitLogFile),
                    FormatRow(ElicitationRequest{now, user, slot.movie, slot.source,
                                                 next.id}) +
                        "\n"});
  }
  im.Commit(std::move(entry), rows);

  for (std::size_t i : fresh) im.history.RecordPresentation(user, next.slots[i].movie, now);
  std::vector<bool> answered(next.slots.size(), false);
  s.batch = std::move(next);
  s.answered = std::move(answered);
  ++s.counter;
  return im.View(s, fresh.size());
}

BeliefRecord ElicitationService::SubmitBelief(UserId user,
                                              const BeliefSubmission& sub) {
  std::lock_guard lock(impl_->mu);
  Impl& im = *impl_;
  auto sit = im.sessions.find(user);
  if (sit == im.sessions.end() || sit->second.batch.id != sub.batch_id ||
      sub.batch_id.empty()) {
    throw ServiceError(404, "unknown batch " + sub.batch_id);
  }
  Session& s = sit->second;
  std::size_t slot = s.batch.slots.size();
  for (std::size_t i = 0; i < s.batch.slots.size(); ++i) {
    if (s.batch.slots[i].movie == sub.movie) slot = i;
  }
  if (slot == s.batch.slots.size()) {
    throw ServiceError(404, "movie " + std::to_string(sub.movie) + " is not in batch " +
                                sub.batch_id);
  }
  if (s.answered[slot]) throw ServiceError(409, "slot already answered");

  const UnixSeconds now = im.Now();
  BeliefRecord record;
  record.timestamp = now;
  record.user = user;
  record.movie = sub.movie;
  record.is_seen = sub.is_seen;
  record.elicit_rating = sub.elicit_rating;
  record.watch_date = sub.watch_date;
  record.predict_rating = sub.predict_rating;
  record.certainty = sub.certainty;
  if (sub.is_seen != 0 && sub.is_seen != 1) {
    throw ServiceError(422, "isSeen must be 0 or 1");
  }
  if (auto violation = CheckBelief(record)) throw ServiceError(422, *violation);

  std::vector<PendingRow> rows = {
      {std::string(kBeliefsFile), FormatRow(record) + "\n"}};
  const bool rated = record.is_seen == 1;
  if (rated) {
    rows.push_back({std::string(kRatingsFile),
                    FormatRow(RatingEvent{user, sub.movie, *record.elicit_rating, now}) +
                        "\n"});
  }
  im.Commit({{"op", "answer"},
             {"user", user},
             {"batch", sub.batch_id},
             {"movie", sub.movie},
             {"ts", now},
             {"rated", rated}},
            rows);
  s.answered[slot] = true;
  im.history.RecordResponse(user, sub.movie, now);
  if (rated) im.rated_since_start.insert({user, sub.movie});
  return record;
}

std::vector<TopPick> ElicitationService::TopPicks(UserId user, std::size_t k) {
  std::lock_guard lock(impl_->mu);
  Impl& im = *impl_;
  UnixSeconds now = im.Now();
  im.EnsurePool(now);
  if (auto it = im.last_slate.find(user); it != im.last_slate.end()) {
    now = std::max(now, it->second + 1);
  }
  std::vector<TopPick> out;
  std::vector<PendingRow> rows;
  int position = 0;
  for (MovieId m : im.TopPicksFor(user, now, k)) {
    ++position;
    out.push_back({position, m, im.Title(m), *im.predictor->Predict(user, m)});
    rows.push_back({std::string(kRecLogFile),
                    FormatRow(RecommendationLogRecord{now, user, position, m}) + "\n"});
  }
  if (!rows.empty()) {
    im.Commit({{"op", "toppicks"}, {"user", user}, {"ts", now}}, rows);
    im.last_slate[user] = now;
  }
  return out;
}

PoolSummary ElicitationService::RebuildPool(std::string_view admin_token) {
  if (impl_->options.admin_token.empty() || admin_token != impl_->options.admin_token) {
    throw ServiceError(403, "admin token required");
  }
  std::lock_guard lock(impl_->mu);
  const bool built = impl_->EnsurePool(impl_->Now());
  return {impl_->pool->month(), impl_->pool->size(), built};
}

}  // namespace elicit
