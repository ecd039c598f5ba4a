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

#ifndef ELICIT_SERVICE_H_
#define ELICIT_SERVICE_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "elicit/calendar.h"
#include "elicit/dataset_io.h"
#include "elicit/rating.h"
#include "elicit/sampler.h"

namespace elicit {

struct ServiceOptions {
  // Holds movies.csv and ratings.csv (the catalog) and receives the logs,
  // journal.log and pools/YYYY-MM.csv.
  std::filesystem::path data_dir;
  double pool_y = 11.0;
  // Empty disables the admin endpoint.
  std::string admin_token;
  std::uint64_t seed = 0;
  // Defaults to the system clock.
  std::function<UnixSeconds()> clock;
};

// Carries the HTTP status the front end should answer with.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& message)
      : std::runtime_error(message), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

struct SlotView {
  MovieId movie = 0;
  std::string title;
  SlotSource source = SlotSource::kBroad;
  bool answered = false;
};

struct BatchView {
  // Empty when no batch could be drawn.
  std::string batch_id;
  UserId user = 0;
  UnixSeconds created_at = 0;
  std::vector<SlotView> slots;
  std::optional<std::string> shortfall_reason;
  // Request rows logged by this call.
  std::size_t new_requests = 0;
};

struct BeliefSubmission {
  std::string batch_id;
  MovieId movie = 0;
  int is_seen = 0;
  std::optional<Rating> elicit_rating;
  std::optional<Date> watch_date;
  std::optional<Rating> predict_rating;
  std::optional<int> certainty;
};

struct TopPick {
  int position = 0;
  MovieId movie = 0;
  std::string title;
  Rating predicted = Rating::FromHalves(Rating::kMaxHalves);
};

struct PoolSummary {
  MonthKey month{};
  std::size_t size = 0;
  // False when the month's pool already existed.
  bool rebuilt = false;
};

struct RecoveryStats {
  std::size_t journal_entries = 0;
  // Log rows missing or torn at startup and rewritten from the journal.
  std::size_t rows_restored = 0;
};

// The elicitation API over an append-only data directory. Every mutation is
// written to journal.log before the CSV logs are touched, and the
// constructor replays the journal, so a process killed at any point
// restarts into a consistent state. Thread-safe; operations are serialized.
class ElicitationService {
 public:
  explicit ElicitationService(ServiceOptions options);
  ~ElicitationService();
  ElicitationService(const ElicitationService&) = delete;
  ElicitationService& operator=(const ElicitationService&) = delete;

  // First touch issues and returns a bearer token for the user; later calls
  // must present it. Throws ServiceError(401) on a missing or wrong token.
  std::optional<std::string> Authenticate(UserId user,
                                          std::optional<std::string_view> bearer);

  // Returns the open batch, or draws one when the user has none or has
  // answered every slot. With `refresh`, answered slots are replaced.
  // Throws ServiceError(503) when no pool can be built.
  BatchView GetBatch(UserId user, bool refresh);

  // 404 unknown batch or slot, 409 slot already answered, 422 invalid
  // payload.
  BeliefRecord SubmitBelief(UserId user, const BeliefSubmission& submission);

  // The first `k` unrated movies by community average; logged to rec_log.
  std::vector<TopPick> TopPicks(UserId user, std::size_t k);

  // 403 unless `admin_token` matches. Builds the current month's pool once.
  PoolSummary RebuildPool(std::string_view admin_token);

  const RecoveryStats& recovery() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace elicit

#endif  // ELICIT_SERVICE_H_
