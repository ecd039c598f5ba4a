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

#ifndef ELICIT_TESTS_AUDIT_H_
#define ELICIT_TESTS_AUDIT_H_

// Replays request logs against the presentation rules.

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "elicit/dataset_io.h"

namespace elicit::audit {

struct Violation {
  ElicitationRequest request;
  std::string rule;
};

// A request breaks the exclusion rule when the pair already had two
// presentations in the 90 days up to and including its timestamp, and the
// rated rule when the user rated the movie before it. Same-second
// order is not recoverable from the logs, so ties pass.
inline std::vector<Violation> ReplayPresentations(
    const std::vector<ElicitationRequest>& requests,
    const std::vector<RatingEvent>& ratings) {
  std::map<std::pair<UserId, MovieId>, UnixSeconds> first_rating;
  for (const auto& r : ratings) {
    auto [it, inserted] = first_rating.try_emplace({r.user, r.movie}, r.timestamp);
    if (!inserted) it->second = std::min(it->second, r.timestamp);
  }
  std::vector<ElicitationRequest> sorted = requests;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  std::map<std::pair<UserId, MovieId>, std::vector<UnixSeconds>> shown;
  std::vector<Violation> out;
  for (const auto& q : sorted) {
    auto& past = shown[{q.user, q.movie}];
    int recent = 0;
    for (UnixSeconds t : past) recent += t >= q.timestamp - 90 * 86400;
    if (recent >= 2) out.push_back({q, "exclusion"});
    auto it = first_rating.find({q.user, q.movie});
    if (it != first_rating.end() && it->second < q.timestamp) out.push_back({q, "rated"});
    past.push_back(q.timestamp);
  }
  return out;
}

}  // namespace elicit::audit

#endif  // ELICIT_TESTS_AUDIT_H_
