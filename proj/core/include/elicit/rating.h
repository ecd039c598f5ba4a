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

#ifndef ELICIT_RATING_H_
#define ELICIT_RATING_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace elicit {

using UserId = std::int64_t;
using MovieId = std::int64_t;

// A star rating on the half-point grid {0.5, 1.0, ..., 5.0}, stored as a
// count of half stars in [1, 10].
class Rating {
 public:
  static constexpr int kMinHalves = 1;
  static constexpr int kMaxHalves = 10;

  // Throws std::invalid_argument when `halves` is outside [1, 10].
  static Rating FromHalves(int halves);
  // Accepts only exact grid values; throws std::invalid_argument for
  // off-grid input such as 0.3.
  static Rating FromStars(double stars);
  // Clamps to [0.5, 5.0] and rounds to the nearest half point (ties away
  // from zero).
  static Rating Nearest(double stars);
  static std::optional<Rating> TryParse(std::string_view text);

  int halves() const { return halves_; }
  double stars() const { return halves_ / 2.0; }
  // Canonical text form with one decimal, e.g. "3.5".
  std::string ToString() const;

  friend auto operator<=>(const Rating&, const Rating&) = default;

 private:
  explicit Rating(int halves) : halves_(halves) {}
  int halves_;
};

}  // namespace elicit

#endif  // ELICIT_RATING_H_
