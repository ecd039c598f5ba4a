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

#include "elicit/rating.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace elicit {

Rating Rating::FromHalves(int halves) {
  if (halves < kMinHalves || halves > kMaxHalves) {
    throw std::invalid_argument("off-grid rating: " +
                                std::to_string(halves / 2.0));
  }
  return Rating(halves);
}

Rating Rating::FromStars(double stars) {
  const double doubled = stars * 2.0;
  const double rounded = std::round(doubled);
  if (!std::isfinite(stars) || std::abs(doubled - rounded) > 1e-9 ||
      rounded < kMinHalves || rounded > kMaxHalves) {
    throw std::invalid_argument("off-grid rating: " + std::to_string(stars));
  }
  return Rating(static_cast<int>(rounded));
}

Rating Rating::Nearest(double stars) {
  if (!std::isfinite(stars)) {
    throw std::invalid_argument("non-finite rating");
  }
  const double clamped = std::clamp(stars, 0.5, 5.0);
  return Rating(static_cast<int>(std::lround(clamped * 2.0)));
}

std::optional<Rating> Rating::TryParse(std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) return std::nullopt;
  const double doubled = value * 2.0;
  const double rounded = std::round(doubled);
  if (std::abs(doubled - rounded) > 1e-9 || rounded < kMinHalves ||
      rounded > kMaxHalves) {
    return std::nullopt;
  }
  return Rating(static_cast<int>(rounded));
}

std::string Rating::ToString() const {
  std::string out = std::to_string(halves_ / 2);
  out += (halves_ % 2 == 0) ? ".0" : ".5";
  return out;
}

}  // namespace elicit
