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

#ifndef ELICIT_CALENDAR_H_
#define ELICIT_CALENDAR_H_

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace elicit {

using Date = std::chrono::year_month_day;

// Seconds since the Unix epoch, UTC.
using UnixSeconds = std::int64_t;

inline constexpr UnixSeconds kSecondsPerDay = 86400;

// Calendar month used to key monthly pools.
struct MonthKey {
  int year = 0;
  unsigned month = 0;

  friend auto operator<=>(const MonthKey&, const MonthKey&) = default;
};

// Parses YYYY-MM-DD. Throws std::invalid_argument on malformed or
// non-existent dates.
Date ParseDate(std::string_view text);
std::string FormatDate(const Date& date);

// Shifts by whole calendar months. When the target month is shorter than the
// source day-of-month, the result is clamped to the target month's last day
// (Mar 31 minus one month is Feb 28 or Feb 29).
Date AddMonths(const Date& date, int months);
Date AddDays(const Date& date, int days);

Date DateOf(UnixSeconds t);
UnixSeconds StartOfDay(const Date& date);
// Last second belonging to `date`.
UnixSeconds EndOfDay(const Date& date);

MonthKey MonthOf(const Date& date);
std::string FormatMonth(const MonthKey& key);
MonthKey ParseMonth(std::string_view text);
Date FirstDayOf(const MonthKey& key);

}  // namespace elicit

#endif  // ELICIT_CALENDAR_H_
