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

#include "elicit/calendar.h"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace elicit {
namespace {

int ParseInt(std::string_view text, std::string_view whole) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw std::invalid_argument("malformed date '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Date ParseDate(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw std::invalid_argument("malformed date '" + std::string(text) +
                                "', expected YYYY-MM-DD");
  }
  const int y = ParseInt(text.substr(0, 4), text);
  const int m = ParseInt(text.substr(5, 2), text);
  const int d = ParseInt(text.substr(8, 2), text);
  Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) {
    throw std::invalid_argument("invalid calendar date '" + std::string(text) +
                                "'");
  }
  return date;
}

std::string FormatDate(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()),
                static_cast<unsigned>(date.day()));
  return buf;
}

Date AddMonths(const Date& date, int months) {
  Date shifted = date + std::chrono::months{months};
  if (!shifted.ok()) {
    shifted = std::chrono::year_month_day_last{shifted.year(),
                                               std::chrono::month_day_last{
                                                   shifted.month()}};
  }
  return shifted;
}

Date AddDays(const Date& date, int days) {
  return Date{std::chrono::sys_days{date} + std::chrono::days{days}};
}

Date DateOf(UnixSeconds t) {
  auto days = t / kSecondsPerDay;
  if (t % kSecondsPerDay < 0) --days;
  return Date{std::chrono::sys_days{std::chrono::days{days}}};
}

UnixSeconds StartOfDay(const Date& date) {
  return static_cast<UnixSeconds>(
             std::chrono::sys_days{date}.time_since_epoch().count()) *
         kSecondsPerDay;
}

UnixSeconds EndOfDay(const Date& date) {
  return StartOfDay(date) + kSecondsPerDay - 1;
}

MonthKey MonthOf(const Date& date) {
  return {static_cast<int>(date.year()), static_cast<unsigned>(date.month())};
}

std::string FormatMonth(const MonthKey& key) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u", key.year, key.month);
  return buf;
}

MonthKey ParseMonth(std::string_view text) {
  if (text.size() != 7 || text[4] != '-') {
    throw std::invalid_argument("malformed month '" + std::string(text) +
                                "', expected YYYY-MM");
  }
  MonthKey key{ParseInt(text.substr(0, 4), text),
               static_cast<unsigned>(ParseInt(text.substr(5, 2), text))};
  if (key.month < 1 || key.month > 12) {
    throw std::invalid_argument("invalid month '" + std::string(text) + "'");
  }
  return key;
}

Date FirstDayOf(const MonthKey& key) {
  return Date{std::chrono::year{key.year}, std::chrono::month{key.month},
              std::chrono::day{1}};
}

}  // namespace elicit
