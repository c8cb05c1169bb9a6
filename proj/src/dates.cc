// Copyright 2026 The rxanon Authors
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

#include "rxanon/dates.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <stdexcept>

namespace rxanon {
namespace {

std::optional<int> ReadDigits(std::string_view text, size_t& pos, size_t n) {
  if (pos + n > text.size()) return std::nullopt;
  int value = 0;
  for (size_t i = 0; i < n; ++i) {
    char c = text[pos + i];
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + (c - '0');
  }
  pos += n;
  return value;
}

}  // namespace

std::optional<DayNumber> ParseDate(std::string_view text,
                                   std::string_view pattern) {
  std::optional<int> year, month, day;
  size_t pos = 0;
  size_t p = 0;
  while (p < pattern.size()) {
    if (pattern.substr(p, 4) == "YYYY") {
      year = ReadDigits(text, pos, 4);
      if (!year) return std::nullopt;
      p += 4;
    } else if (pattern.substr(p, 2) == "MM") {
      month = ReadDigits(text, pos, 2);
      if (!month) return std::nullopt;
      p += 2;
    } else if (pattern.substr(p, 2) == "DD") {
      day = ReadDigits(text, pos, 2);
      if (!day) return std::nullopt;
      p += 2;
    } else {
      if (pos >= text.size() || text[pos] != pattern[p]) return std::nullopt;
      ++pos;
      ++p;
    }
  }
  if (pos != text.size() || !year || !month || !day) return std::nullopt;

  std::chrono::year_month_day ymd{std::chrono::year{*year},
                                  std::chrono::month{static_cast<unsigned>(*month)},
                                  std::chrono::day{static_cast<unsigned>(*day)}};
  if (!ymd.ok()) return std::nullopt;
  return static_cast<DayNumber>(
      std::chrono::sys_days{ymd}.time_since_epoch().count());
}

CivilDate ToCivil(DayNumber day) {
  std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{day}}};
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
          static_cast<unsigned>(ymd.day())};
}

std::string IsoDate(DayNumber day) {
  CivilDate c = ToCivil(day);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", c.year, c.month, c.day);
  return buf;
}

std::string IsoYearMonth(DayNumber day) {
  CivilDate c = ToCivil(day);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u", c.year, c.month);
  return buf;
}

std::string IsoYear(DayNumber day) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%04d", ToCivil(day).year);
  return buf;
}

DateHierarchy::DateHierarchy(std::span<const DayNumber> dates)
    : leaves_(dates.begin(), dates.end()) {
  std::sort(leaves_.begin(), leaves_.end());
  leaves_.erase(std::unique(leaves_.begin(), leaves_.end()), leaves_.end());
  for (DayNumber d : leaves_) {
    ++per_month_[IsoYearMonth(d)];
    ++per_year_[IsoYear(d)];
  }
}

bool DateHierarchy::Contains(DayNumber day) const {
  return std::binary_search(leaves_.begin(), leaves_.end(), day);
}

DateNode DateHierarchy::Root() const {
  if (leaves_.empty()) return {DateLevel::kYearRange, "[]", 0};
  return {DateLevel::kYearRange,
          "[" + IsoYear(leaves_.front()) + "-" + IsoYear(leaves_.back()) + "]",
          leaves_.size()};
}

DateNode DateHierarchy::Cover(std::span<const DayNumber> values) const {
  if (values.empty()) throw std::invalid_argument("DateHierarchy::Cover: no values");
  for (DayNumber v : values) {
    if (!Contains(v)) {
      throw std::out_of_range("date " + IsoDate(v) + " is not in the hierarchy");
    }
  }
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) return {DateLevel::kDay, IsoDate(*lo), 1};
  std::string month = IsoYearMonth(*lo);
  if (month == IsoYearMonth(*hi)) {
    return {DateLevel::kMonth, month, per_month_.at(month)};
  }
  std::string year = IsoYear(*lo);
  if (year == IsoYear(*hi)) {
    return {DateLevel::kYear, year, per_year_.at(year)};
  }
  return Root();
}

std::optional<DateNode> DateHierarchy::FindByLabel(std::string_view label) const {
  if (leaves_.empty()) return std::nullopt;
  if (label == Root().label) return Root();
  std::string key(label);
  if (auto d = ParseDate(label, "YYYY-MM-DD"); d && Contains(*d)) {
    return DateNode{DateLevel::kDay, key, 1};
  }
  if (auto it = per_month_.find(key); it != per_month_.end()) {
    return DateNode{DateLevel::kMonth, key, it->second};
  }
  if (auto it = per_year_.find(key); it != per_year_.end()) {
    return DateNode{DateLevel::kYear, key, it->second};
  }
  return std::nullopt;
}

}  // namespace rxanon
