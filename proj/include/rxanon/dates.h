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

#ifndef RXANON_DATES_H_
#define RXANON_DATES_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rxanon {

// Days since 1970-01-01.
using DayNumber = int;

// Parses `text` against a pattern made of the tokens YYYY, MM and DD plus
// literal characters, e.g. "YYYY-MM-DD" or "DD.MM.YYYY". Rejects
// non-existent calendar dates.
std::optional<DayNumber> ParseDate(std::string_view text,
                                   std::string_view pattern);

struct CivilDate {
  int year;
  unsigned month;
  unsigned day;
};
CivilDate ToCivil(DayNumber day);

std::string IsoDate(DayNumber day);       // YYYY-MM-DD
std::string IsoYearMonth(DayNumber day);  // YYYY-MM
std::string IsoYear(DayNumber day);       // YYYY

enum class DateLevel { kDay, kMonth, kYear, kYearRange };

struct DateNode {
  DateLevel level = DateLevel::kDay;
  std::string label;
  // Number of distinct dataset dates below (or at) this node.
  size_t leaf_count = 0;

  bool operator==(const DateNode&) const = default;
};

// Generalization hierarchy over the distinct dates of a dataset:
// year range -> year -> year-month -> date.
class DateHierarchy {
 public:
  DateHierarchy() = default;
  explicit DateHierarchy(std::span<const DayNumber> dates);

  size_t leaf_count() const { return leaves_.size(); }
  bool Contains(DayNumber day) const;

  // Deepest node whose subtree covers every value. Throws std::out_of_range
  // if a value is not a leaf, std::invalid_argument if `values` is empty.
  DateNode Cover(std::span<const DayNumber> values) const;

  DateNode Root() const;

  // Node addressed by a rendered label ("YYYY-MM-DD", "YYYY-MM", "YYYY" or
  // "[Y1-Y2]"); nullopt if the label is not a node of this hierarchy.
  std::optional<DateNode> FindByLabel(std::string_view label) const;

 private:
  std::vector<DayNumber> leaves_;  // sorted, distinct
  std::map<std::string, size_t> per_month_;
  std::map<std::string, size_t> per_year_;
};

}  // namespace rxanon

#endif  // RXANON_DATES_H_
