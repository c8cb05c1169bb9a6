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

#ifndef RXANON_RECODING_H_
#define RXANON_RECODING_H_

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rxanon/csv.h"
#include "rxanon/dates.h"
#include "rxanon/ingestion.h"
#include "rxanon/partitioning.h"

namespace rxanon {

struct Scalar {
  std::string value;
  bool operator==(const Scalar&) const = default;
};

struct NumericRange {
  double lo = 0;
  double hi = 0;
  bool operator==(const NumericRange&) const = default;
};

// Distinct values in descending byte order.
struct CategorySet {
  std::vector<std::string> values;
  bool operator==(const CategorySet&) const = default;
};

using RecodedCell = std::variant<Scalar, NumericRange, CategorySet, DateNode>;

// "v" for scalars, "[lo-hi]" for ranges, "(v1,v2,...)" for sets and the node
// label for dates.
std::string RenderCell(const RecodedCell& cell);

RecodedCell RecodeNumeric(std::span<const double> values);
RecodedCell RecodeCategorical(std::span<const std::string> values);
// Deepest hierarchy node covering every value.
RecodedCell RecodeDate(std::span<const DayNumber> values,
                       const DateHierarchy& hierarchy);

struct TermRetention {
  std::vector<TermKey> retained;    // held by every member
  std::vector<TermKey> suppressed;  // held by some but not all
};

TermRetention DecideTermRetention(const PersonView& view,
                                  std::span<const size_t> members);

struct EquivalenceClass {
  Members members;
  std::vector<RecodedCell> cells;  // one per quasi column
  std::vector<TermKey> retained;
  std::vector<TermKey> suppressed;
};

EquivalenceClass RecodePartition(const PersonView& view,
                                 std::span<const size_t> members);
std::vector<EquivalenceClass> RecodePartitions(
    const PersonView& view, const std::vector<Partition>& partitions);

// Lower-cased entity type; the first letter is upper-cased when the span
// starts a sentence.
std::string Placeholder(std::string_view entity_type, bool sentence_start);

// True if only whitespace separates `byte_offset` from the start of `text`
// or from a preceding '.', '!' or '?'.
bool StartsSentence(std::string_view text, size_t byte_offset);

// True if a redundant term tells no more than its attribute's released
// cell: the two match ignoring case, or the term is a year or year-month
// above the released date node (term "2004", cell "2004-01").
bool ImpliedByCell(std::string_view term_text, std::string_view rendered,
                   AttributeKind kind);

// Rewrites the annotated spans of one textual cell right to left:
// redundant terms become the rendering of their linked attribute's recoded
// cell unless ImpliedByCell, suppressed terms become placeholders and
// retained terms stay. `spans` must belong to the cell and
// be sorted by start.
std::string RewriteText(std::string_view text,
                        std::span<const SensitiveTerm> spans,
                        const EquivalenceClass& cls, const PersonView& view);

struct Release {
  std::vector<std::string> header;
  std::vector<CsvRecord> rows;

  void WriteCsv(std::ostream& out) const;
  std::string ToCsv() const;
};

struct ReleaseOptions {
  bool drop_direct_id = false;
};

// Maps each person (index into view.records) to its class.
std::vector<size_t> ClassIndexByPerson(const PersonView& view,
                                       const std::vector<EquivalenceClass>& classes);

// One output row per input tuple in row order and original column order.
Release ExpandRelease(const Dataset& dataset, const AnnotationSet& annotations,
                      const PersonView& view,
                      const std::vector<EquivalenceClass>& classes,
                      const ReleaseOptions& options = {});

nlohmann::json ClassReport(const PersonView& view,
                           const std::vector<EquivalenceClass>& classes);

}  // namespace rxanon

#endif  // RXANON_RECODING_H_
