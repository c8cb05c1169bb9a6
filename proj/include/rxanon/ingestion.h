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

// Loading of the flattened dataset and its term annotations, redundancy
// flagging and aggregation into one record per person.

#ifndef RXANON_INGESTION_H_
#define RXANON_INGESTION_H_

#include <compare>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "rxanon/csv.h"
#include "rxanon/dates.h"
#include "rxanon/schema.h"

namespace rxanon {

struct Dataset {
  Schema schema;
  std::vector<std::string> header;  // file column order
  std::vector<size_t> column_of;    // schema attribute index -> header index
  std::vector<CsvRecord> rows;      // trimmed cells, file column order
  // Parsed numeric values (dates as day numbers), indexed [attribute][row];
  // empty for attributes that are neither numeric nor date.
  std::vector<std::vector<double>> parsed;

  size_t size() const { return rows.size(); }
  const std::string& Cell(size_t row, size_t attribute) const {
    return rows[row][column_of[attribute]];
  }

  // `records` holds the header followed by data rows. Validates the schema
  // against the header and parses every quasi cell.
  static Dataset FromRecords(Schema schema, std::vector<CsvRecord> records);
};

Dataset LoadDataset(const std::string& path, const Schema& schema);

// Joins a person table with an event table on the schema's direct
// identifier. Output rows follow the event table order; every event must
// reference a known person.
Dataset LoadJoinedDataset(const std::string& person_path,
                          const std::string& event_path, const Schema& schema);

// Identity of a sensitive term: lower-cased text plus entity type.
struct TermKey {
  std::string text;
  std::string entity_type;

  auto operator<=>(const TermKey&) const = default;
  bool operator==(const TermKey&) const = default;
  std::string ToString() const { return text + "/" + entity_type; }
};

TermKey MakeTermKey(std::string_view text, std::string_view entity_type);

struct SensitiveTerm {
  size_t row_id = 0;
  std::string attribute;
  // Half-open span in Unicode code points.
  size_t start = 0;
  size_t end = 0;
  std::string text;
  std::string entity_type;
  bool redundant = false;
  // Quasi attribute (schema index) whose value this term repeats.
  std::optional<size_t> linked_attribute;
  // Byte span inside the cell, derived from the code point span.
  size_t byte_start = 0;
  size_t byte_end = 0;

  TermKey key() const { return MakeTermKey(text, entity_type); }
};

class AnnotationSet {
 public:
  AnnotationSet() = default;

  // Validates each term against its cell (row range, textual attribute,
  // span bounds, substring agreement, no overlap within a cell) and indexes
  // them by row. Redundancy flags are reset.
  static AnnotationSet Build(const Dataset& dataset,
                             std::vector<SensitiveTerm> terms);

  const std::vector<SensitiveTerm>& terms() const { return terms_; }
  // Terms of one row ordered by (attribute, start).
  std::span<const SensitiveTerm> ForRow(size_t row) const;
  size_t size() const { return terms_.size(); }

  // Keeps only terms whose entity type is in `types`.
  AnnotationSet FilterEntityTypes(const std::set<std::string>& types) const;

 private:
  friend AnnotationSet DetectRedundant(const Dataset&, AnnotationSet);

  std::vector<SensitiveTerm> terms_;
  std::vector<size_t> row_begin_;  // size rows + 1
};

// JSON lines, one object per term with keys row_id, attribute, start, end,
// text and label.
AnnotationSet LoadAnnotations(const std::string& path, const Dataset& dataset);

// True when `term_text` repeats `cell` of a quasi attribute: case-insensitive
// equality after trimming, or the term containing the value as a whole
// token. For date attributes the term may also equal the date's ISO form,
// its month ("YYYY-MM") or its year ("YYYY").
bool MatchesRelationalValue(std::string_view term_text, std::string_view cell,
                            AttributeKind kind,
                            std::optional<DayNumber> date = std::nullopt);

// Flags terms that repeat a quasi value of their own row under the same
// entity type.
AnnotationSet DetectRedundant(const Dataset& dataset, AnnotationSet annotations);

struct QuasiColumn {
  size_t attribute = 0;  // schema index
  std::string name;
  AttributeKind kind = AttributeKind::kQuasiCategorical;
};

// Set-aggregated value of one quasi attribute for one person. Numeric and
// date attributes fill `numbers` (dates as day numbers); categorical ones
// fill `categories`. Both are sorted and duplicate-free.
struct QuasiCell {
  std::vector<double> numbers;
  std::vector<std::string> categories;

  bool operator==(const QuasiCell&) const = default;
};

struct PersonRecord {
  std::string pid;
  std::vector<QuasiCell> cells;  // one per quasi column
  std::vector<TermKey> terms;    // sorted, distinct, non-redundant only
  std::vector<size_t> tuple_ids;

  bool HasTerm(const TermKey& key) const;
};

struct PersonView {
  std::vector<QuasiColumn> quasi;
  std::vector<PersonRecord> records;  // ordered by first appearance of pid
  // Date hierarchy per quasi column; default-constructed for non-dates.
  std::vector<DateHierarchy> hierarchies;

  size_t size() const { return records.size(); }
};

PersonView BuildPersonView(const Dataset& dataset,
                           const AnnotationSet& annotations);

}  // namespace rxanon

#endif  // RXANON_INGESTION_H_
