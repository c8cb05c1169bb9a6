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

#include "rxanon/ingestion.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <tuple>
#include <unordered_map>

#include "json.hpp"
#include "rxanon/text.h"

namespace rxanon {
namespace {

std::optional<double> ParseNumber(std::string_view s) {
  double value = 0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return value;
}

template <typename T>
void SortUnique(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

Dataset Dataset::FromRecords(Schema schema, std::vector<CsvRecord> records) {
  if (records.empty()) throw ValidationError("dataset: missing header row");
  Dataset ds;
  ds.header = std::move(records.front());
  for (auto& name : ds.header) name = std::string(Trim(name));

  ValidationReport report = ValidateSchema(schema, ds.header);
  if (!report.ok()) {
    throw ValidationError("schema does not match dataset header:\n" +
                          report.ToString());
  }
  ds.schema = std::move(schema);
  ds.column_of.resize(ds.schema.attributes.size());
  for (size_t a = 0; a < ds.schema.attributes.size(); ++a) {
    auto it = std::find(ds.header.begin(), ds.header.end(),
                        ds.schema.attributes[a].name);
    ds.column_of[a] = static_cast<size_t>(it - ds.header.begin());
  }
  ds.parsed.resize(ds.schema.attributes.size());

  for (size_t r = 1; r < records.size(); ++r) {
    CsvRecord& rec = records[r];
    if (rec.size() == 1 && rec.front().empty()) continue;  // blank line
    size_t row_id = ds.rows.size();
    if (rec.size() != ds.header.size()) {
      throw ValidationError("dataset row " + std::to_string(row_id) + ": expected " +
                            std::to_string(ds.header.size()) + " cells, got " +
                            std::to_string(rec.size()));
    }
    for (auto& cell : rec) cell = std::string(Trim(cell));

    for (size_t a = 0; a < ds.schema.attributes.size(); ++a) {
      const Attribute& attr = ds.schema.attributes[a];
      const std::string& raw = rec[ds.column_of[a]];
      auto fail = [&](const std::string& what) {
        throw ValidationError("dataset row " + std::to_string(row_id) +
                              ", column '" + attr.name + "': " + what + " '" +
                              raw + "'");
      };
      if ((IsQuasi(attr.kind) || attr.kind == AttributeKind::kDirectIdentifier) &&
          raw.empty()) {
        fail("empty value");
      }
      if (attr.kind == AttributeKind::kQuasiNumeric) {
        auto v = ParseNumber(raw);
        if (!v) fail("not a number");
        ds.parsed[a].push_back(*v);
      } else if (attr.kind == AttributeKind::kQuasiDate) {
        auto d = ParseDate(raw, ds.schema.date_format);
        if (!d) fail("not a date in format " + ds.schema.date_format + ":");
        ds.parsed[a].push_back(*d);
      }
    }
    ds.rows.push_back(std::move(rec));
  }
  return ds;
}

Dataset LoadDataset(const std::string& path, const Schema& schema) {
  return Dataset::FromRecords(schema, ReadCsvFile(path));
}

Dataset LoadJoinedDataset(const std::string& person_path,
                          const std::string& event_path, const Schema& schema) {
  auto persons = ReadCsvFile(person_path);
  auto events = ReadCsvFile(event_path);
  if (persons.empty() || events.empty()) {
    throw ValidationError("join: both tables need a header row");
  }
  const std::string& id_name = schema.attributes.at(schema.DirectIdentifier()).name;
  auto column = [&](const CsvRecord& header, const char* table) {
    for (size_t i = 0; i < header.size(); ++i) {
      if (Trim(header[i]) == id_name) return i;
    }
    throw ValidationError(std::string("join: ") + table + " table lacks column '" +
                          id_name + "'");
  };
  size_t person_id = column(persons.front(), "person");
  size_t event_id = column(events.front(), "event");

  std::unordered_map<std::string, size_t> person_row;
  for (size_t r = 1; r < persons.size(); ++r) {
    if (persons[r].size() <= person_id) continue;
    person_row.emplace(std::string(Trim(persons[r][person_id])), r);
  }

  std::vector<CsvRecord> joined;
  CsvRecord header = persons.front();
  for (size_t c = 0; c < events.front().size(); ++c) {
    if (c != event_id) header.push_back(events.front()[c]);
  }
  joined.push_back(std::move(header));
  for (size_t r = 1; r < events.size(); ++r) {
    const CsvRecord& ev = events[r];
    if (ev.size() == 1 && ev.front().empty()) continue;
    if (ev.size() <= event_id) {
      throw ValidationError("join: event row " + std::to_string(r - 1) +
                            " is too short");
    }
    auto it = person_row.find(std::string(Trim(ev[event_id])));
    if (it == person_row.end()) {
      throw ValidationError("join: event row " + std::to_string(r - 1) +
                            " references unknown person '" + ev[event_id] + "'");
    }
    CsvRecord row = persons[it->second];
    for (size_t c = 0; c < ev.size(); ++c) {
      if (c != event_id) row.push_back(ev[c]);
    }
    joined.push_back(std::move(row));
  }
  return Dataset::FromRecords(schema, std::move(joined));
}

TermKey MakeTermKey(std::string_view text, std::string_view entity_type) {
  return {ToLowerAscii(Trim(text)), std::string(entity_type)};
}

AnnotationSet AnnotationSet::Build(const Dataset& dataset,
                                   std::vector<SensitiveTerm> terms) {
  for (size_t i = 0; i < terms.size(); ++i) {
    SensitiveTerm& t = terms[i];
    auto fail = [&](const std::string& what) {
      throw ValidationError("annotation " + std::to_string(i) + " (row " +
                            std::to_string(t.row_id) + ", '" + t.text +
                            "'): " + what);
    };
    if (t.row_id >= dataset.size()) fail("row_id out of range");
    auto attr = dataset.schema.Find(t.attribute);
    if (!attr || dataset.schema.attributes[*attr].kind != AttributeKind::kTextual) {
      fail("attribute '" + t.attribute + "' is not a textual attribute");
    }
    if (t.start >= t.end) fail("empty span");
    const std::string& cell = dataset.Cell(t.row_id, *attr);
    auto offsets = CodePointOffsets(cell);
    if (!offsets) fail("cell text is not valid UTF-8");
    if (t.end >= offsets->size()) fail("span exceeds cell length");
    t.byte_start = (*offsets)[t.start];
    t.byte_end = (*offsets)[t.end];
    if (cell.compare(t.byte_start, t.byte_end - t.byte_start, t.text) != 0) {
      fail("span text mismatch, cell has '" +
           cell.substr(t.byte_start, t.byte_end - t.byte_start) + "'");
    }
    t.redundant = false;
    t.linked_attribute.reset();
  }

  std::stable_sort(terms.begin(), terms.end(),
                   [](const SensitiveTerm& a, const SensitiveTerm& b) {
                     return std::tie(a.row_id, a.attribute, a.start) <
                            std::tie(b.row_id, b.attribute, b.start);
                   });
  for (size_t i = 1; i < terms.size(); ++i) {
    const auto& prev = terms[i - 1];
    const auto& cur = terms[i];
    if (prev.row_id == cur.row_id && prev.attribute == cur.attribute &&
        cur.start < prev.end) {
      throw ValidationError("annotations overlap in row " +
                            std::to_string(cur.row_id) + ": '" + prev.text +
                            "' and '" + cur.text + "'");
    }
  }

  AnnotationSet set;
  set.terms_ = std::move(terms);
  set.row_begin_.assign(dataset.size() + 1, 0);
  for (const auto& t : set.terms_) ++set.row_begin_[t.row_id + 1];
  for (size_t r = 0; r < dataset.size(); ++r) {
    set.row_begin_[r + 1] += set.row_begin_[r];
  }
  return set;
}

std::span<const SensitiveTerm> AnnotationSet::ForRow(size_t row) const {
  if (row + 1 >= row_begin_.size()) return {};
  return std::span<const SensitiveTerm>(terms_).subspan(
      row_begin_[row], row_begin_[row + 1] - row_begin_[row]);
}

AnnotationSet AnnotationSet::FilterEntityTypes(
    const std::set<std::string>& types) const {
  AnnotationSet out;
  out.row_begin_.assign(row_begin_.size(), 0);
  for (const auto& t : terms_) {
    if (!types.contains(t.entity_type)) continue;
    out.terms_.push_back(t);
    ++out.row_begin_[t.row_id + 1];
  }
  for (size_t r = 0; r + 1 < out.row_begin_.size(); ++r) {
    out.row_begin_[r + 1] += out.row_begin_[r];
  }
  return out;
}

AnnotationSet LoadAnnotations(const std::string& path, const Dataset& dataset) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open annotations file '" + path + "'");
  std::vector<SensitiveTerm> terms;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    auto fail = [&](const std::string& what) {
      throw ValidationError("annotations line " + std::to_string(line_no) + ": " +
                            what);
    };
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(e.what());
    }
    try {
      SensitiveTerm t;
      auto row = obj.at("row_id").get<long long>();
      auto start = obj.at("start").get<long long>();
      auto end = obj.at("end").get<long long>();
      if (row < 0 || start < 0 || end < 0) fail("negative index");
      t.row_id = static_cast<size_t>(row);
      t.start = static_cast<size_t>(start);
      t.end = static_cast<size_t>(end);
      t.attribute = obj.at("attribute").get<std::string>();
      t.text = obj.at("text").get<std::string>();
      t.entity_type = obj.at("label").get<std::string>();
      terms.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      fail(e.what());
    }
  }
  return AnnotationSet::Build(dataset, std::move(terms));
}

bool MatchesRelationalValue(std::string_view term_text, std::string_view cell,
                            AttributeKind kind, std::optional<DayNumber> date) {
  std::string term = ToLowerAscii(Trim(term_text));
  std::string value = ToLowerAscii(Trim(cell));
  if (term.empty() || value.empty()) return false;
  if (term == value || ContainsToken(term, value)) return true;
  if (kind == AttributeKind::kQuasiDate && date) {
    for (const std::string& label :
         {IsoDate(*date), IsoYearMonth(*date), IsoYear(*date)}) {
      if (term == label) return true;
    }
  }
  return false;
}

AnnotationSet DetectRedundant(const Dataset& dataset, AnnotationSet annotations) {
  std::map<std::string, size_t> by_entity;
  for (size_t a : dataset.schema.QuasiAttributes()) {
    const auto& attr = dataset.schema.attributes[a];
    if (attr.entity_type) by_entity.emplace(*attr.entity_type, a);
  }
  for (auto& t : annotations.terms_) {
    t.redundant = false;
    t.linked_attribute.reset();
    auto it = by_entity.find(t.entity_type);
    if (it == by_entity.end()) continue;
    size_t a = it->second;
    AttributeKind kind = dataset.schema.attributes[a].kind;
    std::optional<DayNumber> date;
    if (kind == AttributeKind::kQuasiDate) {
      date = static_cast<DayNumber>(dataset.parsed[a][t.row_id]);
    }
    if (MatchesRelationalValue(t.text, dataset.Cell(t.row_id, a), kind, date)) {
      t.redundant = true;
      t.linked_attribute = a;
    }
  }
  return annotations;
}

bool PersonRecord::HasTerm(const TermKey& key) const {
  return std::binary_search(terms.begin(), terms.end(), key);
}

PersonView BuildPersonView(const Dataset& dataset,
                           const AnnotationSet& annotations) {
  PersonView view;
  for (size_t a : dataset.schema.QuasiAttributes()) {
    const auto& attr = dataset.schema.attributes[a];
    view.quasi.push_back({a, attr.name, attr.kind});
  }
  const size_t id_attr = dataset.schema.DirectIdentifier();

  std::unordered_map<std::string, size_t> index;
  for (size_t row = 0; row < dataset.size(); ++row) {
    const std::string& pid = dataset.Cell(row, id_attr);
    auto [it, inserted] = index.emplace(pid, view.records.size());
    if (inserted) {
      PersonRecord rec;
      rec.pid = pid;
      rec.cells.resize(view.quasi.size());
      view.records.push_back(std::move(rec));
    }
    PersonRecord& rec = view.records[it->second];
    rec.tuple_ids.push_back(row);
    for (size_t q = 0; q < view.quasi.size(); ++q) {
      const QuasiColumn& col = view.quasi[q];
      if (col.kind == AttributeKind::kQuasiCategorical) {
        rec.cells[q].categories.push_back(dataset.Cell(row, col.attribute));
      } else {
        rec.cells[q].numbers.push_back(dataset.parsed[col.attribute][row]);
      }
    }
    for (const SensitiveTerm& t : annotations.ForRow(row)) {
      if (!t.redundant) rec.terms.push_back(t.key());
    }
  }

  for (PersonRecord& rec : view.records) {
    for (QuasiCell& cell : rec.cells) {
      SortUnique(cell.numbers);
      SortUnique(cell.categories);
    }
    SortUnique(rec.terms);
  }

  view.hierarchies.resize(view.quasi.size());
  for (size_t q = 0; q < view.quasi.size(); ++q) {
    if (view.quasi[q].kind != AttributeKind::kQuasiDate) continue;
    const auto& values = dataset.parsed[view.quasi[q].attribute];
    std::vector<DayNumber> days(values.begin(), values.end());
    view.hierarchies[q] = DateHierarchy(days);
  }
  return view;
}

}  // namespace rxanon
