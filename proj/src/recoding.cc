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

#include "rxanon/recoding.h"

#include <algorithm>
#include <cassert>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rxanon/text.h"

namespace rxanon {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Quasi column index for each schema attribute, -1 if not quasi.
std::vector<int> QuasiIndexByAttribute(const PersonView& view, size_t attributes) {
  std::vector<int> index(attributes, -1);
  for (size_t q = 0; q < view.quasi.size(); ++q) {
    index[view.quasi[q].attribute] = static_cast<int>(q);
  }
  return index;
}

}  // namespace

std::string RenderCell(const RecodedCell& cell) {
  return std::visit(
      Overloaded{
          [](const Scalar& s) { return s.value; },
          [](const NumericRange& r) {
            return "[" + FormatNumber(r.lo) + "-" + FormatNumber(r.hi) + "]";
          },
          [](const CategorySet& c) {
            std::string out = "(";
            for (size_t i = 0; i < c.values.size(); ++i) {
              if (i > 0) out += ",";
              out += c.values[i];
            }
            return out + ")";
          },
          [](const DateNode& d) { return d.label; },
      },
      cell);
}

RecodedCell RecodeNumeric(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("RecodeNumeric: no values");
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) return Scalar{FormatNumber(*lo)};
  return NumericRange{*lo, *hi};
}

RecodedCell RecodeCategorical(std::span<const std::string> values) {
  if (values.empty()) throw std::invalid_argument("RecodeCategorical: no values");
  std::vector<std::string> distinct(values.begin(), values.end());
  std::sort(distinct.begin(), distinct.end(), std::greater<>());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() == 1) return Scalar{distinct.front()};
  return CategorySet{std::move(distinct)};
}

RecodedCell RecodeDate(std::span<const DayNumber> values,
                       const DateHierarchy& hierarchy) {
  return hierarchy.Cover(values);
}

TermRetention DecideTermRetention(const PersonView& view,
                                  std::span<const size_t> members) {
  TermRetention out;
  for (const auto& [term, freq] : CountTerms(view, members)) {
    (freq == members.size() ? out.retained : out.suppressed).push_back(term);
  }
  return out;
}

EquivalenceClass RecodePartition(const PersonView& view,
                                 std::span<const size_t> members) {
  EquivalenceClass cls;
  cls.members.assign(members.begin(), members.end());
  for (size_t q = 0; q < view.quasi.size(); ++q) {
    switch (view.quasi[q].kind) {
      case AttributeKind::kQuasiCategorical: {
        std::vector<std::string> values;
        for (size_t m : members) {
          const auto& cats = view.records[m].cells[q].categories;
          values.insert(values.end(), cats.begin(), cats.end());
        }
        cls.cells.push_back(RecodeCategorical(values));
        break;
      }
      case AttributeKind::kQuasiDate: {
        std::vector<DayNumber> days;
        for (size_t m : members) {
          for (double d : view.records[m].cells[q].numbers) {
            days.push_back(static_cast<DayNumber>(d));
          }
        }
        cls.cells.push_back(RecodeDate(days, view.hierarchies[q]));
        break;
      }
      default: {
        std::vector<double> values;
        for (size_t m : members) {
          const auto& nums = view.records[m].cells[q].numbers;
          values.insert(values.end(), nums.begin(), nums.end());
        }
        cls.cells.push_back(RecodeNumeric(values));
      }
    }
  }
  TermRetention retention = DecideTermRetention(view, members);
  cls.retained = std::move(retention.retained);
  cls.suppressed = std::move(retention.suppressed);
  return cls;
}

std::vector<EquivalenceClass> RecodePartitions(
    const PersonView& view, const std::vector<Partition>& partitions) {
  std::vector<EquivalenceClass> classes;
  classes.reserve(partitions.size());
  for (const Partition& p : partitions) {
    classes.push_back(RecodePartition(view, p.members));
  }
  return classes;
}

std::string Placeholder(std::string_view entity_type, bool sentence_start) {
  std::string out = ToLowerAscii(entity_type);
  if (sentence_start && !out.empty() && out[0] >= 'a' && out[0] <= 'z') {
    out[0] = static_cast<char>(out[0] - 'a' + 'A');
  }
  return out;
}

bool StartsSentence(std::string_view text, size_t byte_offset) {
  size_t i = std::min(byte_offset, text.size());
  while (i > 0) {
    char c = text[i - 1];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      --i;
      continue;
    }
    return c == '.' || c == '!' || c == '?';
  }
  return true;
}

bool ImpliedByCell(std::string_view term_text, std::string_view rendered,
                   AttributeKind kind) {
  const std::string_view term = Trim(term_text);
  if (EqualsIgnoreCase(term, rendered)) return true;
  if (kind != AttributeKind::kQuasiDate || term.empty()) return false;
  if (rendered.starts_with('[')) return false;  // year range
  return rendered.size() > term.size() && rendered.starts_with(term) &&
         rendered[term.size()] == '-';
}

std::string RewriteText(std::string_view text,
                        std::span<const SensitiveTerm> spans,
                        const EquivalenceClass& cls, const PersonView& view) {
  std::string out(text);
  for (auto it = spans.rbegin(); it != spans.rend(); ++it) {
    const SensitiveTerm& t = *it;
    assert(t.byte_end <= text.size());
    assert(std::next(it) == spans.rend() || std::next(it)->byte_end <= t.byte_start);
    std::string replacement;
    if (t.redundant && t.linked_attribute) {
      AttributeKind kind = AttributeKind::kQuasiCategorical;
      for (size_t q = 0; q < view.quasi.size(); ++q) {
        if (view.quasi[q].attribute != *t.linked_attribute) continue;
        replacement = RenderCell(cls.cells[q]);
        kind = view.quasi[q].kind;
      }
      if (ImpliedByCell(t.text, replacement, kind)) continue;
    } else if (std::binary_search(cls.retained.begin(), cls.retained.end(),
                                  t.key())) {
      continue;
    } else {
      replacement = Placeholder(t.entity_type, StartsSentence(text, t.byte_start));
    }
    out.replace(t.byte_start, t.byte_end - t.byte_start, replacement);
  }
  return out;
}

void Release::WriteCsv(std::ostream& out) const {
  WriteCsvRecord(out, header);
  for (const auto& row : rows) WriteCsvRecord(out, row);
}

std::string Release::ToCsv() const {
  std::ostringstream out;
  WriteCsv(out);
  return out.str();
}

std::vector<size_t> ClassIndexByPerson(const PersonView& view,
                                       const std::vector<EquivalenceClass>& classes) {
  std::vector<size_t> class_of(view.size(), classes.size());
  for (size_t c = 0; c < classes.size(); ++c) {
    for (size_t m : classes[c].members) class_of[m] = c;
  }
  for (size_t p = 0; p < class_of.size(); ++p) {
    if (class_of[p] == classes.size()) {
      throw std::logic_error("person '" + view.records[p].pid +
                             "' belongs to no equivalence class");
    }
  }
  return class_of;
}

Release ExpandRelease(const Dataset& dataset, const AnnotationSet& annotations,
                      const PersonView& view,
                      const std::vector<EquivalenceClass>& classes,
                      const ReleaseOptions& options) {
  const Schema& schema = dataset.schema;
  const size_t id_attr = schema.DirectIdentifier();
  const std::vector<size_t> class_of = ClassIndexByPerson(view, classes);
  const std::vector<int> quasi_of = QuasiIndexByAttribute(view, schema.attributes.size());

  std::vector<size_t> person_of_row(dataset.size());
  for (size_t p = 0; p < view.size(); ++p) {
    for (size_t row : view.records[p].tuple_ids) person_of_row[row] = p;
  }

  // Schema attribute behind each output column.
  std::vector<size_t> attr_of_column;
  Release release;
  for (size_t c = 0; c < dataset.header.size(); ++c) {
    size_t attr = *schema.Find(dataset.header[c]);
    if (options.drop_direct_id && attr == id_attr) continue;
    attr_of_column.push_back(attr);
    release.header.push_back(dataset.header[c]);
  }

  std::vector<std::string> rendered;
  size_t rendered_class = classes.size();
  release.rows.reserve(dataset.size());
  for (size_t row = 0; row < dataset.size(); ++row) {
    const size_t cls_index = class_of[person_of_row[row]];
    const EquivalenceClass& cls = classes[cls_index];
    if (cls_index != rendered_class) {
      rendered.clear();
      for (const RecodedCell& cell : cls.cells) rendered.push_back(RenderCell(cell));
      rendered_class = cls_index;
    }
    std::span<const SensitiveTerm> row_terms = annotations.ForRow(row);

    CsvRecord out;
    out.reserve(attr_of_column.size());
    for (size_t attr : attr_of_column) {
      const Attribute& a = schema.attributes[attr];
      if (IsQuasi(a.kind)) {
        out.push_back(rendered[static_cast<size_t>(quasi_of[attr])]);
      } else if (a.kind == AttributeKind::kTextual) {
        auto first = std::find_if(row_terms.begin(), row_terms.end(),
                                  [&](const SensitiveTerm& t) { return t.attribute == a.name; });
        auto last = std::find_if(first, row_terms.end(),
                                 [&](const SensitiveTerm& t) { return t.attribute != a.name; });
        out.push_back(RewriteText(dataset.Cell(row, attr),
                                  std::span<const SensitiveTerm>(first, last), cls,
                                  view));
      } else {
        out.push_back(dataset.Cell(row, attr));
      }
    }
    release.rows.push_back(std::move(out));
  }
  return release;
}

nlohmann::json ClassReport(const PersonView& view,
                           const std::vector<EquivalenceClass>& classes) {
  nlohmann::json out = nlohmann::json::array();
  for (const EquivalenceClass& cls : classes) {
    nlohmann::json members = nlohmann::json::array();
    for (size_t m : cls.members) members.push_back(view.records[m].pid);
    nlohmann::json cells = nlohmann::json::object();
    for (size_t q = 0; q < view.quasi.size(); ++q) {
      cells[view.quasi[q].name] = RenderCell(cls.cells[q]);
    }
    nlohmann::json retained = nlohmann::json::array();
    for (const TermKey& t : cls.retained) retained.push_back(t.ToString());
    out.push_back({{"members", std::move(members)},
                   {"recoded_cells", std::move(cells)},
                   {"retained_terms", std::move(retained)},
                   {"suppressed_term_count", cls.suppressed.size()}});
  }
  return out;
}

}  // namespace rxanon
