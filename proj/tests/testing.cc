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

#include "testing.h"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "rxanon/csv.h"

namespace rxanon::testing {
namespace {

struct PoolTerm {
  const char* text;
  const char* type;
};

// Ordered so that a smaller vocabulary keeps a mix of types.
constexpr PoolTerm kPool[] = {
    {"engineer", "JOB"},    {"London", "LOCATION"}, {"Anna", "PERSON"},
    {"Google", "ORG"},      {"teacher", "JOB"},     {"Paris", "LOCATION"},
    {"Ben", "PERSON"},      {"NASA", "ORG"},        {"nurse", "JOB"},
    {"Canada", "LOCATION"}, {"Maria", "PERSON"},    {"UNICEF", "ORG"},
    {"lawyer", "JOB"},      {"Mexico", "LOCATION"}, {"John", "PERSON"},
    {"IBM", "ORG"},         {"chef", "JOB"},        {"Tokyo", "LOCATION"},
    {"Omar", "PERSON"},     {"Oxfam", "ORG"},       {"pilot", "JOB"},
    {"Berlin", "LOCATION"}, {"Li", "PERSON"},       {"Airbus", "ORG"},
    {"artist", "JOB"},      {"UK", "LOCATION"},     {"Sara", "PERSON"},
    {"Nokia", "ORG"},       {"doctor", "JOB"},      {"Spain", "LOCATION"},
};

constexpr const char* kTopics[] = {"Arts",    "Banking",  "Education", "Science",
                                   "Student", "Internet", "Law",       "Sports"};

class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}
  size_t Below(size_t n) { return static_cast<size_t>(gen_() % n); }
  bool Chance(double p) { return static_cast<double>(gen_() % 1000000) < p * 1e6; }
  // Index in [0, n) with weight 1 / (i + 1).
  size_t Zipf(size_t n) {
    double total = 0;
    for (size_t i = 0; i < n; ++i) total += 1.0 / static_cast<double>(i + 1);
    double x = static_cast<double>(gen_() % 1000000) / 1e6 * total;
    for (size_t i = 0; i < n; ++i) {
      x -= 1.0 / static_cast<double>(i + 1);
      if (x < 0) return i;
    }
    return n - 1;
  }

 private:
  std::mt19937_64 gen_;
};

std::string Lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

using Key = std::pair<std::string, std::string>;

struct RawPerson {
  std::vector<size_t> rows;
  std::set<Key> terms;  // non-redundant (lower text, type)
};

// Re-derives persons and their non-redundant terms from rows and spans.
std::map<std::string, RawPerson> RawPersons(const Dataset& dataset,
                                            const AnnotationSet& spans) {
  const Schema& schema = dataset.schema;
  const size_t id = schema.DirectIdentifier();
  std::map<std::string, RawPerson> persons;
  for (size_t row = 0; row < dataset.size(); ++row) {
    persons[dataset.Cell(row, id)].rows.push_back(row);
  }
  for (const SensitiveTerm& t : spans.terms()) {
    bool redundant = false;
    for (size_t a = 0; a < schema.attributes.size(); ++a) {
      const Attribute& attr = schema.attributes[a];
      if (attr.entity_type && *attr.entity_type == t.entity_type &&
          Lower(dataset.Cell(t.row_id, a)) == Lower(t.text)) {
        redundant = true;
      }
    }
    if (!redundant) {
      persons[dataset.Cell(t.row_id, id)].terms.insert({Lower(t.text), t.entity_type});
    }
  }
  return persons;
}

}  // namespace

std::string DataDir() { return RXANON_TEST_DATA; }
std::string RunningExampleDir() { return DataDir() + "/running_example"; }

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Fixture LoadRunningExample() {
  const std::string dir = RunningExampleDir();
  Schema schema = Schema::FromFile(dir + "/schema.json");
  Dataset dataset = LoadDataset(dir + "/data.csv", schema);
  AnnotationSet annotations = LoadAnnotations(dir + "/annotations.jsonl", dataset);
  return {std::move(dataset), std::move(annotations)};
}

Fixture MakeSynthetic(const SyntheticOptions& options) {
  Rng rng(options.seed);
  const size_t vocabulary = std::min(options.vocabulary, std::size(kPool));

  Schema schema;
  schema.attributes = {
      {"pid", AttributeKind::kDirectIdentifier, std::nullopt},
      {"gender", AttributeKind::kQuasiCategorical, std::nullopt},
      {"age", AttributeKind::kQuasiNumeric, "AGE"},
      {"topic", AttributeKind::kQuasiCategorical, std::nullopt},
      {"posted", AttributeKind::kQuasiDate, std::nullopt},
      {"post", AttributeKind::kTextual, std::nullopt},
  };

  struct Row {
    CsvRecord cells;
    std::vector<SensitiveTerm> spans;
  };
  std::vector<Row> rows;
  char pid[16];
  for (size_t p = 0; p < options.persons; ++p) {
    std::snprintf(pid, sizeof(pid), "p%03zu", p + 1);
    const std::string gender = rng.Chance(0.5) ? "female" : "male";
    const int age = 18 + static_cast<int>(rng.Below(50));
    const size_t topic_a = rng.Below(std::size(kTopics));
    const size_t topic_b = rng.Below(std::size(kTopics));
    std::vector<size_t> profile;
    const size_t profile_size = 1 + rng.Below(4);
    for (size_t i = 0; i < profile_size; ++i) profile.push_back(rng.Zipf(vocabulary));

    const size_t n_rows = 1 + rng.Below(std::max<size_t>(options.max_rows, 1));
    for (size_t r = 0; r < n_rows; ++r) {
      Row row;
      const int year = 2003 + static_cast<int>(rng.Below(4));
      const unsigned month = 1 + static_cast<unsigned>(rng.Below(12));
      const unsigned day = 1 + static_cast<unsigned>(rng.Below(28));
      char date[16];
      std::snprintf(date, sizeof(date), "%04d-%02u-%02u", year, month, day);

      std::string text = "Post " + std::to_string(r + 1) + ".";
      auto mention = [&](const std::string& prefix, const std::string& term,
                         const std::string& type, const std::string& suffix) {
        text += prefix;
        SensitiveTerm t;
        t.attribute = "post";
        t.start = text.size();
        text += term;
        t.end = text.size();
        t.text = term;
        t.entity_type = type;
        row.spans.push_back(std::move(t));
        text += suffix;
      };
      std::set<size_t> used;
      for (size_t idx : profile) {
        if (used.contains(idx) || !rng.Chance(0.7)) continue;
        used.insert(idx);
        std::string term = kPool[idx].text;
        if (rng.Chance(0.2)) term = Lower(term);
        mention(" I wrote about ", term, kPool[idx].type, ".");
      }
      if (rng.Chance(0.1)) {
        size_t idx = rng.Below(vocabulary);
        if (!used.contains(idx)) mention(" Also ", kPool[idx].text, kPool[idx].type, "!");
      }
      if (rng.Chance(options.age_mentions)) {
        mention(" I am ", std::to_string(age), "AGE", " years old.");
      }
      if (rng.Chance(options.age_mentions / 2)) {
        mention(" My sister is ", std::to_string(18 + rng.Below(60)), "AGE", ".");
      }
      row.cells = {pid,
                   gender,
                   std::to_string(age),
                   kTopics[rng.Chance(0.5) ? topic_a : topic_b],
                   date,
                   text};
      rows.push_back(std::move(row));
    }
  }
  // Interleave persons without losing determinism.
  for (size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[rng.Below(i)]);

  std::vector<CsvRecord> records = {{"pid", "gender", "age", "topic", "posted", "post"}};
  std::vector<SensitiveTerm> spans;
  for (size_t r = 0; r < rows.size(); ++r) {
    records.push_back(rows[r].cells);
    for (SensitiveTerm& t : rows[r].spans) {
      t.row_id = r;
      spans.push_back(std::move(t));
    }
  }
  Dataset dataset = Dataset::FromRecords(std::move(schema), std::move(records));
  AnnotationSet annotations = AnnotationSet::Build(dataset, std::move(spans));
  return {std::move(dataset), std::move(annotations)};
}

void WriteFixture(const Fixture& fixture, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir + "/schema.json");
    out << fixture.dataset.schema.ToJson().dump(2) << "\n";
  }
  {
    std::ofstream out(dir + "/data.csv", std::ios::binary);
    WriteCsvRecord(out, fixture.dataset.header);
    for (const auto& row : fixture.dataset.rows) WriteCsvRecord(out, row);
  }
  std::ofstream out(dir + "/annotations.jsonl", std::ios::binary);
  for (const SensitiveTerm& t : fixture.annotations.terms()) {
    nlohmann::json line = {{"row_id", t.row_id}, {"attribute", t.attribute},
                           {"start", t.start},   {"end", t.end},
                           {"text", t.text},     {"label", t.entity_type}};
    out << line.dump() << "\n";
  }
}

OracleLoss BruteForceNcp(const Dataset& dataset, const AnnotationSet& spans,
                         const std::vector<std::vector<std::string>>& classes,
                         const NcpWeights& weights) {
  const Schema& schema = dataset.schema;
  const auto persons = RawPersons(dataset, spans);
  const std::vector<size_t> quasi = schema.QuasiAttributes();

  // Global domains.
  std::map<size_t, std::pair<double, double>> range;
  std::map<size_t, std::set<std::string>> domain;
  for (size_t a : quasi) {
    for (size_t row = 0; row < dataset.size(); ++row) {
      const std::string& cell = dataset.Cell(row, a);
      if (schema.attributes[a].kind == AttributeKind::kQuasiNumeric) {
        double v = std::stod(cell);
        auto [it, inserted] = range.try_emplace(a, v, v);
        it->second.first = std::min(it->second.first, v);
        it->second.second = std::max(it->second.second, v);
      } else {
        domain[a].insert(cell);
      }
    }
  }

  OracleLoss sum;
  size_t counted = 0;
  for (const auto& cls : classes) {
    std::vector<double> per_attribute;
    for (size_t a : quasi) {
      const AttributeKind kind = schema.attributes[a].kind;
      std::set<std::string> values;
      double lo = 1e300, hi = -1e300;
      for (const std::string& pid : cls) {
        for (size_t row : persons.at(pid).rows) {
          values.insert(dataset.Cell(row, a));
          if (kind == AttributeKind::kQuasiNumeric) {
            lo = std::min(lo, std::stod(dataset.Cell(row, a)));
            hi = std::max(hi, std::stod(dataset.Cell(row, a)));
          }
        }
      }
      double penalty = 0;
      if (kind == AttributeKind::kQuasiNumeric) {
        double width = range[a].second - range[a].first;
        penalty = width > 0 ? (hi - lo) / width : 0;
      } else if (kind == AttributeKind::kQuasiCategorical) {
        penalty = values.size() <= 1 ? 0
                                     : static_cast<double>(values.size()) /
                                           static_cast<double>(domain[a].size());
      } else {
        // Leaves under the lowest common day / month / year / root node.
        std::set<std::string> days, months, years;
        for (const std::string& v : values) {
          DayNumber d = *ParseDate(v, schema.date_format);
          days.insert(IsoDate(d));
          months.insert(IsoYearMonth(d));
          years.insert(IsoYear(d));
        }
        std::set<std::string> all_days, covered;
        for (const std::string& v : domain[a]) {
          DayNumber d = *ParseDate(v, schema.date_format);
          all_days.insert(IsoDate(d));
          bool in = days.size() == 1     ? IsoDate(d) == *days.begin()
                    : months.size() == 1 ? IsoYearMonth(d) == *months.begin()
                    : years.size() == 1  ? IsoYear(d) == *years.begin()
                                         : true;
          if (in) covered.insert(IsoDate(d));
        }
        const size_t leaves = covered.size();
        penalty = leaves <= 1 ? 0
                              : static_cast<double>(leaves) /
                                    static_cast<double>(all_days.size());
      }
      per_attribute.push_back(penalty);
    }
    double rel = 0;
    for (double v : per_attribute) rel += v;
    if (!per_attribute.empty()) rel /= static_cast<double>(per_attribute.size());

    std::set<Key> common;
    bool first = true;
    for (const std::string& pid : cls) {
      const auto& terms = persons.at(pid).terms;
      if (first) {
        common = terms;
        first = false;
        continue;
      }
      std::set<Key> next;
      std::set_intersection(common.begin(), common.end(), terms.begin(), terms.end(),
                            std::inserter(next, next.end()));
      common = std::move(next);
    }
    for (const std::string& pid : cls) {
      const auto& terms = persons.at(pid).terms;
      double txt = 0;
      if (!terms.empty()) {
        size_t suppressed = 0;
        for (const Key& t : terms) suppressed += !common.contains(t);
        txt = static_cast<double>(suppressed) / static_cast<double>(terms.size());
      }
      sum.relational += rel;
      sum.textual += txt;
      sum.total += (weights.relational * rel + weights.textual * txt) /
                   (weights.relational + weights.textual);
      ++counted;
    }
  }
  if (counted > 0) {
    sum.total /= static_cast<double>(counted);
    sum.relational /= static_cast<double>(counted);
    sum.textual /= static_cast<double>(counted);
  }
  return sum;
}

std::vector<std::vector<std::string>> ClassPids(const PersonView& view,
                                                const std::vector<Partition>& partitions) {
  std::vector<std::vector<std::string>> out;
  for (const Partition& p : partitions) {
    std::vector<std::string> pids;
    for (size_t m : p.members) pids.push_back(view.records[m].pid);
    out.push_back(std::move(pids));
  }
  return out;
}

CutSearch ExhaustiveCuts(const Dataset& dataset, const AnnotationSet& spans,
                         const std::vector<std::string>& pids, size_t k) {
  const Schema& schema = dataset.schema;
  const auto persons = RawPersons(dataset, spans);
  CutSearch found;
  const size_t n = pids.size();
  auto allowable = [&](size_t left) { return left >= k && n - left >= k; };

  for (size_t a : schema.QuasiAttributes()) {
    const bool ordered = schema.attributes[a].kind != AttributeKind::kQuasiCategorical;
    // Smallest value per person: numerically for numbers and dates,
    // lexicographically for categories.
    std::vector<double> nums;
    std::vector<std::string> cats;
    for (const std::string& pid : pids) {
      double best_num = 1e300;
      std::string best_cat;
      bool first = true;
      for (size_t row : persons.at(pid).rows) {
        if (ordered) {
          best_num = std::min(best_num, dataset.parsed[a][row]);
        } else if (first || dataset.Cell(row, a) < best_cat) {
          best_cat = dataset.Cell(row, a);
        }
        first = false;
      }
      nums.push_back(best_num);
      cats.push_back(best_cat);
    }
    if (ordered) {
      for (double t : nums) {
        size_t left = std::count_if(nums.begin(), nums.end(), [&](double v) { return v <= t; });
        found.relational += allowable(left);
      }
    } else {
      for (const std::string& t : cats) {
        size_t left = std::count_if(cats.begin(), cats.end(),
                                    [&](const std::string& v) { return v <= t; });
        found.relational += allowable(left);
      }
    }
  }

  std::map<Key, size_t> holders;
  for (const std::string& pid : pids) {
    for (const Key& t : persons.at(pid).terms) ++holders[t];
  }
  for (const auto& [term, count] : holders) found.textual += allowable(count);
  return found;
}

}  // namespace rxanon::testing
