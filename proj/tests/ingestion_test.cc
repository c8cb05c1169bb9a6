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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "testing.h"

namespace rxanon {
namespace {

using testing::Fixture;
using testing::LoadRunningExample;

std::string TempFile(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / ("rxanon_ingest_" + name);
  std::ofstream(path, std::ios::binary) << content;
  return path.string();
}

Schema RunningSchema() {
  return Schema::FromFile(testing::RunningExampleDir() + "/schema.json");
}

std::string ErrorOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

SensitiveTerm Span(size_t row, size_t start, size_t end, std::string text,
                   std::string type) {
  SensitiveTerm t;
  t.row_id = row;
  t.attribute = "text";
  t.start = start;
  t.end = end;
  t.text = std::move(text);
  t.entity_type = std::move(type);
  return t;
}

TEST(LoadDatasetTest, RunningExample) {
  Fixture f = LoadRunningExample();
  EXPECT_EQ(f.dataset.size(), 9u);
  EXPECT_EQ(f.dataset.Cell(0, 0), "1");
  EXPECT_EQ(f.dataset.Cell(8, 0), "6");
  EXPECT_EQ(f.dataset.parsed[2][3], 37);
  EXPECT_EQ(f.annotations.size(), 15u);
}

TEST(LoadDatasetTest, BadNumberNamesTheCell) {
  std::string path = TempFile("bad_age.csv",
                              "id,gender,age,topic,sign,date,text\n"
                              "1,male,abc,Arts,Leo,2004-01-01,hi\n");
  std::string error = ErrorOf([&] { LoadDataset(path, RunningSchema()); });
  EXPECT_NE(error.find("row 0"), std::string::npos) << error;
  EXPECT_NE(error.find("'age'"), std::string::npos) << error;
  EXPECT_NE(error.find("'abc'"), std::string::npos) << error;
}

TEST(LoadDatasetTest, BadDateAndEmptyQuasi) {
  std::string bad_date = TempFile("bad_date.csv",
                                  "id,gender,age,topic,sign,date,text\n"
                                  "1,male,3,Arts,Leo,2004-13-01,hi\n");
  EXPECT_THROW(LoadDataset(bad_date, RunningSchema()), ValidationError);
  std::string empty = TempFile("empty_quasi.csv",
                               "id,gender,age,topic,sign,date,text\n"
                               "1,,3,Arts,Leo,2004-01-01,hi\n");
  EXPECT_THROW(LoadDataset(empty, RunningSchema()), ValidationError);
  std::string ragged = TempFile("ragged.csv",
                                "id,gender,age,topic,sign,date,text\n"
                                "1,male,3\n");
  EXPECT_THROW(LoadDataset(ragged, RunningSchema()), ValidationError);
}

TEST(LoadDatasetTest, HeaderOnly) {
  std::string path = TempFile("header_only.csv", "id,gender,age,topic,sign,date,text\n");
  EXPECT_EQ(LoadDataset(path, RunningSchema()).size(), 0u);
}

TEST(LoadDatasetTest, SchemaMismatchIsRejected) {
  std::string path = TempFile("mismatch.csv", "id,gender,age,text\n1,m,3,hi\n");
  EXPECT_THROW(LoadDataset(path, RunningSchema()), ValidationError);
}

TEST(LoadDatasetTest, JoinPersonAndEventTables) {
  std::string persons = TempFile("persons.csv",
                                 "id,gender,age,sign\n1,male,36,Aries\n2,female,24,Leo\n");
  std::string events = TempFile("events.csv",
                                "topic,id,date,text\n"
                                "Arts,2,2004-01-02,b\n"
                                "Law,1,2004-01-01,a\n");
  Dataset ds = LoadJoinedDataset(persons, events, RunningSchema());
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.header, (std::vector<std::string>{"id", "gender", "age", "sign", "topic",
                                                 "date", "text"}));
  EXPECT_EQ(ds.rows[0], (CsvRecord{"2", "female", "24", "Leo", "Arts", "2004-01-02", "b"}));
  std::string orphan = TempFile("orphan.csv", "topic,id,date,text\nArts,9,2004-01-02,b\n");
  EXPECT_THROW(LoadJoinedDataset(persons, orphan, RunningSchema()), ValidationError);
}

TEST(AnnotationsTest, AcceptsCodePointOffsets) {
  Fixture f = LoadRunningExample();
  auto row0 = f.annotations.ForRow(0);
  ASSERT_EQ(row0.size(), 4u);
  EXPECT_EQ(row0[0].text, "Pedro");
  EXPECT_EQ(row0[0].byte_start, 11u);
  // "engineer" follows the three-byte apostrophe.
  EXPECT_EQ(row0[2].start, 37u);
  EXPECT_EQ(row0[2].byte_start, 39u);
  EXPECT_TRUE(f.annotations.ForRow(1).empty());
}

TEST(AnnotationsTest, RejectsBadSpans) {
  Fixture f = LoadRunningExample();
  auto build = [&](SensitiveTerm t) {
    return ErrorOf([&] { AnnotationSet::Build(f.dataset, {t}); });
  };
  EXPECT_NE(build(Span(0, 5, 5, "", "X")).find("empty span"), std::string::npos);
  EXPECT_NE(build(Span(0, 11, 16, "Pedr", "PERSON")).find("mismatch"), std::string::npos);
  EXPECT_NE(build(Span(0, 11, 500, "Pedro", "PERSON")).find("exceeds"), std::string::npos);
  EXPECT_NE(build(Span(42, 0, 1, "x", "X")).find("out of range"), std::string::npos);
  SensitiveTerm wrong_column = Span(0, 0, 1, "1", "X");
  wrong_column.attribute = "id";
  EXPECT_NE(build(wrong_column).find("not a textual"), std::string::npos);
  EXPECT_THROW(AnnotationSet::Build(f.dataset, {Span(0, 11, 16, "Pedro", "PERSON"),
                                                Span(0, 14, 16, "ro", "X")}),
               ValidationError);
}

TEST(AnnotationsTest, MalformedJsonLine) {
  Fixture f = LoadRunningExample();
  std::string path = TempFile("bad.jsonl", "{\"row_id\": 0}\n");
  std::string error = ErrorOf([&] { LoadAnnotations(path, f.dataset); });
  EXPECT_NE(error.find("line 1"), std::string::npos) << error;
}

TEST(AnnotationsTest, EntityFilter) {
  Fixture f = LoadRunningExample();
  AnnotationSet jobs = f.annotations.FilterEntityTypes({"JOB"});
  EXPECT_EQ(jobs.size(), 4u);
  EXPECT_EQ(jobs.ForRow(0).size(), 1u);
  EXPECT_EQ(jobs.ForRow(0)[0].text, "engineer");
}

TEST(RedundancyTest, Matching) {
  EXPECT_TRUE(MatchesRelationalValue("36 years old", "36", AttributeKind::kQuasiNumeric));
  EXPECT_TRUE(MatchesRelationalValue("science", "Science", AttributeKind::kQuasiCategorical));
  EXPECT_FALSE(MatchesRelationalValue("136", "36", AttributeKind::kQuasiNumeric));
  DayNumber day = *ParseDate("2004-01-19", "YYYY-MM-DD");
  EXPECT_TRUE(MatchesRelationalValue("2004", "2004-01-19", AttributeKind::kQuasiDate, day));
  EXPECT_TRUE(MatchesRelationalValue("2004-01", "2004-01-19", AttributeKind::kQuasiDate, day));
  EXPECT_FALSE(MatchesRelationalValue("2005", "2004-01-19", AttributeKind::kQuasiDate, day));
  EXPECT_FALSE(
      MatchesRelationalValue("Four days ago", "2004-01-19", AttributeKind::kQuasiDate, day));
}

TEST(RedundancyTest, RunningExample) {
  Fixture f = LoadRunningExample();
  AnnotationSet flagged = DetectRedundant(f.dataset, f.annotations);
  std::vector<std::string> redundant;
  for (const auto& t : flagged.terms()) {
    if (t.redundant) redundant.push_back(t.text);
  }
  // Mexico has no location-typed attribute and stays non-redundant.
  EXPECT_EQ(redundant, (std::vector<std::string>{"36", "2004", "science", "Pisces"}));
  EXPECT_EQ(flagged.ForRow(0)[1].linked_attribute, 2u);
}

TEST(RedundancyTest, NoEntityMapping) {
  Fixture f = LoadRunningExample();
  Schema schema = f.dataset.schema;
  for (auto& a : schema.attributes) a.entity_type.reset();
  Dataset ds = Dataset::FromRecords(
      schema, [&] {
        std::vector<CsvRecord> records = {f.dataset.header};
        records.insert(records.end(), f.dataset.rows.begin(), f.dataset.rows.end());
        return records;
      }());
  AnnotationSet flagged = DetectRedundant(ds, AnnotationSet::Build(ds, f.annotations.terms()));
  for (const auto& t : flagged.terms()) EXPECT_FALSE(t.redundant) << t.text;
}

TEST(PersonViewTest, RunningExample) {
  Fixture f = LoadRunningExample();
  PersonView view = BuildPersonView(f.dataset, DetectRedundant(f.dataset, f.annotations));
  ASSERT_EQ(view.size(), 6u);
  ASSERT_EQ(view.quasi.size(), 5u);
  const PersonRecord& p4 = view.records[3];
  EXPECT_EQ(p4.pid, "4");
  EXPECT_EQ(p4.tuple_ids, (std::vector<size_t>{4, 5, 6}));
  std::vector<std::string> dates;
  for (double d : p4.cells[4].numbers) dates.push_back(IsoDate(static_cast<DayNumber>(d)));
  EXPECT_EQ(dates, (std::vector<std::string>{"2004-01-13", "2004-01-17", "2004-01-19"}));
  EXPECT_EQ(p4.terms, (std::vector<TermKey>{{"biologist", "JOB"},
                                            {"four days ago", "DATE"},
                                            {"scientist", "JOB"},
                                            {"uk", "LOCATION"}}));
  EXPECT_TRUE(view.records[4].terms.empty());
  EXPECT_EQ(view.records[0].cells[3].categories, (std::vector<std::string>{"Aries"}));
  EXPECT_EQ(view.hierarchies[4].leaf_count(), 7u);
}

TEST(PersonViewTest, SingleRowGivesSingletonCells) {
  Fixture f = LoadRunningExample();
  std::vector<CsvRecord> records = {f.dataset.header, f.dataset.rows[3]};
  Dataset ds = Dataset::FromRecords(f.dataset.schema, records);
  PersonView view = BuildPersonView(ds, AnnotationSet::Build(ds, {}));
  ASSERT_EQ(view.size(), 1u);
  for (const QuasiCell& cell : view.records[0].cells) {
    EXPECT_EQ(cell.numbers.size() + cell.categories.size(), 1u);
  }
}

}  // namespace
}  // namespace rxanon
