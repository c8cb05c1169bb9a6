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

#include "rxanon/schema.h"

#include <gtest/gtest.h>

#include "testing.h"

namespace rxanon {
namespace {

const std::vector<std::string> kHeader = {"id",   "gender", "age", "topic",
                                          "sign", "date",   "text"};

Schema RunningSchema() {
  return Schema::FromFile(testing::RunningExampleDir() + "/schema.json");
}

bool HasIssue(const ValidationReport& report, const std::string& fragment) {
  for (const auto& issue : report.issues) {
    if (issue.message.find(fragment) != std::string::npos) return true;
  }
  return false;
}

TEST(SchemaTest, RunningExampleSchemaMatchesHeader) {
  Schema schema = RunningSchema();
  ASSERT_EQ(schema.attributes.size(), 7u);
  EXPECT_EQ(schema.attributes[schema.DirectIdentifier()].name, "id");
  EXPECT_EQ(schema.QuasiAttributes(), (std::vector<size_t>{1, 2, 3, 4, 5}));
  EXPECT_EQ(schema.TextualAttributes(), (std::vector<size_t>{6}));
  EXPECT_EQ(schema.attributes[2].entity_type, "AGE");
  EXPECT_TRUE(ValidateSchema(schema, kHeader).ok());
}

TEST(SchemaTest, JsonRoundTrip) {
  Schema schema = RunningSchema();
  EXPECT_EQ(Schema::FromJson(schema.ToJson()), schema);
}

TEST(SchemaTest, KindNames) {
  for (auto kind : {AttributeKind::kDirectIdentifier, AttributeKind::kQuasiNumeric,
                    AttributeKind::kQuasiCategorical, AttributeKind::kQuasiDate,
                    AttributeKind::kTextual, AttributeKind::kInsensitive}) {
    EXPECT_EQ(ParseAttributeKind(AttributeKindName(kind)), kind);
  }
  EXPECT_FALSE(ParseAttributeKind("quasi"));
}

TEST(SchemaTest, NoTextualAttribute) {
  Schema schema = RunningSchema();
  schema.attributes.pop_back();
  std::vector<std::string> header(kHeader.begin(), kHeader.end() - 1);
  auto report = ValidateSchema(schema, header);
  EXPECT_TRUE(HasIssue(report, "no textual attribute")) << report.ToString();
}

TEST(SchemaTest, TwoDirectIdentifiersAreBothNamed) {
  Schema schema = RunningSchema();
  schema.attributes[1].kind = AttributeKind::kDirectIdentifier;
  auto report = ValidateSchema(schema, kHeader);
  EXPECT_TRUE(HasIssue(report, "id, gender")) << report.ToString();
}

TEST(SchemaTest, HeaderMismatchAndDuplicates) {
  Schema schema = RunningSchema();
  schema.attributes.push_back({"mood", AttributeKind::kInsensitive, std::nullopt});
  schema.attributes.push_back({"gender", AttributeKind::kInsensitive, std::nullopt});
  std::vector<std::string> header = kHeader;
  header.push_back("extra");
  auto report = ValidateSchema(schema, header);
  EXPECT_TRUE(HasIssue(report, "missing column")) << report.ToString();
  EXPECT_TRUE(HasIssue(report, "not declared")) << report.ToString();
  EXPECT_TRUE(HasIssue(report, "duplicate attribute")) << report.ToString();
}

TEST(SchemaTest, EntityTypeRules) {
  Schema schema = RunningSchema();
  schema.attributes[3].entity_type = "AGE";
  schema.attributes[6].entity_type = "TEXT";
  auto report = ValidateSchema(schema, kHeader);
  EXPECT_TRUE(HasIssue(report, "already mapped")) << report.ToString();
  EXPECT_TRUE(HasIssue(report, "only allowed on quasi")) << report.ToString();
}

TEST(SchemaTest, MalformedJson) {
  EXPECT_THROW(Schema::FromJson(nlohmann::json::array()), ValidationError);
  EXPECT_THROW(Schema::FromJson({{"attributes", {{{"name", "x"}, {"kind", "bogus"}}}}}),
               ValidationError);
  EXPECT_THROW(Schema::FromFile("/nonexistent/schema.json"), ValidationError);
}

}  // namespace
}  // namespace rxanon
