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

#ifndef RXANON_SCHEMA_H_
#define RXANON_SCHEMA_H_

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace rxanon {

// Raised for malformed inputs: schema, dataset, annotations, run
// configuration. The CLI maps it to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AttributeKind {
  kDirectIdentifier,
  kQuasiNumeric,
  kQuasiCategorical,
  kQuasiDate,
  kTextual,
  kInsensitive,
};

// Wire names, e.g. "quasi-numeric".
std::string_view AttributeKindName(AttributeKind kind);
std::optional<AttributeKind> ParseAttributeKind(std::string_view name);

inline bool IsQuasi(AttributeKind kind) {
  return kind == AttributeKind::kQuasiNumeric ||
         kind == AttributeKind::kQuasiCategorical ||
         kind == AttributeKind::kQuasiDate;
}

struct Attribute {
  std::string name;
  AttributeKind kind = AttributeKind::kInsensitive;
  // Entity type linking a quasi attribute to text terms of the same type.
  std::optional<std::string> entity_type;

  bool operator==(const Attribute&) const = default;
};

struct Schema {
  std::vector<Attribute> attributes;
  std::string date_format = "YYYY-MM-DD";

  bool operator==(const Schema&) const = default;

  // Index of the attribute called `name`, if any.
  std::optional<size_t> Find(std::string_view name) const;
  // Index of the single direct identifier. Throws if the schema has none.
  size_t DirectIdentifier() const;
  std::vector<size_t> QuasiAttributes() const;
  std::vector<size_t> TextualAttributes() const;

  static Schema FromJson(const nlohmann::json& doc);
  static Schema FromFile(const std::string& path);
  nlohmann::json ToJson() const;
};

struct ValidationIssue {
  std::string attribute;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  // One "attribute: message" line per issue.
  std::string ToString() const;
};

// Checks the schema invariants and that every attribute names a column of
// `header`. Pure.
ValidationReport ValidateSchema(const Schema& schema,
                                std::span<const std::string> header);

}  // namespace rxanon

#endif  // RXANON_SCHEMA_H_
