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

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

namespace rxanon {
namespace {

constexpr std::array<std::pair<AttributeKind, std::string_view>, 6> kKindNames{{
    {AttributeKind::kDirectIdentifier, "direct-identifier"},
    {AttributeKind::kQuasiNumeric, "quasi-numeric"},
    {AttributeKind::kQuasiCategorical, "quasi-categorical"},
    {AttributeKind::kQuasiDate, "quasi-date"},
    {AttributeKind::kTextual, "textual"},
    {AttributeKind::kInsensitive, "insensitive"},
}};

std::vector<size_t> IndicesWhere(const Schema& schema, auto pred) {
  std::vector<size_t> out;
  for (size_t i = 0; i < schema.attributes.size(); ++i) {
    if (pred(schema.attributes[i].kind)) out.push_back(i);
  }
  return out;
}

}  // namespace

std::string_view AttributeKindName(AttributeKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<AttributeKind> ParseAttributeKind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::optional<size_t> Schema::Find(std::string_view name) const {
  for (size_t i = 0; i < attributes.size(); ++i) {
    if (attributes[i].name == name) return i;
  }
  return std::nullopt;
}

size_t Schema::DirectIdentifier() const {
  auto ids = IndicesWhere(*this, [](AttributeKind k) {
    return k == AttributeKind::kDirectIdentifier;
  });
  if (ids.empty()) throw ValidationError("schema has no direct identifier");
  return ids.front();
}

std::vector<size_t> Schema::QuasiAttributes() const {
  return IndicesWhere(*this, IsQuasi);
}

std::vector<size_t> Schema::TextualAttributes() const {
  return IndicesWhere(
      *this, [](AttributeKind k) { return k == AttributeKind::kTextual; });
}

Schema Schema::FromJson(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("attributes") ||
      !doc["attributes"].is_array()) {
    throw ValidationError("schema: expected an object with an 'attributes' array");
  }
  Schema schema;
  for (const auto& entry : doc["attributes"]) {
    if (!entry.is_object() || !entry.contains("name") || !entry.contains("kind") ||
        !entry["name"].is_string() || !entry["kind"].is_string()) {
      throw ValidationError("schema: every attribute needs string 'name' and 'kind'");
    }
    Attribute attr;
    attr.name = entry["name"].get<std::string>();
    auto kind = ParseAttributeKind(entry["kind"].get<std::string>());
    if (!kind) {
      throw ValidationError("schema: attribute '" + attr.name +
                            "' has unknown kind '" +
                            entry["kind"].get<std::string>() + "'");
    }
    attr.kind = *kind;
    if (entry.contains("entity_type") && !entry["entity_type"].is_null()) {
      if (!entry["entity_type"].is_string()) {
        throw ValidationError("schema: entity_type of '" + attr.name +
                              "' must be a string");
      }
      attr.entity_type = entry["entity_type"].get<std::string>();
    }
    schema.attributes.push_back(std::move(attr));
  }
  if (doc.contains("date_format")) {
    if (!doc["date_format"].is_string()) {
      throw ValidationError("schema: date_format must be a string");
    }
    schema.date_format = doc["date_format"].get<std::string>();
  }
  return schema;
}

Schema Schema::FromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open schema file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("schema file '" + path + "': " + e.what());
  }
  return FromJson(doc);
}

nlohmann::json Schema::ToJson() const {
  nlohmann::json attrs = nlohmann::json::array();
  for (const auto& a : attributes) {
    nlohmann::json entry = {{"name", a.name},
                            {"kind", std::string(AttributeKindName(a.kind))}};
    if (a.entity_type) entry["entity_type"] = *a.entity_type;
    attrs.push_back(std::move(entry));
  }
  return {{"attributes", std::move(attrs)}, {"date_format", date_format}};
}

std::string ValidationReport::ToString() const {
  std::ostringstream out;
  for (const auto& issue : issues) {
    out << issue.attribute << ": " << issue.message << "\n";
  }
  return out.str();
}

ValidationReport ValidateSchema(const Schema& schema,
                                std::span<const std::string> header) {
  ValidationReport report;
  auto add = [&](std::string attribute, std::string message) {
    report.issues.push_back({std::move(attribute), std::move(message)});
  };

  std::set<std::string> columns(header.begin(), header.end());
  std::set<std::string> seen;
  std::vector<std::string> direct_ids;
  bool has_textual = false;
  std::map<std::string, std::string> entity_owner;

  for (const auto& attr : schema.attributes) {
    if (!seen.insert(attr.name).second) {
      add(attr.name, "duplicate attribute");
    }
    if (!columns.contains(attr.name)) {
      add(attr.name, "missing column in dataset header");
    }
    if (attr.kind == AttributeKind::kDirectIdentifier) {
      direct_ids.push_back(attr.name);
    }
    if (attr.kind == AttributeKind::kTextual) has_textual = true;
    if (attr.entity_type) {
      if (!IsQuasi(attr.kind)) {
        add(attr.name, "entity_type is only allowed on quasi attributes, not on " +
                           std::string(AttributeKindName(attr.kind)));
      }
      auto [it, inserted] = entity_owner.emplace(*attr.entity_type, attr.name);
      if (!inserted) {
        add(attr.name, "entity_type '" + *attr.entity_type +
                           "' is already mapped by '" + it->second + "'");
      }
    }
  }
  for (const auto& column : header) {
    if (!seen.contains(column)) {
      add(column, "column is not declared in the schema");
    }
  }

  if (direct_ids.empty()) {
    add("<schema>", "no direct identifier");
  } else if (direct_ids.size() > 1) {
    std::string names;
    for (const auto& n : direct_ids) names += (names.empty() ? "" : ", ") + n;
    add("<schema>", "multiple direct identifiers: " + names);
  }
  if (!has_textual) add("<schema>", "no textual attribute");
  return report;
}

}  // namespace rxanon
