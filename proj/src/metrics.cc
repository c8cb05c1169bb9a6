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

#include "rxanon/metrics.h"

#include <algorithm>
#include <cmath>

namespace rxanon {

void NcpWeights::Validate() const {
  if (!(relational >= 0.0) || !(textual >= 0.0) || !(relational + textual > 0.0)) {
    throw ValidationError("NCP weights must be non-negative with a positive sum");
  }
}

double NcpNumeric(const RecodedCell& cell, double global_width) {
  const auto* range = std::get_if<NumericRange>(&cell);
  if (!range || global_width <= 0) return 0.0;
  return (range->hi - range->lo) / global_width;
}

double NcpCategorical(const RecodedCell& cell, size_t domain_size) {
  size_t covered = 1;
  if (const auto* set = std::get_if<CategorySet>(&cell)) {
    covered = set->values.size();
  } else if (const auto* node = std::get_if<DateNode>(&cell)) {
    covered = node->leaf_count;
  }
  if (covered <= 1 || domain_size == 0) return 0.0;
  return static_cast<double>(covered) / static_cast<double>(domain_size);
}

RelationalLoss NcpRelational(const PersonView& view, const GlobalExtent& extent,
                             const EquivalenceClass& cls) {
  RelationalLoss loss;
  for (size_t q = 0; q < view.quasi.size(); ++q) {
    double value = 0;
    switch (view.quasi[q].kind) {
      case AttributeKind::kQuasiNumeric:
        value = NcpNumeric(cls.cells[q], extent.columns[q].max - extent.columns[q].min);
        break;
      case AttributeKind::kQuasiDate:
        value = NcpCategorical(cls.cells[q], view.hierarchies[q].leaf_count());
        break;
      default:
        value = NcpCategorical(cls.cells[q], extent.columns[q].distinct);
    }
    loss.per_attribute.push_back(value);
    loss.mean += value;
  }
  if (!loss.per_attribute.empty()) {
    loss.mean /= static_cast<double>(loss.per_attribute.size());
  }
  return loss;
}

double NcpTextual(const PersonRecord& record, const EquivalenceClass& cls) {
  if (record.terms.empty()) return 0.0;
  size_t suppressed = 0;
  for (const TermKey& t : record.terms) {
    if (!std::binary_search(cls.retained.begin(), cls.retained.end(), t)) ++suppressed;
  }
  return static_cast<double>(suppressed) / static_cast<double>(record.terms.size());
}

double NcpCombined(double relational, double textual, const NcpWeights& weights) {
  return (weights.relational * relational + weights.textual * textual) /
         (weights.relational + weights.textual);
}

PartitionSummary SummarizePartitions(std::span<const size_t> sizes) {
  PartitionSummary s;
  s.count = sizes.size();
  if (sizes.empty()) return s;
  double total = 0;
  for (size_t n : sizes) total += static_cast<double>(n);
  s.mean_size = total / static_cast<double>(sizes.size());
  double sq = 0;
  for (size_t n : sizes) {
    double d = static_cast<double>(n) - s.mean_size;
    sq += d * d;
  }
  s.std_size = std::sqrt(sq / static_cast<double>(sizes.size()));
  return s;
}

PartitionSummary SummarizePartitions(const std::vector<EquivalenceClass>& classes) {
  std::vector<size_t> sizes;
  for (const auto& c : classes) sizes.push_back(c.members.size());
  return SummarizePartitions(sizes);
}

LossReport ComputeLoss(const PersonView& view,
                       const std::vector<EquivalenceClass>& classes,
                       const NcpWeights& weights, const SplitStats& splits) {
  weights.Validate();
  LossReport report;
  report.splits = splits;
  report.partitions = SummarizePartitions(classes);
  const GlobalExtent extent = GlobalExtent::Of(view);
  const std::vector<size_t> class_of = ClassIndexByPerson(view, classes);

  // Relational loss is a property of the class; compute it once per class.
  std::vector<RelationalLoss> class_loss;
  class_loss.reserve(classes.size());
  for (const auto& cls : classes) class_loss.push_back(NcpRelational(view, extent, cls));

  std::vector<double> attribute_sums(view.quasi.size(), 0.0);
  double sum_total = 0, sum_rel = 0, sum_txt = 0;
  for (size_t p = 0; p < view.size(); ++p) {
    const PersonRecord& rec = view.records[p];
    const EquivalenceClass& cls = classes[class_of[p]];
    const RelationalLoss& rel = class_loss[class_of[p]];
    double txt = NcpTextual(rec, cls);
    sum_rel += rel.mean;
    sum_txt += txt;
    sum_total += NcpCombined(rel.mean, txt, weights);
    for (size_t q = 0; q < view.quasi.size(); ++q) attribute_sums[q] += rel.per_attribute[q];
    for (const TermKey& t : rec.terms) {
      EntityLoss& e = report.per_entity_type[t.entity_type];
      ++e.total;
      if (!std::binary_search(cls.retained.begin(), cls.retained.end(), t)) ++e.suppressed;
    }
  }
  if (view.size() > 0) {
    const auto n = static_cast<double>(view.size());
    report.ncp_total = sum_total / n;
    report.ncp_relational = sum_rel / n;
    report.ncp_textual = sum_txt / n;
    for (size_t q = 0; q < view.quasi.size(); ++q) {
      report.per_attribute[view.quasi[q].name] = attribute_sums[q] / n;
    }
  }
  return report;
}

nlohmann::json LossReport::ToJson() const {
  nlohmann::json per_attr = nlohmann::json::object();
  for (const auto& [name, value] : per_attribute) per_attr[name] = value;
  nlohmann::json per_entity = nlohmann::json::object();
  for (const auto& [type, e] : per_entity_type) {
    per_entity[type] = {{"suppressed", e.suppressed}, {"total", e.total}, {"rate", e.rate()}};
  }
  return {
      {"ncp_total", ncp_total},
      {"ncp_relational", ncp_relational},
      {"ncp_textual", ncp_textual},
      {"per_attribute", std::move(per_attr)},
      {"per_entity_type", std::move(per_entity)},
      {"partitions",
       {{"count", partitions.count},
        {"mean_size", partitions.mean_size},
        {"std_size", partitions.std_size}}},
      {"splits",
       {{"relational", splits.relational_splits},
        {"textual", splits.textual_splits},
        {"per_attribute", splits.per_attribute}}},
  };
}

}  // namespace rxanon
