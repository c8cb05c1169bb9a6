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

// Normalized Certainty Penalty over a recoded person view.
//
//   NCP(r)   = (w_A * NCP_A(r) + w_X * NCP_X(r)) / (w_A + w_X)
//   NCP_A(r) = mean over quasi attributes of the per-attribute penalty:
//              numeric  (hi - lo) / (global max - global min)
//              category 0 if one value, else |values| / |domain|
//              date     as category, counting hierarchy leaves
//   NCP_X(r) = suppressed terms of r / |X'(r)|, 0 when X'(r) is empty
//   NCP(D*)  = mean of NCP(r) over persons
//
// Sums are accumulated sequentially in person order.

#ifndef RXANON_METRICS_H_
#define RXANON_METRICS_H_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rxanon/ingestion.h"
#include "rxanon/partitioning.h"
#include "rxanon/recoding.h"

namespace rxanon {

struct NcpWeights {
  double relational = 1.0;  // w_A
  double textual = 1.0;     // w_X

  // Throws ValidationError unless both are non-negative with a positive sum.
  void Validate() const;
};

// Penalty of a numeric cell given the attribute's global width.
double NcpNumeric(const RecodedCell& cell, double global_width);
// Penalty of a categorical or date cell given the domain size (distinct
// values, or hierarchy leaves for dates).
double NcpCategorical(const RecodedCell& cell, size_t domain_size);

// Per-attribute penalties and the relational mean for one class.
struct RelationalLoss {
  std::vector<double> per_attribute;
  double mean = 0;
};
RelationalLoss NcpRelational(const PersonView& view, const GlobalExtent& extent,
                             const EquivalenceClass& cls);

double NcpTextual(const PersonRecord& record, const EquivalenceClass& cls);
double NcpCombined(double relational, double textual, const NcpWeights& weights);

struct PartitionSummary {
  size_t count = 0;
  double mean_size = 0;
  double std_size = 0;  // population
};
PartitionSummary SummarizePartitions(std::span<const size_t> sizes);
PartitionSummary SummarizePartitions(const std::vector<EquivalenceClass>& classes);

struct EntityLoss {
  size_t suppressed = 0;
  size_t total = 0;
  double rate() const { return total == 0 ? 0.0 : double(suppressed) / double(total); }
};

struct LossReport {
  double ncp_total = 0;
  double ncp_relational = 0;
  double ncp_textual = 0;
  std::map<std::string, double> per_attribute;  // mean penalty per quasi attribute
  std::map<std::string, EntityLoss> per_entity_type;
  PartitionSummary partitions;
  SplitStats splits;

  nlohmann::json ToJson() const;
};

LossReport ComputeLoss(const PersonView& view,
                       const std::vector<EquivalenceClass>& classes,
                       const NcpWeights& weights, const SplitStats& splits = {});

}  // namespace rxanon

#endif  // RXANON_METRICS_H_
