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

// End-to-end runs: ingestion -> partitioning -> recoding -> metrics, the
// release audit and the parameter sweep.

#ifndef RXANON_PIPELINE_H_
#define RXANON_PIPELINE_H_

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "rxanon/ingestion.h"
#include "rxanon/metrics.h"
#include "rxanon/partitioning.h"
#include "rxanon/recoding.h"

namespace rxanon {

struct RunConfig {
  size_t k = 2;
  double lambda = 0.5;  // ignored by GDF
  Strategy strategy = Strategy::kMondrian;
  // Entity types kept in the annotations; nullopt keeps all.
  std::optional<std::set<std::string>> entities;
  NcpWeights weights;
  bool drop_direct_id = false;
  size_t jobs = 1;

  // Throws ValidationError on k < 2, lambda outside [0, 1], an empty entity
  // filter, bad weights or jobs == 0.
  void Validate() const;
};

// Annotations after the entity filter and redundancy flagging, and the
// person view built from them.
struct PreparedInput {
  AnnotationSet annotations;
  PersonView view;
};

PreparedInput Prepare(const Dataset& dataset, const AnnotationSet& raw,
                      const std::optional<std::set<std::string>>& entities);

struct AuditReport {
  size_t k = 0;
  size_t classes = 0;
  std::vector<std::string> size_violations;
  std::vector<std::string> retention_violations;
  std::vector<std::string> format_violations;

  bool passed() const {
    return size_violations.empty() && retention_violations.empty() &&
           format_violations.empty();
  }
  nlohmann::json ToJson() const;
};

struct RunResult {
  PreparedInput input;
  PartitionResult partitions;
  std::vector<EquivalenceClass> classes;
  Release release;
  LossReport loss;
  AuditReport audit;
};

RunResult Anonymize(const Dataset& dataset, const AnnotationSet& raw,
                    const RunConfig& config);

struct Evaluation {
  AuditReport audit;
  LossReport loss;
};

// Recovers equivalence classes from a release (persons grouped by their
// released quasi cells and the set of terms left readable in their texts)
// and checks class sizes against config.k, that every retained term is held
// by every member of its class, and that redundant values never leak. The
// release must keep the dataset's row order; the direct identifier column
// may be absent.
Evaluation EvaluateRelease(const Release& release, const Dataset& dataset,
                           const AnnotationSet& raw, const RunConfig& config);

Release ReadRelease(const std::string& path);

// Writes release.csv, classes.json, loss.json, loss.csv and
// partition_tree.json into `out_dir`, creating it if needed.
void WriteArtifacts(const RunResult& result, const RunConfig& config,
                    const std::string& out_dir);

struct SweepGrid {
  std::vector<size_t> ks;
  std::vector<double> lambdas;
  std::vector<Strategy> strategies;
};

struct SweepRow {
  size_t k = 0;
  std::optional<double> lambda;  // nullopt for GDF
  Strategy strategy = Strategy::kMondrian;
  LossReport loss;
};

// One row per (k, lambda) for Mondrian and one per k for GDF, ordered by k,
// then Mondrian rows by lambda, then GDF. Cells run on up to base.jobs
// threads.
std::vector<SweepRow> RunSweep(const Dataset& dataset, const AnnotationSet& raw,
                               const RunConfig& base, const SweepGrid& grid);

std::vector<std::string> LossCsvHeader(const std::vector<std::string>& entity_types);
CsvRecord LossCsvRow(const SweepRow& row, const std::vector<std::string>& entity_types);
std::string SweepCsv(const std::vector<SweepRow>& rows);

}  // namespace rxanon

#endif  // RXANON_PIPELINE_H_
