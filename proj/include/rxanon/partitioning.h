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

// Top-down strict partitioning of the person view into groups of at least
// k records.
//
// Two strategies are provided:
//
//  * Mondrian with a weight lambda in [0, 1]. Each step compares the widest
//    normalized range of the quasi attributes (relational family) with the
//    normalized range of the partition's terms (textual family) and splits
//    on relational attributes iff lambda * span_r >= (1 - lambda) * span_x.
//    lambda = 1 only ever splits on relational attributes, lambda = 0 only
//    on terms. Relational splits cut at the median, textual splits separate
//    records holding the partition's most frequent splittable term from the
//    rest.
//
//  * GDF (greedy document frequency), which only splits on the presence of
//    the most frequent term.
//
// Both recurse until |P| < 2k or no allowable cut (both sides >= k) exists.

#ifndef RXANON_PARTITIONING_H_
#define RXANON_PARTITIONING_H_

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rxanon/ingestion.h"

namespace rxanon {

// Indices into PersonView::records, ascending.
using Members = std::vector<size_t>;

// Dataset-wide extent of each quasi column and of the term vocabulary; the
// denominators of every normalized span.
struct GlobalExtent {
  struct Column {
    double min = 0;
    double max = 0;
    size_t distinct = 0;  // categorical only
  };
  std::vector<Column> columns;
  size_t distinct_terms = 0;

  static GlobalExtent Of(const PersonView& view);
};

double NormalizedSpan(const PersonView& view, const GlobalExtent& extent,
                      std::span<const size_t> members, size_t quasi);
double TextualSpan(const PersonView& view, const GlobalExtent& extent,
                   std::span<const size_t> members);

struct Cut {
  Members left;
  Members right;

  bool Allowable(size_t k) const { return left.size() >= k && right.size() >= k; }
};

// Median cut on a quasi column. Numeric and date records are ordered by
// their smallest value; those below the median go left. When ties around
// the median make "< median" and "<= median" differ, the more balanced of
// the two is taken (the strict one on a tie). Categorical columns cut the
// sorted value list at the prefix whose record count is nearest |P|/2.
// Returns nullopt when every record has the same representative.
std::optional<Cut> SplitRelational(const PersonView& view,
                                   std::span<const size_t> members, size_t quasi);

// Records holding `term` go left, the rest right.
Cut SplitTextual(const PersonView& view, std::span<const size_t> members,
                 const TermKey& term);

// Document frequency of every term within a partition.
using TermFrequencyIndex = std::map<TermKey, size_t>;
TermFrequencyIndex CountTerms(const PersonView& view,
                              std::span<const size_t> members);

// Candidate terms ordered by descending frequency, ties by (text, type).
// Terms in `excluded` are skipped.
std::vector<std::pair<TermKey, size_t>> RankTerms(
    const TermFrequencyIndex& frequencies,
    const std::set<TermKey>* excluded = nullptr);

// Most frequent term; nullopt when nothing is left.
std::optional<std::pair<TermKey, size_t>> NextTerm(
    const TermFrequencyIndex& frequencies,
    const std::set<TermKey>* excluded = nullptr);

struct RelationalSplit {
  size_t quasi = 0;
  double span = 0;
};
struct TextualSplit {
  TermKey term;
  size_t frequency = 0;
  double span = 0;
};
using SplitChoice = std::variant<std::monostate, RelationalSplit, TextualSplit>;

SplitChoice ChooseSplit(const PersonView& view, const GlobalExtent& extent,
                        std::span<const size_t> members, size_t k, double lambda);

struct SplitStats {
  size_t relational_splits = 0;
  size_t textual_splits = 0;
  std::map<std::string, size_t> per_attribute;  // quasi name -> splits

  void Merge(const SplitStats& other);
};

struct LineageStep {
  std::string split;  // attribute name, or "term:text/TYPE"
  bool left = true;
};

struct Partition {
  Members members;
  std::vector<LineageStep> lineage;
};

// Flattened partition tree in pre-order; node 0 is the root.
struct PartitionNode {
  std::string split;  // empty for leaves
  int left = -1;
  int right = -1;
  Members members;  // leaves only
};

enum class Strategy { kMondrian, kGdf };
std::string_view StrategyName(Strategy s);
std::optional<Strategy> ParseStrategy(std::string_view name);

struct PartitionResult {
  std::vector<Partition> partitions;  // leaves, left to right
  std::vector<PartitionNode> tree;
  SplitStats stats;

  nlohmann::json TreeJson(const PersonView& view) const;
};

struct PartitionOptions {
  size_t k = 2;
  double lambda = 0.5;
  // Upper bound on threads used for independent sub-partitions. Output is
  // identical for every value.
  size_t jobs = 1;
};

// Throws ValidationError if k < 2, lambda is outside [0, 1] or the view
// holds fewer than k records.
PartitionResult MondrianPartition(const PersonView& view,
                                  const PartitionOptions& options);
PartitionResult GdfPartition(const PersonView& view,
                             const PartitionOptions& options);
PartitionResult RunPartitioning(const PersonView& view, Strategy strategy,
                                const PartitionOptions& options);

}  // namespace rxanon

#endif  // RXANON_PARTITIONING_H_
