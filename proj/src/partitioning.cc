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

#include "rxanon/partitioning.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <memory>
#include <set>

namespace rxanon {
namespace {

constexpr std::string_view kTextualFamilyKey = "X'";

bool IsCategorical(const PersonView& view, size_t quasi) {
  return view.quasi[quasi].kind == AttributeKind::kQuasiCategorical;
}

// Smallest value of a set-valued cell; the record's position on the axis.
double NumericRepresentative(const PersonRecord& rec, size_t quasi) {
  return rec.cells[quasi].numbers.front();
}

const std::string& CategoricalRepresentative(const PersonRecord& rec,
                                             size_t quasi) {
  return rec.cells[quasi].categories.front();
}

std::string TermSplitLabel(const TermKey& term) {
  return "term:" + term.ToString();
}

// Recursion output before flattening.
struct Node {
  std::string split;
  std::unique_ptr<Node> left;
  std::unique_ptr<Node> right;
  Members members;
  SplitStats stats;  // of the whole subtree
};

void Flatten(Node& node, std::vector<LineageStep>& lineage,
             PartitionResult& out) {
  int id = static_cast<int>(out.tree.size());
  out.tree.emplace_back();
  if (!node.left) {
    out.tree[id].members = node.members;
    out.partitions.push_back({std::move(node.members), lineage});
    return;
  }
  out.tree[id].split = node.split;
  lineage.push_back({node.split, true});
  out.tree[id].left = static_cast<int>(out.tree.size());
  Flatten(*node.left, lineage, out);
  lineage.back().left = false;
  out.tree[id].right = static_cast<int>(out.tree.size());
  Flatten(*node.right, lineage, out);
  lineage.pop_back();
}

// Shared driver: `split` either returns a cut with its label and family or
// nullopt to make the partition a leaf.
struct StepResult {
  Cut cut;
  std::string label;
  bool relational = true;
  std::set<TermKey> excluded;  // passed to both children
};

template <typename SplitFn>
std::unique_ptr<Node> Recurse(Members members, std::set<TermKey> excluded,
                              size_t k, size_t parallel_depth,
                              const SplitFn& split) {
  auto node = std::make_unique<Node>();
  std::optional<StepResult> step;
  if (members.size() >= 2 * k) step = split(members, excluded);
  if (!step) {
    node->members = std::move(members);
    return node;
  }
  node->split = step->label;
  if (step->relational) {
    ++node->stats.relational_splits;
    ++node->stats.per_attribute[step->label];
  } else {
    ++node->stats.textual_splits;
    ++node->stats.per_attribute[std::string(kTextualFamilyKey)];
  }

  size_t child_depth = parallel_depth > 0 ? parallel_depth - 1 : 0;
  if (parallel_depth > 0) {
    auto left = std::async(std::launch::async, [&] {
      return Recurse(std::move(step->cut.left), step->excluded, k, child_depth,
                     split);
    });
    node->right = Recurse(std::move(step->cut.right), step->excluded, k,
                          child_depth, split);
    node->left = left.get();
  } else {
    node->left = Recurse(std::move(step->cut.left), step->excluded, k, 0, split);
    node->right =
        Recurse(std::move(step->cut.right), step->excluded, k, 0, split);
  }
  node->stats.Merge(node->left->stats);
  node->stats.Merge(node->right->stats);
  return node;
}

void CheckOptions(const PersonView& view, const PartitionOptions& options) {
  if (options.k < 2) throw ValidationError("k must be at least 2");
  if (!(options.lambda >= 0.0 && options.lambda <= 1.0)) {
    throw ValidationError("lambda must lie in [0, 1]");
  }
  if (view.size() < options.k) {
    throw ValidationError("dataset smaller than k: " + std::to_string(view.size()) +
                          " persons, k = " + std::to_string(options.k));
  }
}

size_t ParallelDepth(size_t jobs) {
  size_t depth = 0;
  while ((size_t{1} << depth) < jobs) ++depth;
  return depth;
}

template <typename SplitFn>
PartitionResult Run(const PersonView& view, const PartitionOptions& options,
                    const SplitFn& split) {
  Members all(view.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  auto root = Recurse(std::move(all), {}, options.k,
                      ParallelDepth(std::max<size_t>(options.jobs, 1)), split);
  PartitionResult result;
  result.stats = root->stats;
  std::vector<LineageStep> lineage;
  Flatten(*root, lineage, result);
  return result;
}

}  // namespace

GlobalExtent GlobalExtent::Of(const PersonView& view) {
  GlobalExtent extent;
  extent.columns.resize(view.quasi.size());
  std::set<TermKey> terms;
  for (size_t q = 0; q < view.quasi.size(); ++q) {
    GlobalExtent::Column& col = extent.columns[q];
    if (IsCategorical(view, q)) {
      std::set<std::string> values;
      for (const auto& rec : view.records) {
        values.insert(rec.cells[q].categories.begin(),
                      rec.cells[q].categories.end());
      }
      col.distinct = values.size();
    } else if (!view.records.empty()) {
      col.min = view.records.front().cells[q].numbers.front();
      col.max = col.min;
      for (const auto& rec : view.records) {
        col.min = std::min(col.min, rec.cells[q].numbers.front());
        col.max = std::max(col.max, rec.cells[q].numbers.back());
      }
    }
  }
  for (const auto& rec : view.records) terms.insert(rec.terms.begin(), rec.terms.end());
  extent.distinct_terms = terms.size();
  return extent;
}

double NormalizedSpan(const PersonView& view, const GlobalExtent& extent,
                      std::span<const size_t> members, size_t quasi) {
  if (members.empty()) return 0.0;
  const GlobalExtent::Column& col = extent.columns[quasi];
  if (IsCategorical(view, quasi)) {
    if (col.distinct == 0) return 0.0;
    std::set<std::string_view> values;
    for (size_t m : members) {
      for (const auto& v : view.records[m].cells[quasi].categories) values.insert(v);
    }
    return static_cast<double>(values.size()) / static_cast<double>(col.distinct);
  }
  double width = col.max - col.min;
  if (width <= 0) return 0.0;
  double lo = view.records[members.front()].cells[quasi].numbers.front();
  double hi = view.records[members.front()].cells[quasi].numbers.back();
  for (size_t m : members) {
    lo = std::min(lo, view.records[m].cells[quasi].numbers.front());
    hi = std::max(hi, view.records[m].cells[quasi].numbers.back());
  }
  return (hi - lo) / width;
}

double TextualSpan(const PersonView& view, const GlobalExtent& extent,
                   std::span<const size_t> members) {
  if (extent.distinct_terms == 0) return 0.0;
  std::set<TermKey> terms;
  for (size_t m : members) {
    terms.insert(view.records[m].terms.begin(), view.records[m].terms.end());
  }
  return static_cast<double>(terms.size()) /
         static_cast<double>(extent.distinct_terms);
}

std::optional<Cut> SplitRelational(const PersonView& view,
                                   std::span<const size_t> members,
                                   size_t quasi) {
  const size_t n = members.size();
  if (n < 2) return std::nullopt;
  Cut cut;

  if (IsCategorical(view, quasi)) {
    std::map<std::string, size_t> counts;
    for (size_t m : members) ++counts[CategoricalRepresentative(view.records[m], quasi)];
    if (counts.size() < 2) return std::nullopt;
    // Prefix of the sorted values with record count nearest n / 2.
    size_t cumulative = 0;
    size_t best_distance = n + 1;
    std::string last_left;
    for (auto it = counts.begin(); std::next(it) != counts.end(); ++it) {
      cumulative += it->second;
      size_t distance = cumulative * 2 > n ? cumulative * 2 - n : n - cumulative * 2;
      if (distance < best_distance) {
        best_distance = distance;
        last_left = it->first;
      }
    }
    for (size_t m : members) {
      (CategoricalRepresentative(view.records[m], quasi) <= last_left ? cut.left
                                                                       : cut.right)
          .push_back(m);
    }
    return cut;
  }

  std::vector<double> reps;
  reps.reserve(n);
  for (size_t m : members) reps.push_back(NumericRepresentative(view.records[m], quasi));
  std::vector<double> sorted = reps;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) return std::nullopt;

  const double median = sorted[n / 2];
  const auto below = static_cast<size_t>(
      std::lower_bound(sorted.begin(), sorted.end(), median) - sorted.begin());
  const auto at_or_below = static_cast<size_t>(
      std::upper_bound(sorted.begin(), sorted.end(), median) - sorted.begin());
  auto distance = [n](size_t left) {
    return left * 2 > n ? left * 2 - n : n - left * 2;
  };
  bool strict = below > 0 &&
                (at_or_below == n || distance(below) <= distance(at_or_below));
  for (size_t i = 0; i < n; ++i) {
    bool goes_left = strict ? reps[i] < median : reps[i] <= median;
    (goes_left ? cut.left : cut.right).push_back(members[i]);
  }
  return cut;
}

Cut SplitTextual(const PersonView& view, std::span<const size_t> members,
                 const TermKey& term) {
  Cut cut;
  for (size_t m : members) {
    (view.records[m].HasTerm(term) ? cut.left : cut.right).push_back(m);
  }
  return cut;
}

TermFrequencyIndex CountTerms(const PersonView& view,
                              std::span<const size_t> members) {
  TermFrequencyIndex index;
  for (size_t m : members) {
    for (const TermKey& t : view.records[m].terms) ++index[t];
  }
  return index;
}

std::vector<std::pair<TermKey, size_t>> RankTerms(
    const TermFrequencyIndex& frequencies, const std::set<TermKey>* excluded) {
  std::vector<std::pair<TermKey, size_t>> ranked;
  for (const auto& [term, freq] : frequencies) {
    if (excluded && excluded->contains(term)) continue;
    ranked.emplace_back(term, freq);
  }
  // The map iterates in key order, so a stable sort on frequency keeps the
  // lexicographic tie-break.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return ranked;
}

std::optional<std::pair<TermKey, size_t>> NextTerm(
    const TermFrequencyIndex& frequencies, const std::set<TermKey>* excluded) {
  auto ranked = RankTerms(frequencies, excluded);
  if (ranked.empty()) return std::nullopt;
  return ranked.front();
}

SplitChoice ChooseSplit(const PersonView& view, const GlobalExtent& extent,
                        std::span<const size_t> members, size_t k,
                        double lambda) {
  const size_t n = members.size();
  std::optional<RelationalSplit> relational;
  if (lambda > 0.0) {
    for (size_t q = 0; q < view.quasi.size(); ++q) {
      double span = NormalizedSpan(view, extent, members, q);
      if (relational && span <= relational->span) continue;
      auto cut = SplitRelational(view, members, q);
      if (cut && cut->Allowable(k)) relational = RelationalSplit{q, span};
    }
  }

  std::optional<TextualSplit> textual;
  if (lambda < 1.0) {
    for (const auto& [term, freq] : RankTerms(CountTerms(view, members))) {
      if (freq >= k && n - freq >= k) {
        textual = TextualSplit{term, freq, TextualSpan(view, extent, members)};
        break;
      }
    }
  }

  if (relational && textual) {
    if (lambda * relational->span >= (1.0 - lambda) * textual->span) {
      return *relational;
    }
    return *textual;
  }
  if (relational) return *relational;
  if (textual) return *textual;
  return std::monostate{};
}

void SplitStats::Merge(const SplitStats& other) {
  relational_splits += other.relational_splits;
  textual_splits += other.textual_splits;
  for (const auto& [name, count] : other.per_attribute) per_attribute[name] += count;
}

std::string_view StrategyName(Strategy s) {
  return s == Strategy::kMondrian ? "mondrian" : "gdf";
}

std::optional<Strategy> ParseStrategy(std::string_view name) {
  if (name == "mondrian") return Strategy::kMondrian;
  if (name == "gdf") return Strategy::kGdf;
  return std::nullopt;
}

nlohmann::json PartitionResult::TreeJson(const PersonView& view) const {
  nlohmann::json nodes = nlohmann::json::array();
  for (size_t id = 0; id < tree.size(); ++id) {
    const PartitionNode& node = tree[id];
    nlohmann::json entry = {{"id", id}};
    if (node.left < 0) {
      nlohmann::json pids = nlohmann::json::array();
      for (size_t m : node.members) pids.push_back(view.records[m].pid);
      entry["members"] = std::move(pids);
    } else {
      entry["split"] = node.split;
      entry["children"] = {node.left, node.right};
    }
    nodes.push_back(std::move(entry));
  }
  return {{"nodes", std::move(nodes)},
          {"relational_splits", stats.relational_splits},
          {"textual_splits", stats.textual_splits}};
}

PartitionResult MondrianPartition(const PersonView& view,
                                  const PartitionOptions& options) {
  CheckOptions(view, options);
  const GlobalExtent extent = GlobalExtent::Of(view);
  auto split = [&](const Members& members,
                   const std::set<TermKey>&) -> std::optional<StepResult> {
    SplitChoice choice =
        ChooseSplit(view, extent, members, options.k, options.lambda);
    if (const auto* rel = std::get_if<RelationalSplit>(&choice)) {
      return StepResult{*SplitRelational(view, members, rel->quasi),
                        view.quasi[rel->quasi].name, true, {}};
    }
    if (const auto* txt = std::get_if<TextualSplit>(&choice)) {
      return StepResult{SplitTextual(view, members, txt->term),
                        TermSplitLabel(txt->term), false, {}};
    }
    return std::nullopt;
  };
  return Run(view, options, split);
}

PartitionResult GdfPartition(const PersonView& view,
                             const PartitionOptions& options) {
  CheckOptions(view, options);
  auto split = [&](const Members& members,
                   const std::set<TermKey>& excluded) -> std::optional<StepResult> {
    // Candidates are tried in frequency order; a term whose presence split
    // is not allowable is dropped for this partition only.
    const size_t n = members.size();
    for (const auto& [term, freq] :
         RankTerms(CountTerms(view, members), &excluded)) {
      if (freq < options.k || n - freq < options.k) continue;
      std::set<TermKey> child_excluded = excluded;
      child_excluded.insert(term);
      return StepResult{SplitTextual(view, members, term), TermSplitLabel(term),
                        false, std::move(child_excluded)};
    }
    return std::nullopt;
  };
  return Run(view, options, split);
}

PartitionResult RunPartitioning(const PersonView& view, Strategy strategy,
                                const PartitionOptions& options) {
  return strategy == Strategy::kMondrian ? MondrianPartition(view, options)
                                         : GdfPartition(view, options);
}

}  // namespace rxanon
