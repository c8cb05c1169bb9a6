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

#include "rxanon/pipeline.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "rxanon/csv.h"
#include "rxanon/text.h"

namespace rxanon {
namespace {

std::string JoinPids(const PersonView& view, const Members& members) {
  std::string out = "{";
  for (size_t i = 0; i < members.size(); ++i) {
    if (i > 0) out += ",";
    out += view.records[members[i]].pid;
  }
  return out + "}";
}

std::optional<double> ParseDouble(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

// Inverse of RenderCell for one quasi column.
std::optional<RecodedCell> ParseRenderedCell(const std::string& s, AttributeKind kind,
                                             const DateHierarchy& hierarchy) {
  switch (kind) {
    case AttributeKind::kQuasiNumeric: {
      if (s.size() >= 5 && s.front() == '[' && s.back() == ']') {
        std::string_view body(s.data() + 1, s.size() - 2);
        size_t dash = body.find('-', 1);
        if (dash == std::string_view::npos) return std::nullopt;
        auto lo = ParseDouble(body.substr(0, dash));
        auto hi = ParseDouble(body.substr(dash + 1));
        if (!lo || !hi || *lo > *hi) return std::nullopt;
        return NumericRange{*lo, *hi};
      }
      if (!ParseDouble(s)) return std::nullopt;
      return Scalar{s};
    }
    case AttributeKind::kQuasiDate: {
      auto node = hierarchy.FindByLabel(s);
      if (!node) return std::nullopt;
      return *node;
    }
    default: {
      if (s.size() >= 2 && s.front() == '(' && s.back() == ')' &&
          s.find(',') != std::string::npos) {
        CategorySet set;
        std::string_view body(s.data() + 1, s.size() - 2);
        size_t start = 0;
        while (true) {
          size_t comma = body.find(',', start);
          set.values.emplace_back(body.substr(start, comma - start));
          if (comma == std::string_view::npos) break;
          start = comma + 1;
        }
        return set;
      }
      return Scalar{s};
    }
  }
}

// Splits `released` into the replacement of every span of `original`,
// assuming all text outside the spans is unchanged. Replacements judged
// plausible by `preferred` are tried first. Returns nullopt if the texts
// cannot be aligned.
class SpanAligner {
 public:
  using Preferred = std::function<bool(size_t span, std::string_view replacement)>;

  SpanAligner(std::string_view original, std::span<const SensitiveTerm> spans,
              std::string_view released, Preferred preferred)
      : released_(released), preferred_(std::move(preferred)) {
    size_t pos = 0;
    for (const auto& t : spans) {
      segments_.emplace_back(original.substr(pos, t.byte_start - pos));
      pos = t.byte_end;
    }
    segments_.emplace_back(original.substr(pos));
  }

  std::optional<std::vector<std::string>> Align() {
    if (!released_.starts_with(segments_.front())) return std::nullopt;
    replacements_.assign(segments_.size() - 1, {});
    if (!Match(1, segments_.front().size())) return std::nullopt;
    return replacements_;
  }

 private:
  // Matches span i-1 followed by segment i starting at `pos`.
  bool Match(size_t i, size_t pos) {
    if (i == segments_.size()) return pos == released_.size();
    if (failed_.contains({i, pos})) return false;
    std::string_view seg = segments_[i];
    const bool last = i + 1 == segments_.size();
    std::vector<size_t> ends;
    if (last) {
      if (released_.size() >= pos + seg.size() && released_.ends_with(seg)) {
        ends.push_back(released_.size() - seg.size());
      }
    } else {
      for (size_t q = released_.find(seg, pos); q != std::string_view::npos;
           q = q + 1 <= released_.size() ? released_.find(seg, q + 1)
                                         : std::string_view::npos) {
        ends.push_back(q);
      }
    }
    std::stable_partition(ends.begin(), ends.end(), [&](size_t q) {
      return preferred_(i - 1, released_.substr(pos, q - pos));
    });
    for (size_t q : ends) {
      replacements_[i - 1] = std::string(released_.substr(pos, q - pos));
      if (Match(i + 1, q + seg.size())) return true;
    }
    failed_.insert({i, pos});
    return false;
  }

  std::string_view released_;
  Preferred preferred_;
  std::vector<std::string_view> segments_;
  std::vector<std::string> replacements_;
  std::set<std::pair<size_t, size_t>> failed_;
};

void WriteText(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << content;
}

std::vector<std::string> EntityTypes(const std::vector<SweepRow>& rows) {
  std::set<std::string> types;
  for (const auto& r : rows) {
    for (const auto& [type, _] : r.loss.per_entity_type) types.insert(type);
  }
  return {types.begin(), types.end()};
}

}  // namespace

void RunConfig::Validate() const {
  if (k < 2) throw ValidationError("k must be at least 2, got " + std::to_string(k));
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ValidationError("lambda must lie in [0, 1]");
  }
  if (entities && entities->empty()) {
    throw ValidationError("entity filter must not be empty");
  }
  if (jobs == 0) throw ValidationError("jobs must be positive");
  weights.Validate();
}

PreparedInput Prepare(const Dataset& dataset, const AnnotationSet& raw,
                      const std::optional<std::set<std::string>>& entities) {
  PreparedInput in;
  in.annotations =
      DetectRedundant(dataset, entities ? raw.FilterEntityTypes(*entities) : raw);
  in.view = BuildPersonView(dataset, in.annotations);
  return in;
}

nlohmann::json AuditReport::ToJson() const {
  return {{"k", k},
          {"classes", classes},
          {"passed", passed()},
          {"size_violations", size_violations},
          {"retention_violations", retention_violations},
          {"format_violations", format_violations}};
}

RunResult Anonymize(const Dataset& dataset, const AnnotationSet& raw,
                    const RunConfig& config) {
  config.Validate();
  RunResult result;
  result.input = Prepare(dataset, raw, config.entities);
  const PersonView& view = result.input.view;
  PartitionOptions options{config.k, config.lambda, config.jobs};
  result.partitions = RunPartitioning(view, config.strategy, options);
  result.classes = RecodePartitions(view, result.partitions.partitions);
  result.release = ExpandRelease(dataset, result.input.annotations, view,
                                 result.classes, {config.drop_direct_id});
  result.loss = ComputeLoss(view, result.classes, config.weights,
                            result.partitions.stats);
  result.audit = EvaluateRelease(result.release, dataset, raw, config).audit;
  return result;
}

Evaluation EvaluateRelease(const Release& release, const Dataset& dataset,
                           const AnnotationSet& raw, const RunConfig& config) {
  Evaluation eval;
  AuditReport& audit = eval.audit;
  audit.k = config.k;
  const Schema& schema = dataset.schema;
  const PreparedInput in = Prepare(dataset, raw, config.entities);
  const PersonView& view = in.view;
  const size_t id_attr = schema.DirectIdentifier();

  std::vector<std::string> without_id;
  for (const auto& h : dataset.header) {
    if (h != schema.attributes[id_attr].name) without_id.push_back(h);
  }
  if (release.header != dataset.header && release.header != without_id) {
    audit.format_violations.push_back("release header does not match the dataset");
    return eval;
  }
  if (release.rows.size() != dataset.size()) {
    audit.format_violations.push_back(
        "release has " + std::to_string(release.rows.size()) + " rows, dataset has " +
        std::to_string(dataset.size()));
    return eval;
  }
  std::vector<std::optional<size_t>> column(schema.attributes.size());
  for (size_t c = 0; c < release.header.size(); ++c) {
    column[*schema.Find(release.header[c])] = c;
  }

  std::vector<size_t> person_of_row(dataset.size());
  for (size_t p = 0; p < view.size(); ++p) {
    for (size_t row : view.records[p].tuple_ids) person_of_row[row] = p;
  }

  // Released quasi cells and readable terms per person.
  std::vector<std::vector<std::string>> cells(view.size());
  std::vector<std::set<TermKey>> retained(view.size());
  for (size_t row = 0; row < dataset.size(); ++row) {
    const CsvRecord& rec = release.rows[row];
    const size_t p = person_of_row[row];
    if (rec.size() != release.header.size()) {
      audit.format_violations.push_back("row " + std::to_string(row) +
                                        " has the wrong number of cells");
      continue;
    }
    std::vector<std::string> row_cells;
    for (const QuasiColumn& q : view.quasi) row_cells.push_back(rec[*column[q.attribute]]);
    if (cells[p].empty()) {
      cells[p] = row_cells;
    } else if (cells[p] != row_cells) {
      audit.format_violations.push_back("person " + view.records[p].pid +
                                        " has differing quasi cells across rows");
    }

    std::span<const SensitiveTerm> row_terms = in.annotations.ForRow(row);
    for (size_t attr : schema.TextualAttributes()) {
      const std::string& name = schema.attributes[attr].name;
      std::vector<SensitiveTerm> spans;
      for (const auto& t : row_terms) {
        if (t.attribute == name) spans.push_back(t);
      }
      auto linked_quasi = [&](const SensitiveTerm& t) {
        size_t q = 0;
        while (q < view.quasi.size() && view.quasi[q].attribute != *t.linked_attribute) ++q;
        return q;
      };
      auto linked_cell = [&](const SensitiveTerm& t) -> std::string {
        size_t q = linked_quasi(t);
        return q < row_cells.size() ? row_cells[q] : std::string();
      };
      const std::string& original = dataset.Cell(row, attr);
      const std::string& released = rec[*column[attr]];
      SpanAligner aligner(original, spans, released,
                          [&](size_t i, std::string_view r) {
                            const SensitiveTerm& t = spans[i];
                            if (r == t.text) return true;
                            if (t.redundant) return r == linked_cell(t);
                            return EqualsIgnoreCase(r, Placeholder(t.entity_type, false));
                          });
      auto replacements = aligner.Align();
      if (!replacements) {
        audit.format_violations.push_back("row " + std::to_string(row) + ", column '" +
                                          name + "': text changed outside annotated spans");
        continue;
      }
      for (size_t i = 0; i < spans.size(); ++i) {
        const SensitiveTerm& t = spans[i];
        const std::string& r = (*replacements)[i];
        if (t.redundant) {
          std::string rendered = linked_cell(t);
          if (r == t.text && !ImpliedByCell(t.text, rendered, view.quasi[linked_quasi(t)].kind)) {
            audit.retention_violations.push_back(
                "row " + std::to_string(row) + ": redundant value '" + t.text +
                "' left in text while its attribute is released as '" + rendered + "'");
          }
          continue;
        }
        const std::string placeholder = Placeholder(t.entity_type, false);
        if (EqualsIgnoreCase(r, placeholder)) continue;
        if (r == t.text) {
          retained[p].insert(t.key());
        } else {
          audit.format_violations.push_back("row " + std::to_string(row) + ": span '" +
                                            t.text + "' replaced by unexpected '" + r + "'");
        }
      }
    }
  }

  // Classes: persons sharing released cells and readable terms.
  std::map<std::pair<std::vector<std::string>, std::vector<TermKey>>, Members> groups;
  std::vector<std::pair<std::vector<std::string>, std::vector<TermKey>>> order;
  for (size_t p = 0; p < view.size(); ++p) {
    auto key = std::make_pair(cells[p],
                              std::vector<TermKey>(retained[p].begin(), retained[p].end()));
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(p);
  }
  audit.classes = groups.size();

  std::vector<EquivalenceClass> classes;
  for (const auto& key : order) {
    const Members& members = groups.at(key);
    const auto& [class_cells, class_terms] = key;
    const std::string pids = JoinPids(view, members);
    if (members.size() < config.k) {
      audit.size_violations.push_back("class " + pids + " has " +
                                      std::to_string(members.size()) + " < k = " +
                                      std::to_string(config.k) + " members");
    }
    for (const TermKey& t : class_terms) {
      if (members.size() < config.k) {
        audit.retention_violations.push_back("term '" + t.ToString() +
                                             "' readable in class " + pids +
                                             " smaller than k");
        continue;
      }
      for (size_t m : members) {
        if (!view.records[m].HasTerm(t)) {
          audit.retention_violations.push_back(
              "term '" + t.ToString() + "' retained in class " + pids +
              " but absent from person " + view.records[m].pid);
        }
      }
    }

    EquivalenceClass cls;
    cls.members = members;
    cls.retained = class_terms;
    for (size_t q = 0; q < view.quasi.size(); ++q) {
      auto cell = class_cells.size() == view.quasi.size()
                      ? ParseRenderedCell(class_cells[q], view.quasi[q].kind,
                                          view.hierarchies[q])
                      : std::nullopt;
      if (!cell) {
        audit.format_violations.push_back("class " + pids + ": cannot parse cell of '" +
                                          view.quasi[q].name + "'");
        cell = Scalar{};
      }
      cls.cells.push_back(std::move(*cell));
    }
    TermRetention retention = DecideTermRetention(view, members);
    for (const TermKey& t : retention.retained) {
      if (!std::binary_search(cls.retained.begin(), cls.retained.end(), t)) {
        cls.suppressed.push_back(t);
      }
    }
    for (const TermKey& t : retention.suppressed) cls.suppressed.push_back(t);
    classes.push_back(std::move(cls));
  }
  eval.loss = ComputeLoss(view, classes, config.weights);
  return eval;
}

Release ReadRelease(const std::string& path) {
  auto records = ReadCsvFile(path);
  if (records.empty()) throw ValidationError("release '" + path + "' has no header");
  Release release;
  release.header = std::move(records.front());
  for (size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() == 1 && records[r].front().empty()) continue;
    release.rows.push_back(std::move(records[r]));
  }
  return release;
}

void WriteArtifacts(const RunResult& result, const RunConfig& config,
                    const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + out_dir + "'");

  WriteText(dir / "release.csv", result.release.ToCsv());
  WriteText(dir / "classes.json",
            ClassReport(result.input.view, result.classes).dump(2) + "\n");
  nlohmann::json loss = result.loss.ToJson();
  loss["audit"] = result.audit.ToJson();
  WriteText(dir / "loss.json", loss.dump(2) + "\n");
  WriteText(dir / "partition_tree.json",
            result.partitions.TreeJson(result.input.view).dump(2) + "\n");

  SweepRow row{config.k,
               config.strategy == Strategy::kMondrian ? std::optional(config.lambda)
                                                      : std::nullopt,
               config.strategy, result.loss};
  WriteText(dir / "loss.csv", SweepCsv({row}));
}

std::vector<SweepRow> RunSweep(const Dataset& dataset, const AnnotationSet& raw,
                               const RunConfig& base, const SweepGrid& grid) {
  base.Validate();
  std::vector<SweepRow> rows;
  for (size_t k : grid.ks) {
    for (Strategy s : grid.strategies) {
      if (s != Strategy::kMondrian) continue;
      for (double lambda : grid.lambdas) rows.push_back({k, lambda, s, {}});
    }
    for (Strategy s : grid.strategies) {
      if (s == Strategy::kGdf) rows.push_back({k, std::nullopt, s, {}});
    }
  }
  for (const SweepRow& row : rows) {
    RunConfig cell = base;
    cell.k = row.k;
    cell.lambda = row.lambda.value_or(base.lambda);
    cell.Validate();
  }

  const PreparedInput in = Prepare(dataset, raw, base.entities);
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (size_t i = next++; i < rows.size(); i = next++) {
      try {
        SweepRow& row = rows[i];
        PartitionOptions options{row.k, row.lambda.value_or(base.lambda), 1};
        PartitionResult parts = RunPartitioning(in.view, row.strategy, options);
        auto classes = RecodePartitions(in.view, parts.partitions);
        row.loss = ComputeLoss(in.view, classes, base.weights, parts.stats);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const size_t threads = std::min(base.jobs, std::max<size_t>(rows.size(), 1));
  std::vector<std::thread> pool;
  for (size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return rows;
}

std::vector<std::string> LossCsvHeader(const std::vector<std::string>& entity_types) {
  std::vector<std::string> header = {
      "k",          "lambda",    "strategy",          "ncp_total",
      "ncp_relational", "ncp_textual", "partitions",   "mean_size",
      "std_size",   "relational_splits", "textual_splits"};
  header.insert(header.end(), entity_types.begin(), entity_types.end());
  return header;
}

CsvRecord LossCsvRow(const SweepRow& row, const std::vector<std::string>& entity_types) {
  const LossReport& l = row.loss;
  CsvRecord out = {std::to_string(row.k),
                   row.lambda ? FormatNumber(*row.lambda) : "",
                   std::string(StrategyName(row.strategy)),
                   FormatNumber(l.ncp_total),
                   FormatNumber(l.ncp_relational),
                   FormatNumber(l.ncp_textual),
                   std::to_string(l.partitions.count),
                   FormatNumber(l.partitions.mean_size),
                   FormatNumber(l.partitions.std_size),
                   std::to_string(l.splits.relational_splits),
                   std::to_string(l.splits.textual_splits)};
  for (const auto& type : entity_types) {
    auto it = l.per_entity_type.find(type);
    out.push_back(FormatNumber(it == l.per_entity_type.end() ? 0.0 : it->second.rate()));
  }
  return out;
}

std::string SweepCsv(const std::vector<SweepRow>& rows) {
  const auto types = EntityTypes(rows);
  std::ostringstream out;
  WriteCsvRecord(out, LossCsvHeader(types));
  for (const auto& row : rows) WriteCsvRecord(out, LossCsvRow(row, types));
  return out.str();
}

}  // namespace rxanon
