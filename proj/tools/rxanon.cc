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

// rxanon: k-anonymization of datasets with relational and textual columns.
//
//   rxanon anonymize --schema S --data D --annotations A --out DIR [options]
//   rxanon sweep     --schema S --data D --annotations A --out DIR
//                    --k-list 2,3,5 --lambda-list 0,0.5,1 --strategy mondrian,gdf
//   rxanon evaluate  --schema S --data D --annotations A --release R [options]
//
// Exit status: 0 success, 2 invalid input or configuration, 3 audit failure.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rxanon/pipeline.h"
#include "rxanon/text.h"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitAudit = 3;

struct Inputs {
  std::string schema;
  std::string data;
  std::string persons;
  std::string annotations;
};

struct Options {
  Inputs in;
  std::string out;
  std::string release;
  size_t k = 2;
  double lambda = 0.5;
  std::string strategy = "mondrian";
  std::string entities;
  double wa = 1.0;
  double wx = 1.0;
  bool drop_direct_id = false;
  size_t jobs = 1;
  std::string k_list;
  std::string lambda_list;
};

void AddInputs(CLI::App* cmd, Options& o) {
  cmd->add_option("--schema", o.in.schema, "Schema JSON")->required();
  cmd->add_option("--data", o.in.data, "Dataset CSV (event table in join mode)")
      ->required();
  cmd->add_option("--persons", o.in.persons,
                  "Person table CSV joined to --data on the direct identifier");
  cmd->add_option("--annotations", o.in.annotations, "Annotations JSONL")->required();
}

void AddCommon(CLI::App* cmd, Options& o) {
  cmd->add_option("--entities", o.entities, "Comma-separated entity types to keep");
  cmd->add_option("--wa", o.wa, "Relational NCP weight");
  cmd->add_option("--wx", o.wx, "Textual NCP weight");
  cmd->add_option("--jobs", o.jobs, "Worker threads");
}

rxanon::Strategy ParseStrategyOrThrow(const std::string& name) {
  auto s = rxanon::ParseStrategy(rxanon::Trim(name));
  if (!s) throw rxanon::ValidationError("unknown strategy '" + name + "'");
  return *s;
}

template <class T>
std::vector<T> ParseList(const std::string& text, const char* flag) {
  std::vector<T> out;
  if (rxanon::Trim(text).empty()) return out;
  for (const std::string& piece : rxanon::SplitString(text, ',')) {
    T value{};
    auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), value);
    if (ec != std::errc() || ptr != piece.data() + piece.size()) {
      throw rxanon::ValidationError(std::string("bad value '") + piece + "' in " + flag);
    }
    out.push_back(value);
  }
  return out;
}

rxanon::RunConfig MakeConfig(const Options& o) {
  rxanon::RunConfig config;
  config.k = o.k;
  config.lambda = o.lambda;
  config.weights = {o.wa, o.wx};
  config.drop_direct_id = o.drop_direct_id;
  config.jobs = o.jobs;
  if (!o.entities.empty()) {
    std::set<std::string> types;
    for (const std::string& t : rxanon::SplitString(o.entities, ',')) {
      if (!t.empty()) types.insert(t);
    }
    config.entities = std::move(types);
  }
  return config;
}

struct Loaded {
  rxanon::Dataset dataset;
  rxanon::AnnotationSet annotations;
};

Loaded Load(const Inputs& in) {
  rxanon::Schema schema = rxanon::Schema::FromFile(in.schema);
  rxanon::Dataset dataset = in.persons.empty()
                                ? rxanon::LoadDataset(in.data, schema)
                                : rxanon::LoadJoinedDataset(in.persons, in.data, schema);
  rxanon::AnnotationSet annotations = rxanon::LoadAnnotations(in.annotations, dataset);
  return {std::move(dataset), std::move(annotations)};
}

void PrintAudit(const rxanon::AuditReport& audit) {
  std::cout << "audit: " << (audit.passed() ? "PASS" : "FAIL") << " (k=" << audit.k
            << ", classes=" << audit.classes << ")\n";
  for (const auto* list :
       {&audit.size_violations, &audit.retention_violations, &audit.format_violations}) {
    for (const auto& v : *list) std::cout << "  " << v << "\n";
  }
}

int RunAnonymize(const Options& o) {
  rxanon::RunConfig config = MakeConfig(o);
  config.strategy = ParseStrategyOrThrow(o.strategy);
  config.Validate();
  Loaded in = Load(o.in);
  rxanon::RunResult result = rxanon::Anonymize(in.dataset, in.annotations, config);
  rxanon::WriteArtifacts(result, config, o.out);
  std::cout << "persons=" << result.input.view.size()
            << " partitions=" << result.loss.partitions.count
            << " ncp=" << rxanon::FormatNumber(result.loss.ncp_total) << "\n";
  PrintAudit(result.audit);
  return result.audit.passed() ? 0 : kExitAudit;
}

int RunSweep(const Options& o) {
  rxanon::RunConfig base = MakeConfig(o);
  rxanon::SweepGrid grid;
  grid.ks = ParseList<size_t>(o.k_list, "--k-list");
  grid.lambdas = ParseList<double>(o.lambda_list, "--lambda-list");
  for (const std::string& s : rxanon::SplitString(o.strategy, ',')) {
    grid.strategies.push_back(ParseStrategyOrThrow(s));
  }
  if (grid.ks.empty()) throw rxanon::ValidationError("--k-list must not be empty");
  base.Validate();
  for (double l : grid.lambdas) {
    if (!(l >= 0.0 && l <= 1.0)) throw rxanon::ValidationError("lambda must lie in [0, 1]");
  }
  Loaded in = Load(o.in);
  auto rows = rxanon::RunSweep(in.dataset, in.annotations, base, grid);
  std::filesystem::create_directories(o.out);
  const auto path = std::filesystem::path(o.out) / "sweep.csv";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rxanon::ValidationError("cannot write '" + path.string() + "'");
  out << rxanon::SweepCsv(rows);
  std::cout << "rows=" << rows.size() << " -> " << path.string() << "\n";
  return 0;
}

int RunEvaluate(const Options& o) {
  rxanon::RunConfig config = MakeConfig(o);
  config.Validate();
  Loaded in = Load(o.in);
  rxanon::Release release = rxanon::ReadRelease(o.release);
  rxanon::Evaluation eval =
      rxanon::EvaluateRelease(release, in.dataset, in.annotations, config);
  if (!o.out.empty()) {
    std::filesystem::create_directories(o.out);
    nlohmann::json report = eval.loss.ToJson();
    report["audit"] = eval.audit.ToJson();
    std::ofstream out(std::filesystem::path(o.out) / "evaluation.json", std::ios::binary);
    out << report.dump(2) << "\n";
  }
  std::cout << "ncp=" << rxanon::FormatNumber(eval.loss.ncp_total) << "\n";
  PrintAudit(eval.audit);
  return eval.audit.passed() ? 0 : kExitAudit;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-anonymization of relational and textual data"};
  app.require_subcommand(1);
  Options o;

  CLI::App* anonymize = app.add_subcommand("anonymize", "Anonymize a dataset");
  AddInputs(anonymize, o);
  AddCommon(anonymize, o);
  anonymize->add_option("--out", o.out, "Output directory")->required();
  anonymize->add_option("--k", o.k, "Minimum class size");
  anonymize->add_option("--lambda", o.lambda, "Relational vs textual split weight");
  anonymize->add_option("--strategy", o.strategy, "mondrian or gdf");
  anonymize->add_flag("--drop-direct-id", o.drop_direct_id,
                      "Omit the direct identifier column from the release");

  CLI::App* sweep = app.add_subcommand("sweep", "Loss over a k x lambda x strategy grid");
  AddInputs(sweep, o);
  AddCommon(sweep, o);
  sweep->add_option("--out", o.out, "Output directory")->required();
  sweep->add_option("--k-list", o.k_list, "Comma-separated k values")->required();
  sweep->add_option("--lambda-list", o.lambda_list, "Comma-separated lambda values");
  sweep->add_option("--strategy", o.strategy, "Comma-separated strategies");

  CLI::App* evaluate = app.add_subcommand("evaluate", "Audit an existing release");
  AddInputs(evaluate, o);
  AddCommon(evaluate, o);
  evaluate->add_option("--release", o.release, "Release CSV")->required();
  evaluate->add_option("--k", o.k, "Minimum class size");
  evaluate->add_option("--out", o.out, "Directory for evaluation.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*anonymize) return RunAnonymize(o);
    if (*sweep) return RunSweep(o);
    return RunEvaluate(o);
  } catch (const rxanon::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
