#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "finprog/adversarial.hpp"
#include "finprog/evaluation.hpp"
#include "finprog/fusion.hpp"
#include "finprog/retriever.hpp"

namespace finprog {

// File formats: datasets are JSON arrays of records; scores, candidates
// and predictions are JSON lines. All UTF-8.

struct DatasetRecord {
  std::string id;
  std::vector<std::string> pre_text;
  std::vector<std::string> post_text;
  std::vector<std::vector<std::string>> table;  // first row is the header
  struct QA {
    std::string question;
    std::string program;
    std::variant<double, std::string> exe_ans;
    std::map<std::string, std::string> gold_inds;  // fact id -> fact text
  } qa;
};

struct LoadIssue {
  std::size_t index = 0;  // position in the file's array
  std::string id;         // when known
  std::string message;
};

struct LoadResult {
  std::vector<DatasetRecord> records;
  std::vector<LoadIssue> issues;
};

// Reads and validates a dataset file. Records missing required fields are
// dropped and reported; records whose gold program does not parse are kept
// and reported. Errors: FileNotFound, SchemaViolation (file is not a JSON
// array of objects).
LoadResult load_dataset(const std::string& path);

Environment environment_for(const DatasetRecord& record,
                            const NumericConfig& cfg = {});
GoldExample gold_example_for(const DatasetRecord& record,
                             const NumericConfig& cfg = {});
ReportText report_text_for(const DatasetRecord& record);
AuditExample audit_example_for(const DatasetRecord& record, int origin);

// Score files: one JSON object per line,
//   {"example_id": ..., "model": ..., "fact_scores": {"text_0": 0.7}}
// or start/end form {"text_0": {"start": 0.2, "end": 0.3}}.
std::vector<ScoreRecord> load_score_records(const std::string& path);

// Candidate files: {"example_id", "model", "program", "model_weight"}.
std::vector<VoteCandidate> load_candidates(const std::string& path);

// Prediction files: {"example_id", "program"} per line.
std::vector<GeneratorPrediction> load_predictions(const std::string& path);

nlohmann::json model_to_json(const LRModel& model);
LRModel model_from_json(const nlohmann::json& j);
LRModel load_model(const std::string& path);

nlohmann::json read_json_file(const std::string& path);

// Writes via a temp file in the same directory plus a rename, so readers
// never observe a half-written file.
void write_text_atomic(const std::string& path, const std::string& text);
void write_json_atomic(const std::string& path, const nlohmann::json& j);
void write_jsonl_atomic(const std::string& path,
                        const std::vector<nlohmann::json>& lines);

}  // namespace finprog
