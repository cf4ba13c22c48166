#include "finprog/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "finprog/numeric.hpp"

namespace finprog {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cell_to_string(const json& cell) {
  if (cell.is_string()) return cell.get<std::string>();
  if (cell.is_number()) return format_number(cell.get<double>());
  if (cell.is_boolean()) return cell.get<bool>() ? "yes" : "no";
  if (cell.is_null()) return "";
  return cell.dump();
}

std::vector<std::string> string_array(const json& j) {
  std::vector<std::string> out;
  if (!j.is_array()) return out;
  out.reserve(j.size());
  for (const auto& el : j) out.push_back(cell_to_string(el));
  return out;
}

std::ifstream open_for_read(const std::string& path) {
  if (!fs::exists(path))
    throw Error(ErrorKind::FileNotFound, "no such file: " + path);
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::IoError, "cannot read " + path);
  return in;
}

json parse_json_line(const std::string& path, std::size_t line_number,
                     const std::string& line) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaViolation,
                path + ":" + std::to_string(line_number) + ": " + e.what());
  }
}

const json& require_field(const json& j, const char* name,
                          const std::string& where) {
  const auto it = j.find(name);
  if (it == j.end())
    throw Error(ErrorKind::SchemaViolation,
                where + ": missing field \"" + name + "\"");
  return *it;
}

std::string require_string(const json& j, const char* name,
                           const std::string& where) {
  const json& field = require_field(j, name, where);
  if (!field.is_string())
    throw Error(ErrorKind::SchemaViolation,
                where + ": field \"" + name + "\" must be a string");
  return field.get<std::string>();
}

}  // namespace

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in = open_for_read(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaViolation, path + ": " + e.what());
  }
}

LoadResult load_dataset(const std::string& path) {
  const json doc = read_json_file(path);
  if (!doc.is_array())
    throw Error(ErrorKind::SchemaViolation,
                path + ": dataset must be a JSON array of records");

  LoadResult result;
  std::set<std::string> seen_ids;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& item = doc[i];
    const std::string where = path + "[" + std::to_string(i) + "]";
    try {
      if (!item.is_object())
        throw Error(ErrorKind::SchemaViolation, where + ": record must be an object");
      DatasetRecord record;
      record.id = require_string(item, "id", where);
      if (record.id.empty())
        throw Error(ErrorKind::SchemaViolation, where + ": empty id");

      if (item.contains("pre_text")) record.pre_text = string_array(item["pre_text"]);
      if (item.contains("post_text")) record.post_text = string_array(item["post_text"]);
      if (item.contains("table") && item["table"].is_array())
        for (const auto& row : item["table"]) record.table.push_back(string_array(row));

      const json& qa = require_field(item, "qa", where);
      if (!qa.is_object())
        throw Error(ErrorKind::SchemaViolation, where + ": qa must be an object");
      record.qa.question = require_string(qa, "question", where);
      record.qa.program = require_string(qa, "program", where);
      const json& ans = require_field(qa, "exe_ans", where);
      if (ans.is_number())
        record.qa.exe_ans = ans.get<double>();
      else if (ans.is_string())
        record.qa.exe_ans = ans.get<std::string>();
      else if (ans.is_boolean())
        record.qa.exe_ans = std::string(ans.get<bool>() ? "yes" : "no");
      else
        throw Error(ErrorKind::SchemaViolation,
                    where + ": exe_ans must be a number or a string");
      if (qa.contains("gold_inds") && qa["gold_inds"].is_object())
        for (const auto& [key, value] : qa["gold_inds"].items())
          record.qa.gold_inds[key] = cell_to_string(value);

      if (!seen_ids.insert(record.id).second)
        result.issues.push_back({i, record.id, "duplicate id"});
      try {
        parse_program_text(record.qa.program);
      } catch (const Error& e) {
        result.issues.push_back(
            {i, record.id, std::string("gold program does not parse: ") + e.what()});
      }
      result.records.push_back(std::move(record));
    } catch (const Error& e) {
      std::string id;
      if (item.is_object() && item.contains("id") && item["id"].is_string())
        id = item["id"].get<std::string>();
      result.issues.push_back({i, id, e.what()});
    }
  }
  return result;
}

Environment environment_for(const DatasetRecord& record,
                            const NumericConfig& cfg) {
  return Environment::from_table(record.table, cfg);
}

GoldExample gold_example_for(const DatasetRecord& record,
                             const NumericConfig& cfg) {
  GoldExample example;
  example.example_id = record.id;
  try {
    example.program = parse_program_text(record.qa.program);
  } catch (const Error&) {
    example.program.reset();
  }
  if (const auto* number = std::get_if<double>(&record.qa.exe_ans))
    example.answer = *number;
  else
    example.answer = std::get<std::string>(record.qa.exe_ans);
  example.env = environment_for(record, cfg);
  return example;
}

ReportText report_text_for(const DatasetRecord& record) {
  return {record.pre_text, record.table, record.post_text};
}

AuditExample audit_example_for(const DatasetRecord& record, int origin) {
  AuditExample example;
  example.id = record.id;
  example.question = record.qa.question;
  example.table_row_count = record.table.size() > 1 ? record.table.size() - 1 : 0;
  try {
    example.fact_count = extract_facts(report_text_for(record)).size();
  } catch (const Error&) {
    example.fact_count = 0;
  }
  example.origin = origin;
  return example;
}

std::vector<ScoreRecord> load_score_records(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::vector<ScoreRecord> records;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    const json j = parse_json_line(path, line_number, line);
    const std::string where = path + ":" + std::to_string(line_number);
    ScoreRecord record;
    record.example_id = require_string(j, "example_id", where);
    record.model = require_string(j, "model", where);
    const json& scores = require_field(j, "fact_scores", where);
    if (!scores.is_object())
      throw Error(ErrorKind::SchemaViolation,
                  where + ": fact_scores must be an object");
    for (const auto& [fact, value] : scores.items()) {
      ScoreEntry entry;
      if (value.is_number()) {
        entry.score = value.get<double>();
      } else if (value.is_object() && value.contains("start") &&
                 value.contains("end") && value["start"].is_number() &&
                 value["end"].is_number()) {
        entry.has_start_end = true;
        entry.start = value["start"].get<double>();
        entry.end = value["end"].get<double>();
      } else {
        throw Error(ErrorKind::SchemaViolation,
                    where + ": score for \"" + fact +
                        "\" must be a number or {start, end}");
      }
      record.fact_scores[fact] = entry;
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<VoteCandidate> load_candidates(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::vector<VoteCandidate> candidates;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    const json j = parse_json_line(path, line_number, line);
    const std::string where = path + ":" + std::to_string(line_number);
    VoteCandidate candidate;
    candidate.example_id = require_string(j, "example_id", where);
    candidate.model = require_string(j, "model", where);
    candidate.program = require_string(j, "program", where);
    const json& weight = require_field(j, "model_weight", where);
    if (!weight.is_number())
      throw Error(ErrorKind::SchemaViolation,
                  where + ": model_weight must be a number");
    candidate.model_weight = weight.get<double>();
    if (!(candidate.model_weight > 0.0) || candidate.model_weight > 1.0)
      throw Error(ErrorKind::SchemaViolation,
                  where + ": model_weight must be in (0, 1]");
    candidates.push_back(std::move(candidate));
  }
  return candidates;
}

std::vector<GeneratorPrediction> load_predictions(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::vector<GeneratorPrediction> predictions;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    const json j = parse_json_line(path, line_number, line);
    const std::string where = path + ":" + std::to_string(line_number);
    GeneratorPrediction prediction;
    prediction.example_id = require_string(j, "example_id", where);
    prediction.program = require_string(j, "program", where);
    if (j.contains("model") && j["model"].is_string())
      prediction.model = j["model"].get<std::string>();
    predictions.push_back(std::move(prediction));
  }
  return predictions;
}

json model_to_json(const LRModel& model) {
  return json{{"weights", model.weights},
              {"bias", model.bias},
              {"meta",
               {{"iterations", model.meta.iterations},
                {"final_loss", model.meta.final_loss},
                {"l2_lambda", model.meta.l2_lambda},
                {"seed", model.meta.seed},
                {"feature_names", model.meta.feature_names},
                {"imputed_scores", model.meta.imputed_scores}}}};
}

LRModel model_from_json(const json& j) {
  LRModel model;
  try {
    model.weights = j.at("weights").get<std::vector<double>>();
    model.bias = j.at("bias").get<double>();
    if (j.contains("meta")) {
      const json& meta = j["meta"];
      model.meta.iterations = meta.value("iterations", std::size_t{0});
      model.meta.final_loss = meta.value("final_loss", 0.0);
      model.meta.l2_lambda = meta.value("l2_lambda", 0.0);
      model.meta.seed = meta.value("seed", std::uint64_t{0});
      if (meta.contains("feature_names"))
        model.meta.feature_names =
            meta["feature_names"].get<std::vector<std::string>>();
      model.meta.imputed_scores = meta.value("imputed_scores", std::size_t{0});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaViolation,
                std::string("bad model file: ") + e.what());
  }
  return model;
}

LRModel load_model(const std::string& path) {
  return model_from_json(read_json_file(path));
}

void write_text_atomic(const std::string& path, const std::string& text) {
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out)
      throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
    out << text;
    if (!out)
      throw Error(ErrorKind::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec)
    throw Error(ErrorKind::IoError,
                "cannot move " + tmp.string() + " to " + path);
}

void write_json_atomic(const std::string& path, const json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

void write_jsonl_atomic(const std::string& path,
                        const std::vector<json>& lines) {
  std::ostringstream out;
  for (const auto& line : lines) out << line.dump() << "\n";
  write_text_atomic(path, out.str());
}

}  // namespace finprog
