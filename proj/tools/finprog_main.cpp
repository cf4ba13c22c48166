// finprog: reasoning-program DSL tools, retrieval/generation evaluation,
// score stacking, program voting and the adversarial dataset re-split.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "finprog/adversarial.hpp"
#include "finprog/dataset.hpp"
#include "finprog/evaluation.hpp"
#include "finprog/executor.hpp"
#include "finprog/fusion.hpp"
#include "finprog/numeric.hpp"
#include "finprog/program.hpp"
#include "finprog/retriever.hpp"

using namespace finprog;
using nlohmann::json;

namespace {

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("FINPROG_LOG");
    if (!env) return 1;
    const std::string value = lower_collapse(env);
    if (value == "debug") return 3;
    if (value == "info") return 2;
    if (value == "warn" || value == "warning") return 1;
    if (value == "error") return 0;
    return 1;
  }();
  return level;
}

void log_info(const std::string& message) {
  if (log_level() >= 2) std::fprintf(stderr, "[finprog] %s\n", message.c_str());
}

void log_warn(const std::string& message) {
  if (log_level() >= 1)
    std::fprintf(stderr, "[finprog] warning: %s\n", message.c_str());
}

EquivalenceMode parse_mode(const std::string& text) {
  if (text == "strict") return EquivalenceMode::strict;
  if (text == "commutative") return EquivalenceMode::commutative;
  throw Error(ErrorKind::SchemaViolation,
              "--mode must be strict or commutative, got \"" + text + "\"");
}

std::vector<std::size_t> parse_k_list(const std::string& text) {
  std::vector<std::size_t> ks;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    const int k = std::atoi(current.c_str());
    if (k <= 0)
      throw Error(ErrorKind::SchemaViolation,
                  "--k entries must be positive integers, got \"" + current +
                      "\"");
    ks.push_back(static_cast<std::size_t>(k));
    current.clear();
  };
  for (const char c : text) {
    if (c == ',') flush();
    else if (!std::isspace(static_cast<unsigned char>(c))) current.push_back(c);
  }
  flush();
  if (ks.empty())
    throw Error(ErrorKind::SchemaViolation, "--k list is empty");
  return ks;
}

LoadResult load_dataset_logged(const std::string& path) {
  LoadResult result = load_dataset(path);
  std::fprintf(stderr, "[finprog] dataset %s: %zu records, %zu issues\n",
               path.c_str(), result.records.size(), result.issues.size());
  for (const auto& issue : result.issues)
    log_warn(path + "[" + std::to_string(issue.index) + "] " +
             (issue.id.empty() ? "" : issue.id + ": ") + issue.message);
  return result;
}

std::map<std::string, std::set<std::string>> gold_fact_ids(
    const std::vector<DatasetRecord>& records) {
  std::map<std::string, std::set<std::string>> gold;
  for (const auto& record : records) {
    auto& ids = gold[record.id];
    for (const auto& [fact_id, text] : record.qa.gold_inds) ids.insert(fact_id);
  }
  return gold;
}

// Score records grouped by model, then example.
std::map<std::string, std::vector<ScoreRecord>> records_by_model(
    const std::vector<std::string>& paths) {
  std::map<std::string, std::vector<ScoreRecord>> by_model;
  for (const auto& path : paths) {
    for (auto& record : load_score_records(path))
      by_model[record.model].push_back(std::move(record));
  }
  return by_model;
}

Environment environment_from_json(const json& spec, const NumericConfig& cfg) {
  Environment env;
  env.numeric = cfg;
  if (spec.contains("table")) {
    const json& table = spec["table"];
    if (table.is_array()) {
      std::vector<std::vector<std::string>> rows;
      for (const auto& row : table) {
        std::vector<std::string> cells;
        for (const auto& cell : row)
          cells.push_back(cell.is_string() ? cell.get<std::string>()
                                           : format_number(cell.get<double>()));
        rows.push_back(std::move(cells));
      }
      env = Environment::from_table(rows, cfg);
    } else if (table.is_object()) {
      for (const auto& [name, cells] : table.items()) {
        std::vector<std::string> values;
        for (const auto& cell : cells)
          values.push_back(cell.is_string() ? cell.get<std::string>()
                                            : format_number(cell.get<double>()));
        env.add_row(name, std::move(values));
      }
    }
  }
  if (spec.contains("constants"))
    for (const auto& [name, value] : spec["constants"].items())
      env.set_constant(name, value.get<double>());
  return env;
}

json metrics_to_json(const RetrieverMetrics& metrics) {
  json recall = json::object(), precision = json::object();
  for (const auto& [k, v] : metrics.recall_at) recall[std::to_string(k)] = v;
  for (const auto& [k, v] : metrics.precision_at)
    precision[std::to_string(k)] = v;
  return json{{"recall_at", recall},
              {"precision_at", precision},
              {"n", metrics.n},
              {"skipped_empty_gold", metrics.skipped}};
}

void emit_report(const std::string& path, const json& report) {
  if (path.empty()) return;
  write_json_atomic(path, report);
  log_info("wrote " + path);
}

// ---------------------------------------------------------------------------

struct ExecOptions {
  std::string program;
  std::string env_path;
  std::string env_inline;
  double abs_tol = 1e-5, rel_tol = 1e-5;
};

void run_exec(const ExecOptions& options) {
  NumericConfig cfg;
  cfg.abs_tol = options.abs_tol;
  cfg.rel_tol = options.rel_tol;
  Environment env;
  env.numeric = cfg;
  if (!options.env_path.empty())
    env = environment_from_json(read_json_file(options.env_path), cfg);
  if (!options.env_inline.empty()) {
    try {
      env = environment_from_json(json::parse(options.env_inline), cfg);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::SchemaViolation,
                  std::string("--env-json: ") + e.what());
    }
  }

  const Program program = parse_program_text(options.program);
  const ExecutionResult result = execute_program(program, env);
  std::cout << result.value.to_string() << "\n";
  for (const auto& entry : result.trace)
    std::cout << "step " << entry.index << ": " << entry.op << "(" << entry.lhs
              << ", " << entry.rhs << ") = " << entry.result.to_string()
              << "\n";
}

struct EvalGenOptions {
  std::string dataset, predictions, out;
  std::string mode = "commutative";
  double abs_tol = 1e-5, rel_tol = 1e-5;
};

void run_eval_gen(const EvalGenOptions& options) {
  const EquivalenceMode mode = parse_mode(options.mode);
  NumericConfig cfg;
  cfg.abs_tol = options.abs_tol;
  cfg.rel_tol = options.rel_tol;

  const LoadResult loaded = load_dataset_logged(options.dataset);
  std::vector<GoldExample> gold;
  gold.reserve(loaded.records.size());
  for (const auto& record : loaded.records)
    gold.push_back(gold_example_for(record, cfg));
  const auto preds = load_predictions(options.predictions);

  const GeneratorMetrics metrics = evaluate_generator(preds, gold, cfg, mode);

  json per_example = json::array();
  for (const auto& outcome : metrics.per_example)
    per_example.push_back({{"example_id", outcome.example_id},
                           {"exec_ok", outcome.exec_ok},
                           {"prog_ok", outcome.prog_ok},
                           {"mismatch_class",
                            mismatch_class_name(outcome.mismatch)}});
  const json report{
      {"command", "eval-gen"},
      {"config",
       {{"dataset", options.dataset},
        {"predictions", options.predictions},
        {"mode", options.mode},
        {"abs_tol", cfg.abs_tol},
        {"rel_tol", cfg.rel_tol}}},
      {"metrics",
       {{"exec_acc", metrics.exec_acc},
        {"prog_acc", metrics.prog_acc},
        {"prog_acc_strict", metrics.prog_acc_strict},
        {"prog_acc_commutative", metrics.prog_acc_commutative},
        {"n", metrics.n}}},
      {"per_example", per_example},
      {"mismatch_histogram", metrics.mismatch_histogram},
      {"load_issues", loaded.issues.size()}};
  emit_report(options.out, report);

  std::printf("exec_acc=%.4f prog_acc=%.4f (strict=%.4f commutative=%.4f) n=%zu\n",
              metrics.exec_acc, metrics.prog_acc, metrics.prog_acc_strict,
              metrics.prog_acc_commutative, metrics.n);
}

struct EvalRetOptions {
  std::string dataset, out;
  std::vector<std::string> scores;
  std::string k_list = "3,5";
};

void run_eval_ret(const EvalRetOptions& options) {
  const std::vector<std::size_t> ks = parse_k_list(options.k_list);
  const LoadResult loaded = load_dataset_logged(options.dataset);
  const auto gold = gold_fact_ids(loaded.records);
  const auto by_model = records_by_model(options.scores);
  if (by_model.empty())
    throw Error(ErrorKind::SchemaViolation, "score files contain no records");

  json models = json::object();
  for (const auto& [model, records] : by_model) {
    std::map<std::string, std::vector<std::string>> rankings;
    for (const auto& record : records) {
      if (!gold.count(record.example_id))
        throw Error(ErrorKind::DatasetIdMismatch,
                    "scores reference unknown example \"" + record.example_id +
                        "\"");
      std::map<std::string, double> scores;
      for (const auto& [fact, entry] : record.fact_scores)
        scores[fact] = entry.effective();
      rankings[record.example_id] = rank_and_select(scores, scores.size());
    }
    const RetrieverMetrics metrics = evaluate_retriever(rankings, gold, ks);
    models[model] = metrics_to_json(metrics);

    std::printf("model=%s n=%zu", model.c_str(), metrics.n);
    for (const std::size_t k : ks)
      std::printf(" recall@%zu=%.4f precision@%zu=%.4f", k,
                  metrics.recall_at.at(k), k, metrics.precision_at.at(k));
    std::printf("\n");
  }

  const json report{{"command", "eval-ret"},
                    {"config",
                     {{"dataset", options.dataset},
                      {"scores", options.scores},
                      {"k", options.k_list}}},
                    {"models", models},
                    {"load_issues", loaded.issues.size()}};
  emit_report(options.out, report);
}

struct StackTrainOptions {
  std::string dataset, out;
  std::vector<std::string> scores;
  double learning_rate = 0.1, l2 = 1e-4;
  std::size_t iterations = 2000;
  std::uint64_t seed = 42;
};

void run_stack_train(const StackTrainOptions& options) {
  const LoadResult loaded = load_dataset_logged(options.dataset);
  const auto gold = gold_fact_ids(loaded.records);
  std::vector<ScoreRecord> records;
  for (const auto& path : options.scores)
    for (auto& record : load_score_records(path))
      records.push_back(std::move(record));

  LRHyper hyper;
  hyper.learning_rate = options.learning_rate;
  hyper.l2_lambda = options.l2;
  hyper.iterations = options.iterations;
  hyper.seed = options.seed;
  const LRModel model = stack_train(records, gold, hyper);
  if (model.meta.imputed_scores > 0)
    log_warn(std::to_string(model.meta.imputed_scores) +
             " missing scores imputed as 0.0");

  write_json_atomic(options.out, model_to_json(model));
  std::printf("trained stacker over %zu models, final_loss=%.6f, seed=%llu\n",
              model.weights.size(), model.meta.final_loss,
              static_cast<unsigned long long>(model.meta.seed));
}

struct StackApplyOptions {
  std::string model, out, scores_out, dataset, report;
  std::vector<std::string> scores;
  std::size_t k = 3;
  bool positive = false;
  double threshold = 0.5;
};

void run_stack_apply(const StackApplyOptions& options) {
  const LRModel model = load_model(options.model);

  // regroup records per example
  std::map<std::string, std::vector<ScoreRecord>> per_example;
  for (const auto& path : options.scores)
    for (auto& record : load_score_records(path))
      per_example[record.example_id].push_back(std::move(record));
  if (per_example.empty())
    throw Error(ErrorKind::SchemaViolation, "score files contain no records");

  std::vector<json> selection_lines, fused_lines;
  std::map<std::string, std::vector<std::string>> rankings;
  std::map<std::string, std::vector<std::string>> selections;
  for (const auto& [example_id, records] : per_example) {
    const FusedSelection fused =
        stack_rank(model, records, options.k, options.positive,
                   options.threshold);
    rankings[example_id] = fused.ranked_fact_ids;
    selections[example_id] = fused.selected;
    selection_lines.push_back({{"example_id", example_id},
                               {"ranked_fact_ids", fused.ranked_fact_ids},
                               {"fused_scores", fused.fused_scores},
                               {"selected", fused.selected}});
    if (!options.scores_out.empty()) {
      json scores = json::object();
      for (const auto& [fact, p] : fused.fused_scores) scores[fact] = p;
      fused_lines.push_back({{"example_id", example_id},
                             {"model", "stack"},
                             {"fact_scores", scores}});
    }
  }
  if (!options.out.empty()) {
    write_jsonl_atomic(options.out, selection_lines);
    log_info("wrote " + options.out);
  }
  if (!options.scores_out.empty()) {
    write_jsonl_atomic(options.scores_out, fused_lines);
    log_info("wrote " + options.scores_out);
  }
  std::printf("fused %zu examples (k=%zu%s)\n", per_example.size(), options.k,
              options.positive ? ", positive filter" : "");

  if (options.dataset.empty()) return;
  const LoadResult loaded = load_dataset_logged(options.dataset);
  const auto gold = gold_fact_ids(loaded.records);
  const RetrieverMetrics rank_metrics =
      evaluate_retriever(rankings, gold, {options.k});

  double precision_sum = 0.0, recall_sum = 0.0;
  std::size_t counted = 0;
  for (const auto& [example_id, selected] : selections) {
    const auto it = gold.find(example_id);
    if (it == gold.end() || it->second.empty()) continue;
    const SelectionMetrics sm = selection_metrics(selected, it->second);
    precision_sum += sm.precision;
    recall_sum += sm.recall;
    ++counted;
  }
  const double denom = counted ? static_cast<double>(counted) : 1.0;
  const json report{
      {"command", "stack-apply"},
      {"config",
       {{"model", options.model},
        {"k", options.k},
        {"positive", options.positive},
        {"threshold", options.threshold}}},
      {"ranking", metrics_to_json(rank_metrics)},
      {"selection",
       {{"precision", precision_sum / denom},
        {"recall", recall_sum / denom},
        {"n", counted}}}};
  emit_report(options.report, report);
  std::printf("selection precision=%.4f recall=%.4f n=%zu\n",
              precision_sum / denom, recall_sum / denom, counted);
}

struct VoteOptions {
  std::string candidates, out, report, dataset;
  std::string mode = "commutative";
  std::string group_by = "program";
};

void run_vote(const VoteOptions& options) {
  const EquivalenceMode mode = parse_mode(options.mode);
  if (options.group_by != "program" && options.group_by != "answer")
    throw Error(ErrorKind::SchemaViolation,
                "--group-by must be program or answer");
  const bool by_answer = options.group_by == "answer";
  if (by_answer && options.dataset.empty())
    throw Error(ErrorKind::SchemaViolation,
                "--group-by answer needs --dataset for the environments");

  std::map<std::string, Environment> envs;
  if (by_answer) {
    const LoadResult loaded = load_dataset_logged(options.dataset);
    for (const auto& record : loaded.records)
      envs.emplace(record.id, environment_for(record));
  }

  std::map<std::string, std::vector<VoteCandidate>> per_example;
  for (auto& candidate : load_candidates(options.candidates))
    per_example[candidate.example_id].push_back(std::move(candidate));
  if (per_example.empty())
    throw Error(ErrorKind::SchemaViolation, "candidate file is empty");

  std::vector<json> lines;
  json details = json::array();
  for (const auto& [example_id, candidates] : per_example) {
    VoteResult result;
    if (by_answer) {
      const auto it = envs.find(example_id);
      if (it == envs.end())
        throw Error(ErrorKind::DatasetIdMismatch,
                    "candidates reference unknown example \"" + example_id +
                        "\"");
      result = weighted_vote_by_answer(candidates, it->second);
    } else {
      result = weighted_vote_detail(candidates, mode);
    }
    lines.push_back({{"example_id", example_id}, {"program", result.program}});
    details.push_back({{"example_id", example_id},
                       {"program", result.program},
                       {"group_weight", result.score},
                       {"candidates", candidates.size()}});
  }
  if (!options.out.empty()) {
    write_jsonl_atomic(options.out, lines);
    log_info("wrote " + options.out);
  }
  emit_report(options.report, json{{"command", "vote"},
                                   {"config",
                                    {{"candidates", options.candidates},
                                     {"mode", options.mode},
                                     {"group_by", options.group_by}}},
                                   {"per_example", details}});
  std::printf("voted %zu examples\n", per_example.size());
}

struct AdvSplitOptions {
  std::vector<std::string> train;
  std::string test, out;
  std::size_t valid_size = 900, folds = 5, hash_dim = 4096, iterations = 2000;
  double learning_rate = 0.1, l2 = 1e-4;
  std::uint64_t seed = 42;
};

void run_adv_split(const AdvSplitOptions& options) {
  std::vector<AuditExample> pool;
  std::vector<std::string> pool_ids;
  for (const auto& path : options.train) {
    const LoadResult loaded = load_dataset_logged(path);
    for (const auto& record : loaded.records) {
      pool.push_back(audit_example_for(record, 0));
      pool_ids.push_back(record.id);
    }
  }
  const LoadResult test_loaded = load_dataset_logged(options.test);
  for (const auto& record : test_loaded.records)
    pool.push_back(audit_example_for(record, 1));

  FeatureConfig cfg;
  cfg.hash_dim = options.hash_dim;
  cfg.seed = options.seed;
  LRHyper hyper;
  hyper.learning_rate = options.learning_rate;
  hyper.l2_lambda = options.l2;
  hyper.iterations = options.iterations;
  hyper.seed = options.seed;

  const AuditResult audit = adversarial_audit(pool, cfg, options.folds, hyper);
  const SplitAssignment assignment =
      resplit(pool_ids, audit, options.valid_size, options.seed);

  const json report{
      {"command", "adv-split"},
      {"config",
       {{"train", options.train},
        {"test", options.test},
        {"valid_size", options.valid_size},
        {"folds", options.folds},
        {"hash_dim", options.hash_dim},
        {"iterations", options.iterations},
        {"seed", options.seed}}},
      {"valid_ids", assignment.valid_ids},
      {"train_ids", assignment.train_ids},
      {"train_auc", audit.train_auc},
      {"heldout_auc", audit.heldout_auc},
      {"fold_count", audit.fold_count},
      {"pool_size", pool_ids.size()},
      {"test_size", test_loaded.records.size()}};
  emit_report(options.out, report);
  std::printf("valid=%zu train=%zu train_auc=%.4f heldout_auc=%.4f seed=%llu\n",
              assignment.valid_ids.size(), assignment.train_ids.size(),
              audit.train_auc, audit.heldout_auc,
              static_cast<unsigned long long>(options.seed));
}

struct ExtractFactsOptions {
  std::string dataset, out;
  std::string table_ids = "data";
};

void run_extract_facts(const ExtractFactsOptions& options) {
  TableIdScheme scheme;
  if (options.table_ids == "data") scheme = TableIdScheme::data_rows_from_zero;
  else if (options.table_ids == "raw") scheme = TableIdScheme::raw_row_index;
  else
    throw Error(ErrorKind::SchemaViolation, "--table-ids must be data or raw");

  const LoadResult loaded = load_dataset_logged(options.dataset);
  std::vector<json> lines;
  std::size_t total_facts = 0, misaligned_examples = 0;
  for (const auto& record : loaded.records) {
    json facts = json::array();
    std::set<std::string> ids;
    try {
      for (const auto& fact : extract_facts(report_text_for(record), scheme)) {
        ids.insert(fact.fact_id);
        facts.push_back({{"fact_id", fact.fact_id},
                         {"origin", fact_origin_name(fact.origin)},
                         {"ordinal", fact.ordinal},
                         {"text", fact.text}});
      }
    } catch (const Error& e) {
      log_warn(record.id + ": " + e.what());
    }
    total_facts += facts.size();

    // gold_inds keys must resolve to extracted fact ids
    json missing = json::array();
    for (const auto& [gold_id, text] : record.qa.gold_inds)
      if (!ids.count(gold_id)) missing.push_back(gold_id);
    if (!missing.empty()) ++misaligned_examples;
    lines.push_back({{"example_id", record.id},
                     {"facts", facts},
                     {"gold_alignment", {{"missing", missing}}}});
  }
  if (!options.out.empty()) {
    write_jsonl_atomic(options.out, lines);
    log_info("wrote " + options.out);
  }
  std::printf("extracted %zu facts from %zu examples; "
              "%zu examples have unmatched gold ids\n",
              total_facts, loaded.records.size(), misaligned_examples);
}

struct OverlapOptions {
  std::string hits, out;
};

void run_overlap(const OverlapOptions& options) {
  const json doc = read_json_file(options.hits);
  if (!doc.is_object())
    throw Error(ErrorKind::SchemaViolation,
                options.hits + ": expected an object of model -> id list");
  std::map<std::string, std::set<std::string>> per_model;
  for (const auto& [model, ids] : doc.items()) {
    std::set<std::string> set;
    for (const auto& id : ids)
      set.insert(id.is_string() ? id.get<std::string>() : id.dump());
    per_model[model] = std::move(set);
  }
  const OverlapReport report = overlap_report(per_model);
  for (const auto& [region, count] : report.region_counts)
    std::printf("%s: %zu\n", region.c_str(), count);
  std::printf("total: %zu\n", report.total);
  emit_report(options.out, json{{"command", "overlap"},
                                {"config", {{"hits", options.hits}}},
                                {"region_counts", report.region_counts},
                                {"total", report.total}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical reasoning program toolkit for FinQA-style datasets"};
  app.require_subcommand(1);

  ExecOptions exec_options;
  auto* exec_cmd =
      app.add_subcommand("exec", "Execute one program against an environment");
  exec_cmd->add_option("--program", exec_options.program, "Program text")
      ->required();
  exec_cmd->add_option("--env", exec_options.env_path,
                       "Environment JSON file ({table, constants})");
  exec_cmd->add_option("--env-json", exec_options.env_inline,
                       "Inline environment JSON (same shape as --env)");
  exec_cmd->add_option("--tol-abs", exec_options.abs_tol, "Absolute tolerance");
  exec_cmd->add_option("--tol-rel", exec_options.rel_tol, "Relative tolerance");
  exec_cmd->callback([&] { run_exec(exec_options); });

  EvalGenOptions eval_gen_options;
  auto* eval_gen_cmd = app.add_subcommand(
      "eval-gen", "Execution and program accuracy of predicted programs");
  eval_gen_cmd->add_option("--dataset", eval_gen_options.dataset, "Dataset JSON")
      ->required();
  eval_gen_cmd
      ->add_option("--predictions", eval_gen_options.predictions,
                   "Predictions JSONL ({example_id, program})")
      ->required();
  eval_gen_cmd->add_option("--mode", eval_gen_options.mode,
                           "Program equivalence: strict|commutative");
  eval_gen_cmd->add_option("--tol-abs", eval_gen_options.abs_tol,
                           "Absolute tolerance");
  eval_gen_cmd->add_option("--tol-rel", eval_gen_options.rel_tol,
                           "Relative tolerance");
  eval_gen_cmd->add_option("--out", eval_gen_options.out, "Report JSON path");
  eval_gen_cmd->callback([&] { run_eval_gen(eval_gen_options); });

  EvalRetOptions eval_ret_options;
  auto* eval_ret_cmd = app.add_subcommand(
      "eval-ret", "Recall@k / precision@k of retriever score files");
  eval_ret_cmd->add_option("--dataset", eval_ret_options.dataset, "Dataset JSON")
      ->required();
  eval_ret_cmd
      ->add_option("--scores", eval_ret_options.scores,
                   "Score JSONL file (one per model; repeatable)")
      ->required();
  eval_ret_cmd->add_option("--k", eval_ret_options.k_list,
                           "Comma-separated k list (default 3,5)");
  eval_ret_cmd->add_option("--out", eval_ret_options.out, "Report JSON path");
  eval_ret_cmd->callback([&] { run_eval_ret(eval_ret_options); });

  auto* stack_cmd =
      app.add_subcommand("stack", "Fuse retriever scores with a trained stacker");
  stack_cmd->require_subcommand(1);

  StackTrainOptions stack_train_options;
  auto* stack_train_cmd =
      stack_cmd->add_subcommand("train", "Train the logistic stacker");
  stack_train_cmd
      ->add_option("--dataset", stack_train_options.dataset,
                   "Dataset JSON (gold_inds provide labels)")
      ->required();
  stack_train_cmd
      ->add_option("--scores", stack_train_options.scores,
                   "Score JSONL file (repeatable)")
      ->required();
  stack_train_cmd->add_option("--learning-rate", stack_train_options.learning_rate,
                              "Gradient descent step size");
  stack_train_cmd->add_option("--iterations", stack_train_options.iterations,
                              "Gradient descent iterations");
  stack_train_cmd->add_option("--l2", stack_train_options.l2, "L2 lambda");
  stack_train_cmd->add_option("--seed", stack_train_options.seed, "Seed");
  stack_train_cmd->add_option("--out", stack_train_options.out, "Model JSON path")
      ->required();
  stack_train_cmd->callback([&] { run_stack_train(stack_train_options); });

  StackApplyOptions stack_apply_options;
  auto* stack_apply_cmd =
      stack_cmd->add_subcommand("apply", "Rank facts with a trained stacker");
  stack_apply_cmd->add_option("--model", stack_apply_options.model, "Model JSON")
      ->required();
  stack_apply_cmd
      ->add_option("--scores", stack_apply_options.scores,
                   "Score JSONL file (repeatable)")
      ->required();
  stack_apply_cmd->add_option("--k", stack_apply_options.k, "Top-k selection");
  stack_apply_cmd->add_flag("--positive", stack_apply_options.positive,
                            "Keep only facts above the probability threshold");
  stack_apply_cmd->add_option("--threshold", stack_apply_options.threshold,
                              "Positive threshold (default 0.5)");
  stack_apply_cmd->add_option("--out", stack_apply_options.out,
                              "Selections JSONL path");
  stack_apply_cmd->add_option("--scores-out", stack_apply_options.scores_out,
                              "Fused scores JSONL path (model \"stack\")");
  stack_apply_cmd->add_option("--dataset", stack_apply_options.dataset,
                              "Dataset JSON for metrics");
  stack_apply_cmd->add_option("--report", stack_apply_options.report,
                              "Metrics report JSON path");
  stack_apply_cmd->callback([&] { run_stack_apply(stack_apply_options); });

  VoteOptions vote_options;
  auto* vote_cmd = app.add_subcommand(
      "vote", "Weighted vote over candidate programs per example");
  vote_cmd->add_option("--candidates", vote_options.candidates,
                       "Candidates JSONL")
      ->required();
  vote_cmd->add_option("--mode", vote_options.mode,
                       "Grouping equivalence: strict|commutative");
  vote_cmd->add_option("--group-by", vote_options.group_by,
                       "Group candidates by program|answer");
  vote_cmd->add_option("--dataset", vote_options.dataset,
                       "Dataset JSON (needed for --group-by answer)");
  vote_cmd->add_option("--out", vote_options.out, "Fused predictions JSONL");
  vote_cmd->add_option("--report", vote_options.report, "Report JSON path");
  vote_cmd->callback([&] { run_vote(vote_options); });

  AdvSplitOptions adv_options;
  auto* adv_cmd = app.add_subcommand(
      "adv-split", "Adversarial-validation audit and train/valid re-split");
  adv_cmd->add_option("--train", adv_options.train,
                      "Train-like dataset JSON (repeatable)")
      ->required();
  adv_cmd->add_option("--test", adv_options.test, "Test dataset JSON")
      ->required();
  adv_cmd->add_option("--valid-size", adv_options.valid_size,
                      "Validation set size (default 900)");
  adv_cmd->add_option("--folds", adv_options.folds, "Cross-fit folds");
  adv_cmd->add_option("--hash-dim", adv_options.hash_dim,
                      "Hashed bag-of-words dimension (power of two)");
  adv_cmd->add_option("--iterations", adv_options.iterations,
                      "Classifier training iterations");
  adv_cmd->add_option("--learning-rate", adv_options.learning_rate,
                      "Classifier step size");
  adv_cmd->add_option("--l2", adv_options.l2, "Classifier L2 lambda");
  adv_cmd->add_option("--seed", adv_options.seed, "Seed");
  adv_cmd->add_option("--out", adv_options.out, "Split JSON path");
  adv_cmd->callback([&] { run_adv_split(adv_options); });

  ExtractFactsOptions extract_options;
  auto* extract_cmd = app.add_subcommand(
      "extract-facts", "List ordered facts per example, checking gold ids");
  extract_cmd->add_option("--dataset", extract_options.dataset, "Dataset JSON")
      ->required();
  extract_cmd->add_option("--table-ids", extract_options.table_ids,
                          "Table fact numbering: data|raw");
  extract_cmd->add_option("--out", extract_options.out, "Facts JSONL path");
  extract_cmd->callback([&] { run_extract_facts(extract_options); });

  OverlapOptions overlap_options;
  auto* overlap_cmd = app.add_subcommand(
      "overlap", "Venn region counts of per-model correct ids");
  overlap_cmd->add_option("--hits", overlap_options.hits,
                          "JSON object: model -> list of correct ids")
      ->required();
  overlap_cmd->add_option("--out", overlap_options.out, "Report JSON path");
  overlap_cmd->callback([&] { run_overlap(overlap_options); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message and usage hint
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", error_kind_name(e.kind()), e.what());
    return e.kind() == ErrorKind::FileNotFound || e.kind() == ErrorKind::IoError
               ? 2
               : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
