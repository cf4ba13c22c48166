// Python bindings for the finprog core: DSL parsing and execution, the
// challenge metrics, score stacking, program voting, retrieval plumbing
// and the adversarial re-split.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "finprog/adversarial.hpp"
#include "finprog/evaluation.hpp"
#include "finprog/executor.hpp"
#include "finprog/fusion.hpp"
#include "finprog/numeric.hpp"
#include "finprog/program.hpp"
#include "finprog/retriever.hpp"

namespace py = pybind11;
using namespace finprog;

namespace {

EquivalenceMode mode_from_string(const std::string& text) {
  if (text == "strict") return EquivalenceMode::strict;
  if (text == "commutative") return EquivalenceMode::commutative;
  throw Error(ErrorKind::SchemaViolation,
              "mode must be 'strict' or 'commutative'");
}

py::object value_to_python(const Value& value) {
  if (value.is_number()) return py::float_(value.number);
  return py::bool_(value.truth);
}

Value value_from_python(const py::handle& object) {
  if (py::isinstance<py::bool_>(object))
    return Value::yes_no(object.cast<bool>());
  if (py::isinstance<py::float_>(object) || py::isinstance<py::int_>(object))
    return Value::num(object.cast<double>());
  throw Error(ErrorKind::SchemaViolation,
              "expected a number or a bool for a program value");
}

Environment environment_from_python(const py::object& table,
                                    const py::object& constants,
                                    const NumericConfig& cfg) {
  Environment env;
  env.numeric = cfg;
  if (!table.is_none()) {
    if (py::isinstance<py::dict>(table)) {
      for (const auto& item : table.cast<py::dict>())
        env.add_row(item.first.cast<std::string>(),
                    item.second.cast<std::vector<std::string>>());
    } else {
      const auto rows = table.cast<std::vector<std::vector<std::string>>>();
      env = Environment::from_table(rows, cfg);
    }
  }
  if (!constants.is_none())
    for (const auto& item : constants.cast<py::dict>())
      env.set_constant(item.first.cast<std::string>(),
                       item.second.cast<double>());
  return env;
}

Program program_from_python(const py::object& program) {
  if (py::isinstance<py::str>(program))
    return parse_program_text(program.cast<std::string>());
  return program.cast<Program>();
}

Matrix matrix_from_python(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols)
      throw Error(ErrorKind::DimensionMismatch, "ragged feature rows");
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

ScoreRecord score_record_from_python(const py::dict& record) {
  ScoreRecord out;
  out.example_id = record["example_id"].cast<std::string>();
  out.model = record["model"].cast<std::string>();
  for (const auto& item : record["fact_scores"].cast<py::dict>()) {
    const std::string fact = item.first.cast<std::string>();
    ScoreEntry entry;
    if (py::isinstance<py::dict>(item.second)) {
      const py::dict pair = item.second.cast<py::dict>();
      entry.has_start_end = true;
      entry.start = pair["start"].cast<double>();
      entry.end = pair["end"].cast<double>();
    } else if (py::isinstance<py::tuple>(item.second) ||
               py::isinstance<py::list>(item.second)) {
      const auto pair = item.second.cast<std::pair<double, double>>();
      entry.has_start_end = true;
      entry.start = pair.first;
      entry.end = pair.second;
    } else {
      entry.score = item.second.cast<double>();
    }
    out.fact_scores[fact] = entry;
  }
  return out;
}

std::vector<ScoreRecord> score_records_from_python(const py::list& records) {
  std::vector<ScoreRecord> out;
  out.reserve(records.size());
  for (const auto& record : records)
    out.push_back(score_record_from_python(record.cast<py::dict>()));
  return out;
}

LRHyper hyper_from_kwargs(double learning_rate, std::size_t iterations,
                          double l2_lambda, std::uint64_t seed) {
  LRHyper hyper;
  hyper.learning_rate = learning_rate;
  hyper.iterations = iterations;
  hyper.l2_lambda = l2_lambda;
  hyper.seed = seed;
  return hyper;
}

py::dict selection_to_python(const FusedSelection& selection) {
  py::dict out;
  out["example_id"] = selection.example_id;
  out["ranked_fact_ids"] = selection.ranked_fact_ids;
  out["fused_scores"] = selection.fused_scores;
  out["selected"] = selection.selected;
  return out;
}

py::dict span_to_python(const PromptInstance::Span& span) {
  py::dict out;
  out["begin"] = span.begin;
  out["end"] = span.end;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Numerical reasoning program DSL, execution metrics and "
            "retriever/generator fusion";
  m.attr("__version__") = "0.1.0";

  py::register_exception<Error>(m, "Error");

  py::class_<Program>(m, "Program")
      .def("__repr__",
           [](const Program& p) {
             return "Program(\"" + serialize_program(p) + "\")";
           })
      .def("__eq__",
           [](const Program& a, const Program& b) { return a == b; },
           py::is_operator())
      .def("__len__", [](const Program& p) { return p.steps.size(); })
      .def("serialize", [](const Program& p) { return serialize_program(p); })
      .def("tokens", [](const Program& p) { return serialize_tokens(p); })
      .def(
          "canonicalize",
          [](const Program& p, const std::string& mode) {
            return canonicalize_program(p, mode_from_string(mode));
          },
          py::arg("mode") = "commutative");

  py::class_<LRModel>(m, "LRModel")
      .def_property_readonly("weights",
                             [](const LRModel& m_) { return m_.weights; })
      .def_property_readonly("bias", [](const LRModel& m_) { return m_.bias; })
      .def_property_readonly(
          "final_loss", [](const LRModel& m_) { return m_.meta.final_loss; })
      .def_property_readonly(
          "loss_history", [](const LRModel& m_) { return m_.meta.loss_history; })
      .def_property_readonly(
          "feature_names",
          [](const LRModel& m_) { return m_.meta.feature_names; })
      .def("__repr__", [](const LRModel& m_) {
        return "LRModel(d=" + std::to_string(m_.weights.size()) + ")";
      });

  // program DSL
  m.def("tokenize_program", &tokenize_program, py::arg("text"));
  m.def("parse_program", &parse_program_text, py::arg("text"));
  m.def(
      "serialize_program",
      [](const Program& program, const std::string& form) -> py::object {
        if (form == "string") return py::cast(serialize_program(program));
        if (form == "tokens") return py::cast(serialize_tokens(program));
        throw Error(ErrorKind::SchemaViolation,
                    "form must be 'string' or 'tokens'");
      },
      py::arg("program"), py::arg("form") = "string");
  m.def(
      "canonicalize_program",
      [](const py::object& program, const std::string& mode) {
        return canonicalize_program(program_from_python(program),
                                    mode_from_string(mode));
      },
      py::arg("program"), py::arg("mode") = "commutative");
  m.def(
      "program_equivalent",
      [](const py::object& a, const py::object& b, const std::string& mode) {
        return program_equivalent(program_from_python(a),
                                  program_from_python(b),
                                  mode_from_string(mode));
      },
      py::arg("pred"), py::arg("gold"), py::arg("mode") = "commutative");

  // execution
  m.def(
      "execute",
      [](const py::object& program, const py::object& table,
         const py::object& constants, double abs_tol, double rel_tol,
         double div_epsilon) {
        NumericConfig cfg{abs_tol, rel_tol, div_epsilon};
        const Environment env = environment_from_python(table, constants, cfg);
        const ExecutionResult result =
            execute_program(program_from_python(program), env);
        py::list trace;
        for (const auto& entry : result.trace) {
          py::dict step;
          step["index"] = entry.index;
          step["op"] = entry.op;
          step["lhs"] = entry.lhs;
          step["rhs"] = entry.rhs;
          step["result"] = value_to_python(entry.result);
          trace.append(step);
        }
        py::dict out;
        out["value"] = value_to_python(result.value);
        out["trace"] = trace;
        return out;
      },
      py::arg("program"), py::arg("table") = py::none(),
      py::arg("constants") = py::none(), py::arg("abs_tol") = 1e-5,
      py::arg("rel_tol") = 1e-5, py::arg("div_epsilon") = 1e-12);
  m.def("parse_cell_number", &parse_cell_number, py::arg("text"));
  m.def(
      "answers_match",
      [](const py::object& gold, const py::object& value, double abs_tol,
         double rel_tol) {
        NumericConfig cfg;
        cfg.abs_tol = abs_tol;
        cfg.rel_tol = rel_tol;
        const Value got = value_from_python(value);
        if (py::isinstance<py::str>(gold))
          return answers_match(gold.cast<std::string>(), got, cfg);
        return answers_match(value_from_python(gold), got, cfg);
      },
      py::arg("gold"), py::arg("value"), py::arg("abs_tol") = 1e-5,
      py::arg("rel_tol") = 1e-5);

  // metrics
  m.def(
      "recall_at_k",
      [](const std::vector<std::string>& ranked,
         const std::set<std::string>& gold_ids, std::size_t k) {
        return recall_at_k(ranked, gold_ids, k);
      },
      py::arg("ranked"), py::arg("gold_ids"), py::arg("k"));
  m.def(
      "precision_at_k",
      [](const std::vector<std::string>& ranked,
         const std::set<std::string>& gold_ids, std::size_t k) {
        return precision_at_k(ranked, gold_ids, k);
      },
      py::arg("ranked"), py::arg("gold_ids"), py::arg("k"));
  m.def("auc", &auc, py::arg("scores"), py::arg("labels"));
  m.def(
      "overlap_report",
      [](const std::map<std::string, std::set<std::string>>& per_model_hits) {
        const OverlapReport report = overlap_report(per_model_hits);
        py::dict out;
        out["region_counts"] = report.region_counts;
        out["total"] = report.total;
        return out;
      },
      py::arg("per_model_hits"));

  // fusion
  m.def(
      "lr_train",
      [](const std::vector<std::vector<double>>& features,
         const std::vector<int>& labels, double learning_rate,
         std::size_t iterations, double l2_lambda, std::uint64_t seed) {
        return lr_train(matrix_from_python(features), labels,
                        hyper_from_kwargs(learning_rate, iterations, l2_lambda,
                                          seed));
      },
      py::arg("features"), py::arg("labels"), py::arg("learning_rate") = 0.1,
      py::arg("iterations") = 2000, py::arg("l2_lambda") = 1e-4,
      py::arg("seed") = 42);
  m.def(
      "lr_predict",
      [](const LRModel& model, const std::vector<std::vector<double>>& features) {
        return lr_predict(model, matrix_from_python(features));
      },
      py::arg("model"), py::arg("features"));
  m.def(
      "stack_train",
      [](const py::list& records,
         const std::map<std::string, std::set<std::string>>& gold_ids,
         double learning_rate, std::size_t iterations, double l2_lambda,
         std::uint64_t seed) {
        return stack_train(score_records_from_python(records), gold_ids,
                           hyper_from_kwargs(learning_rate, iterations,
                                             l2_lambda, seed));
      },
      py::arg("records"), py::arg("gold_ids"), py::arg("learning_rate") = 0.1,
      py::arg("iterations") = 2000, py::arg("l2_lambda") = 1e-4,
      py::arg("seed") = 42);
  m.def(
      "stack_rank",
      [](const LRModel& model, const py::list& records, std::size_t k,
         bool positive_only, double threshold) {
        return selection_to_python(stack_rank(
            model, score_records_from_python(records), k, positive_only,
            threshold));
      },
      py::arg("model"), py::arg("records"), py::arg("k") = 3,
      py::arg("positive_only") = false, py::arg("threshold") = 0.5);
  m.def(
      "weighted_vote",
      [](const py::list& candidates, const std::string& mode) {
        std::vector<VoteCandidate> parsed;
        for (const auto& candidate : candidates) {
          const py::dict d = candidate.cast<py::dict>();
          parsed.push_back({d["example_id"].cast<std::string>(),
                            d["model"].cast<std::string>(),
                            d["program"].cast<std::string>(),
                            d["model_weight"].cast<double>()});
        }
        const VoteResult result =
            weighted_vote_detail(parsed, mode_from_string(mode));
        py::dict out;
        out["program"] = result.program;
        out["score"] = result.score;
        return out;
      },
      py::arg("candidates"), py::arg("mode") = "commutative");

  // retriever plumbing
  m.def(
      "extract_facts",
      [](const py::dict& report, const std::string& table_ids) {
        ReportText text;
        if (report.contains("pre_text"))
          text.pre_text = report["pre_text"].cast<std::vector<std::string>>();
        if (report.contains("post_text"))
          text.post_text = report["post_text"].cast<std::vector<std::string>>();
        if (report.contains("table"))
          text.table =
              report["table"].cast<std::vector<std::vector<std::string>>>();
        TableIdScheme scheme;
        if (table_ids == "data") scheme = TableIdScheme::data_rows_from_zero;
        else if (table_ids == "raw") scheme = TableIdScheme::raw_row_index;
        else
          throw Error(ErrorKind::SchemaViolation,
                      "table_ids must be 'data' or 'raw'");
        py::list out;
        for (const auto& fact : extract_facts(text, scheme)) {
          py::dict d;
          d["fact_id"] = fact.fact_id;
          d["text"] = fact.text;
          d["origin"] = fact_origin_name(fact.origin);
          d["ordinal"] = fact.ordinal;
          out.append(d);
        }
        return out;
      },
      py::arg("report"), py::arg("table_ids") = "data");
  m.def("linearize_table_row", &linearize_table_row, py::arg("header"),
        py::arg("row"));
  m.def(
      "make_windows",
      [](std::size_t fact_count, std::size_t n, bool shift_last) {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (const auto& window : make_windows(fact_count, n, shift_last))
          out.emplace_back(window.start, window.end);
        return out;
      },
      py::arg("fact_count"), py::arg("n") = 8, py::arg("shift_last") = false);
  m.def(
      "aggregate_window_scores",
      [](const std::vector<std::map<std::string, std::pair<double, double>>>&
             windows,
         const std::vector<std::string>& fact_ids) {
        std::vector<WindowScores> parsed;
        parsed.reserve(windows.size());
        for (const auto& window : windows) parsed.push_back({window});
        return aggregate_window_scores(parsed, fact_ids);
      },
      py::arg("windows"), py::arg("fact_ids"));
  m.def(
      "fill_prompt",
      [](const std::string& tmpl, const std::string& question,
         const std::string& fact) {
        const PromptInstance instance = fill_prompt(tmpl, question, fact);
        py::dict out;
        out["text"] = instance.text;
        out["question_span"] = span_to_python(instance.question_span);
        out["fact_span"] = span_to_python(instance.fact_span);
        out["mask_position"] = span_to_python(instance.mask_position);
        return out;
      },
      py::arg("template"), py::arg("question"), py::arg("fact"));
  m.def(
      "rank_and_select",
      [](const std::map<std::string, double>& scores, std::size_t k) {
        return rank_and_select(scores, k);
      },
      py::arg("scores"), py::arg("k") = 3);

  // adversarial validation
  m.def(
      "adversarial_audit",
      [](const py::list& examples, std::size_t hash_dim, std::size_t folds,
         std::uint64_t seed, double learning_rate, std::size_t iterations,
         double l2_lambda) {
        std::vector<AuditExample> pool;
        for (const auto& example : examples) {
          const py::dict d = example.cast<py::dict>();
          AuditExample parsed;
          parsed.id = d["id"].cast<std::string>();
          parsed.question = d["question"].cast<std::string>();
          if (d.contains("fact_count"))
            parsed.fact_count = d["fact_count"].cast<std::size_t>();
          if (d.contains("table_row_count"))
            parsed.table_row_count = d["table_row_count"].cast<std::size_t>();
          parsed.origin = d["origin"].cast<int>();
          pool.push_back(std::move(parsed));
        }
        FeatureConfig cfg;
        cfg.hash_dim = hash_dim;
        cfg.seed = seed;
        const AuditResult result = adversarial_audit(
            pool, cfg, folds,
            hyper_from_kwargs(learning_rate, iterations, l2_lambda, seed));
        py::dict out;
        out["per_example"] = result.per_example;
        out["train_auc"] = result.train_auc;
        out["heldout_auc"] = result.heldout_auc;
        out["fold_count"] = result.fold_count;
        out["fold_of"] = result.fold_of;
        return out;
      },
      py::arg("examples"), py::arg("hash_dim") = 4096, py::arg("folds") = 5,
      py::arg("seed") = 42, py::arg("learning_rate") = 0.1,
      py::arg("iterations") = 2000, py::arg("l2_lambda") = 1e-4);
  m.def(
      "resplit",
      [](const std::vector<std::string>& pool_ids,
         const std::map<std::string, double>& per_example,
         std::size_t valid_size, std::uint64_t seed) {
        AuditResult audit;
        audit.per_example = per_example;
        const SplitAssignment assignment =
            resplit(pool_ids, audit, valid_size, seed);
        py::dict out;
        out["valid_ids"] = assignment.valid_ids;
        out["train_ids"] = assignment.train_ids;
        return out;
      },
      py::arg("pool_ids"), py::arg("per_example"), py::arg("valid_size") = 900,
      py::arg("seed") = 42);
}
