#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "finprog/executor.hpp"
#include "finprog/program.hpp"

namespace finprog {

// ---------------------------------------------------------------------------
// Generator metrics: execution accuracy and program accuracy.
// ---------------------------------------------------------------------------

struct GeneratorPrediction {
  std::string example_id;
  std::string model;
  std::string program;  // raw text; may fail to parse (counts as incorrect)
};

// One dataset example reduced to what evaluation needs. `program` is empty
// when the gold program itself does not parse (kept so execution accuracy
// still works; program accuracy is then unreachable for the example).
struct GoldExample {
  std::string example_id;
  std::optional<Program> program;
  std::variant<double, std::string> answer;
  Environment env;
};

enum class MismatchClass {
  match,
  wrong_value,
  percent_vs_fraction,  // off by exactly a factor of 100 within tolerance
  bool_vs_number,
  gold_unparseable,
  invalid_program,
  execution_error,
  missing_prediction,
};

const char* mismatch_class_name(MismatchClass c);

struct ExampleOutcome {
  std::string example_id;
  bool exec_ok = false;
  bool prog_ok = false;
  MismatchClass mismatch = MismatchClass::missing_prediction;
};

struct GeneratorMetrics {
  double exec_acc = 0.0;
  double prog_acc = 0.0;  // at the requested equivalence mode
  double prog_acc_strict = 0.0;
  double prog_acc_commutative = 0.0;
  std::size_t n = 0;
  std::vector<ExampleOutcome> per_example;
  std::map<std::string, std::size_t> mismatch_histogram;
};

// Canonical-form equality: serialize(canonicalize(pred)) ==
// serialize(canonicalize(gold)). Numeric literals compare by value, so
// "5" and "5.0" are the same argument.
bool program_equivalent(const Program& pred, const Program& gold,
                        EquivalenceMode mode);

// Scores one prediction per gold example; a missing prediction counts as
// incorrect on both metrics, as do unparseable or unexecutable programs.
// Errors: DatasetIdMismatch when a prediction names an unknown example.
GeneratorMetrics evaluate_generator(const std::vector<GeneratorPrediction>& preds,
                                    const std::vector<GoldExample>& gold,
                                    const NumericConfig& cfg,
                                    EquivalenceMode mode);

// ---------------------------------------------------------------------------
// Retrieval metrics.
// ---------------------------------------------------------------------------

// |top-k of ranked ∩ gold| / |gold|. Errors: EmptyGold.
double recall_at_k(const std::vector<std::string>& ranked,
                   const std::set<std::string>& gold_ids, std::size_t k);

// |top-k of ranked ∩ gold| / k.
double precision_at_k(const std::vector<std::string>& ranked,
                      const std::set<std::string>& gold_ids, std::size_t k);

// Precision/recall of an explicit selection (denominator |selected|, not
// k). This is what a positive-filtered top-k is scored with.
struct SelectionMetrics {
  double precision = 0.0;
  double recall = 0.0;
};
SelectionMetrics selection_metrics(const std::vector<std::string>& selected,
                                   const std::set<std::string>& gold_ids);

struct RetrieverMetrics {
  std::map<std::size_t, double> recall_at;
  std::map<std::size_t, double> precision_at;
  std::size_t n = 0;        // examples evaluated
  std::size_t skipped = 0;  // examples with empty gold sets
};

// Averages recall@k / precision@k over examples; examples with an empty
// gold set are skipped and counted.
RetrieverMetrics evaluate_retriever(
    const std::map<std::string, std::vector<std::string>>& rankings,
    const std::map<std::string, std::set<std::string>>& gold,
    const std::vector<std::size_t>& ks);

// Probability that a random positive outscores a random negative; ties
// count one half. Exact Mann-Whitney rank statistic with average ranks.
// Errors: DegenerateLabels (single-class input), DimensionMismatch.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

// ---------------------------------------------------------------------------
// Model overlap (venn regions).
// ---------------------------------------------------------------------------

struct OverlapReport {
  // Region key: model names sorted ascending, joined with "&". Every
  // non-empty subset of the model set is present, zero counts included.
  std::map<std::string, std::size_t> region_counts;
  std::size_t total = 0;  // equals the number of distinct items
};

// Counts, for every non-empty subset of models, the items correct under
// exactly that subset. Accepts 2 to 4 models.
OverlapReport overlap_report(
    const std::map<std::string, std::set<std::string>>& per_model_hits);

}  // namespace finprog
