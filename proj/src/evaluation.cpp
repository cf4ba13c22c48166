#include "finprog/evaluation.hpp"

#include <algorithm>
#include <numeric>

#include "finprog/numeric.hpp"

namespace finprog {

const char* mismatch_class_name(MismatchClass c) {
  switch (c) {
    case MismatchClass::match: return "match";
    case MismatchClass::wrong_value: return "wrong_value";
    case MismatchClass::percent_vs_fraction: return "percent_vs_fraction";
    case MismatchClass::bool_vs_number: return "bool_vs_number";
    case MismatchClass::gold_unparseable: return "gold_unparseable";
    case MismatchClass::invalid_program: return "invalid_program";
    case MismatchClass::execution_error: return "execution_error";
    case MismatchClass::missing_prediction: return "missing_prediction";
  }
  return "unknown";
}

bool program_equivalent(const Program& pred, const Program& gold,
                        EquivalenceMode mode) {
  return serialize_program(canonicalize_program(pred, mode)) ==
         serialize_program(canonicalize_program(gold, mode));
}

namespace {

// Gold answer as a Value, when it parses. Text goes through the yes/no
// convention first, then the financial number parser.
std::optional<Value> parse_gold_answer(
    const std::variant<double, std::string>& answer) {
  if (const auto* number = std::get_if<double>(&answer))
    return Value::num(*number);
  const std::string& text = std::get<std::string>(answer);
  const std::string norm = lower_collapse(text);
  if (norm == "yes" || norm == "no") return Value::yes_no(norm == "yes");
  if (const auto number = parse_financial_number(text))
    return Value::num(*number);
  return std::nullopt;
}

MismatchClass classify_answer(const Value& gold, const Value& got,
                              const NumericConfig& cfg) {
  if (gold.kind != got.kind) return MismatchClass::bool_vs_number;
  if (answers_match(gold, got, cfg)) return MismatchClass::match;
  if (gold.is_number()) {
    if (nearly_equal(gold.number, got.number * 100.0, cfg.abs_tol, cfg.rel_tol) ||
        nearly_equal(gold.number * 100.0, got.number, cfg.abs_tol, cfg.rel_tol))
      return MismatchClass::percent_vs_fraction;
  }
  return MismatchClass::wrong_value;
}

}  // namespace

GeneratorMetrics evaluate_generator(const std::vector<GeneratorPrediction>& preds,
                                    const std::vector<GoldExample>& gold,
                                    const NumericConfig& cfg,
                                    EquivalenceMode mode) {
  std::map<std::string, const GeneratorPrediction*> by_id;
  std::set<std::string> known;
  for (const auto& example : gold) known.insert(example.example_id);
  for (const auto& pred : preds) {
    if (!known.count(pred.example_id))
      throw Error(ErrorKind::DatasetIdMismatch,
                  "prediction for unknown example \"" + pred.example_id + "\"");
    by_id.emplace(pred.example_id, &pred);  // first prediction wins
  }

  GeneratorMetrics metrics;
  metrics.n = gold.size();
  std::size_t exec_hits = 0, strict_hits = 0, comm_hits = 0;
  for (const auto& example : gold) {
    ExampleOutcome outcome;
    outcome.example_id = example.example_id;

    const auto it = by_id.find(example.example_id);
    if (it == by_id.end()) {
      outcome.mismatch = MismatchClass::missing_prediction;
      metrics.per_example.push_back(outcome);
      continue;
    }

    std::optional<Program> predicted;
    try {
      predicted = parse_program_text(it->second->program);
    } catch (const Error&) {
      outcome.mismatch = MismatchClass::invalid_program;
    }

    bool strict_ok = false, comm_ok = false;
    if (predicted && example.program) {
      strict_ok = program_equivalent(*predicted, *example.program,
                                     EquivalenceMode::strict);
      comm_ok = program_equivalent(*predicted, *example.program,
                                   EquivalenceMode::commutative);
    }
    outcome.prog_ok = mode == EquivalenceMode::strict ? strict_ok : comm_ok;

    if (predicted) {
      auto executed = execute_checked(*predicted, example.env);
      if (std::holds_alternative<ExecutionError>(executed)) {
        outcome.mismatch = MismatchClass::execution_error;
      } else {
        const Value got = std::get<ExecutionResult>(executed).value;
        const auto gold_value = parse_gold_answer(example.answer);
        if (!gold_value) {
          outcome.mismatch = MismatchClass::gold_unparseable;
        } else {
          outcome.mismatch = classify_answer(*gold_value, got, cfg);
          outcome.exec_ok = outcome.mismatch == MismatchClass::match;
        }
      }
    }

    exec_hits += outcome.exec_ok;
    strict_hits += strict_ok;
    comm_hits += comm_ok;
    metrics.per_example.push_back(outcome);
  }

  for (const auto& outcome : metrics.per_example)
    ++metrics.mismatch_histogram[mismatch_class_name(outcome.mismatch)];
  if (metrics.n > 0) {
    const double n = static_cast<double>(metrics.n);
    metrics.exec_acc = static_cast<double>(exec_hits) / n;
    metrics.prog_acc_strict = static_cast<double>(strict_hits) / n;
    metrics.prog_acc_commutative = static_cast<double>(comm_hits) / n;
    metrics.prog_acc = mode == EquivalenceMode::strict
                           ? metrics.prog_acc_strict
                           : metrics.prog_acc_commutative;
  }
  return metrics;
}

namespace {

std::size_t hits_in_top_k(const std::vector<std::string>& ranked,
                          const std::set<std::string>& gold_ids,
                          std::size_t k) {
  std::size_t hits = 0;
  const std::size_t limit = std::min(k, ranked.size());
  for (std::size_t i = 0; i < limit; ++i) hits += gold_ids.count(ranked[i]);
  return hits;
}

}  // namespace

double recall_at_k(const std::vector<std::string>& ranked,
                   const std::set<std::string>& gold_ids, std::size_t k) {
  if (gold_ids.empty())
    throw Error(ErrorKind::EmptyGold, "recall is undefined with no gold facts");
  return static_cast<double>(hits_in_top_k(ranked, gold_ids, k)) /
         static_cast<double>(gold_ids.size());
}

double precision_at_k(const std::vector<std::string>& ranked,
                      const std::set<std::string>& gold_ids, std::size_t k) {
  if (k == 0) return 0.0;
  return static_cast<double>(hits_in_top_k(ranked, gold_ids, k)) /
         static_cast<double>(k);
}

SelectionMetrics selection_metrics(const std::vector<std::string>& selected,
                                   const std::set<std::string>& gold_ids) {
  if (gold_ids.empty())
    throw Error(ErrorKind::EmptyGold, "recall is undefined with no gold facts");
  std::size_t hits = 0;
  for (const auto& id : selected) hits += gold_ids.count(id);
  SelectionMetrics m;
  if (!selected.empty())
    m.precision = static_cast<double>(hits) / static_cast<double>(selected.size());
  m.recall = static_cast<double>(hits) / static_cast<double>(gold_ids.size());
  return m;
}

RetrieverMetrics evaluate_retriever(
    const std::map<std::string, std::vector<std::string>>& rankings,
    const std::map<std::string, std::set<std::string>>& gold,
    const std::vector<std::size_t>& ks) {
  RetrieverMetrics metrics;
  std::map<std::size_t, double> recall_sum, precision_sum;
  for (const auto& [example_id, ranked] : rankings) {
    const auto it = gold.find(example_id);
    if (it == gold.end())
      throw Error(ErrorKind::DatasetIdMismatch,
                  "ranking for unknown example \"" + example_id + "\"");
    if (it->second.empty()) {
      ++metrics.skipped;
      continue;
    }
    for (const std::size_t k : ks) {
      recall_sum[k] += recall_at_k(ranked, it->second, k);
      precision_sum[k] += precision_at_k(ranked, it->second, k);
    }
    ++metrics.n;
  }
  for (const std::size_t k : ks) {
    const double n = metrics.n ? static_cast<double>(metrics.n) : 1.0;
    metrics.recall_at[k] = recall_sum[k] / n;
    metrics.precision_at[k] = precision_sum[k] / n;
  }
  return metrics;
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw Error(ErrorKind::DimensionMismatch,
                "scores and labels differ in length");
  std::size_t positives = 0, negatives = 0;
  for (const int label : labels) {
    if (label != 0 && label != 1)
      throw Error(ErrorKind::SchemaViolation, "labels must be 0 or 1");
    label ? ++positives : ++negatives;
  }
  if (positives == 0 || negatives == 0)
    throw Error(ErrorKind::DegenerateLabels,
                "need at least one positive and one negative label");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Average ranks for tied scores, then the Mann-Whitney U statistic.
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = static_cast<double>(i + 1 + j) / 2.0;  // 1-based
    for (std::size_t t = i; t < j; ++t)
      if (labels[order[t]]) positive_rank_sum += avg_rank;
    i = j;
  }
  const double np = static_cast<double>(positives);
  const double nn = static_cast<double>(negatives);
  const double u = positive_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * nn);
}

OverlapReport overlap_report(
    const std::map<std::string, std::set<std::string>>& per_model_hits) {
  const std::size_t m = per_model_hits.size();
  if (m < 2 || m > 4)
    throw Error(ErrorKind::ModelSetMismatch,
                "overlap report expects 2 to 4 models, got " +
                    std::to_string(m));

  std::vector<const std::string*> names;
  std::vector<const std::set<std::string>*> sets;
  for (const auto& [name, hits] : per_model_hits) {
    names.push_back(&name);
    sets.push_back(&hits);
  }

  auto region_key = [&](unsigned mask) {
    std::string key;
    for (std::size_t i = 0; i < m; ++i) {
      if (!(mask & (1u << i))) continue;
      if (!key.empty()) key += "&";
      key += *names[i];  // map iteration already sorted the names
    }
    return key;
  };

  OverlapReport report;
  for (unsigned mask = 1; mask < (1u << m); ++mask)
    report.region_counts[region_key(mask)] = 0;

  std::set<std::string> universe;
  for (const auto* s : sets) universe.insert(s->begin(), s->end());
  for (const auto& item : universe) {
    unsigned mask = 0;
    for (std::size_t i = 0; i < m; ++i)
      if (sets[i]->count(item)) mask |= (1u << i);
    ++report.region_counts[region_key(mask)];
  }
  report.total = universe.size();
  return report;
}

}  // namespace finprog
