#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <optional>
#include <set>

#include "finprog/evaluation.hpp"
#include "testutil.hpp"

using namespace finprog;

namespace {

template <typename Fn>
std::optional<ErrorKind> thrown_kind(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

// Pairwise AUC: wins plus half-ties over all positive-negative pairs.
double brute_force_auc(const std::vector<double>& scores,
                       const std::vector<int>& labels) {
  double numerator = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      ++pairs;
      if (scores[i] > scores[j]) numerator += 1.0;
      else if (scores[i] == scores[j]) numerator += 0.5;
    }
  }
  return numerator / static_cast<double>(pairs);
}

GoldExample make_gold(const std::string& id, const std::string& program,
                      double answer) {
  GoldExample example;
  example.example_id = id;
  example.program = parse_program_text(program);
  example.answer = answer;
  return example;
}

}  // namespace

TEST_CASE("program_equivalent honors the mode") {
  const Program a = parse_program_text("add(2, 1)");
  const Program b = parse_program_text("add(1, 2)");
  CHECK(program_equivalent(a, b, EquivalenceMode::commutative));
  CHECK_FALSE(program_equivalent(a, b, EquivalenceMode::strict));

  const Program c = parse_program_text("subtract(2, 1)");
  const Program d = parse_program_text("subtract(1, 2)");
  CHECK_FALSE(program_equivalent(c, d, EquivalenceMode::strict));
  CHECK_FALSE(program_equivalent(c, d, EquivalenceMode::commutative));

  const Program e = parse_program_text("add(1, 1), divide(#0, const_100)");
  CHECK(program_equivalent(e, e, EquivalenceMode::strict));
  CHECK(program_equivalent(e, e, EquivalenceMode::commutative));
}

TEST_CASE("program_equivalent compares literals by value") {
  const Program a = parse_program_text("add(5, 2)");
  const Program b = parse_program_text("add(5.0, 2.00)");
  CHECK(program_equivalent(a, b, EquivalenceMode::strict));
}

TEST_CASE("commutative equivalence is an equivalence relation") {
  testutil::Rng rng(31);
  const auto mode = EquivalenceMode::commutative;
  for (int trial = 0; trial < 200; ++trial) {
    const Program p = testutil::random_program(rng, 4);
    Program q = p;  // same program with commutative args swapped
    for (auto& step : q.steps)
      if (operator_info(step.op).commutative && rng.chance(0.7))
        std::swap(step.arg1, step.arg2);
    const Program r = testutil::random_program(rng, 4);

    CHECK(program_equivalent(p, p, mode));                      // reflexive
    CHECK(program_equivalent(p, q, mode));
    CHECK(program_equivalent(q, p, mode));                      // symmetric
    if (program_equivalent(p, r, mode) && program_equivalent(r, q, mode))
      CHECK(program_equivalent(p, q, mode));                    // transitive
    CHECK(program_equivalent(p, r, mode) ==
          program_equivalent(r, p, mode));
  }
}

TEST_CASE("evaluate_generator on the four-example fixture") {
  // Hand count: exec-correct on e1 (exact) and e2 (commuted sum);
  // prog-correct only on e1. Expected 2/4 = 0.50 exec, 1/4 = 0.25 prog
  // (strict mode).
  std::vector<GoldExample> gold;
  gold.push_back(make_gold("e1", "add(1, 2)", 3.0));
  gold.push_back(make_gold("e2", "add(3, 4)", 7.0));
  gold.push_back(make_gold("e3", "multiply(2, 5)", 10.0));
  gold.push_back(make_gold("e4", "subtract(9, 2)", 7.0));

  const std::vector<GeneratorPrediction> preds = {
      {"e1", "m", "add(1, 2)"},
      {"e2", "m", "add(4, 3)"},   // right value, commuted program
      {"e3", "m", "add(1, 1)"},   // wrong everything
      {"e4", "m", "subtract(9,"}, // invalid
  };

  NumericConfig cfg;
  const GeneratorMetrics strict =
      evaluate_generator(preds, gold, cfg, EquivalenceMode::strict);
  CHECK(strict.exec_acc == 0.50);
  CHECK(strict.prog_acc == 0.25);
  CHECK(strict.n == 4);
  CHECK(strict.mismatch_histogram.at("invalid_program") == 1);
  CHECK(strict.mismatch_histogram.at("match") == 2);

  const GeneratorMetrics comm =
      evaluate_generator(preds, gold, cfg, EquivalenceMode::commutative);
  CHECK(comm.prog_acc == 0.50);  // the commuted add now counts
  CHECK(comm.prog_acc_strict == 0.25);
  CHECK(comm.exec_acc == 0.50);
}

TEST_CASE("evaluate_generator: perfect predictions score 1.0 / 1.0") {
  std::vector<GoldExample> gold;
  std::vector<GeneratorPrediction> preds;
  gold.push_back(make_gold("a", "subtract(5829, 5735), divide(#0, 5735)",
                           0.016390584));
  gold.push_back(make_gold("b", "greater(5, 3), add(1, 1)", 2.0));
  for (const auto& example : gold)
    preds.push_back(
        {example.example_id, "m", serialize_program(*example.program)});
  const GeneratorMetrics metrics = evaluate_generator(
      preds, gold, NumericConfig{}, EquivalenceMode::commutative);
  CHECK(metrics.exec_acc == 1.0);
  CHECK(metrics.prog_acc == 1.0);
}

TEST_CASE("evaluate_generator edge behavior") {
  std::vector<GoldExample> gold;
  gold.push_back(make_gold("a", "add(1, 2)", 3.0));

  SUBCASE("unknown prediction id") {
    const std::vector<GeneratorPrediction> preds = {{"zzz", "m", "add(1, 2)"}};
    CHECK(thrown_kind([&] {
            evaluate_generator(preds, gold, NumericConfig{},
                               EquivalenceMode::strict);
          }) == ErrorKind::DatasetIdMismatch);
  }
  SUBCASE("missing prediction counts as incorrect") {
    const GeneratorMetrics metrics = evaluate_generator(
        {}, gold, NumericConfig{}, EquivalenceMode::strict);
    CHECK(metrics.exec_acc == 0.0);
    CHECK(metrics.mismatch_histogram.at("missing_prediction") == 1);
  }
  SUBCASE("boolean gold answers") {
    gold[0] = make_gold("a", "greater(5, 3)", 0.0);
    gold[0].answer = std::string("yes");
    const GeneratorMetrics metrics =
        evaluate_generator({{"a", "m", "greater(5, 3)"}}, gold, NumericConfig{},
                           EquivalenceMode::strict);
    CHECK(metrics.exec_acc == 1.0);
  }
  SUBCASE("percent-vs-fraction mismatches are classified, not coerced") {
    gold[0].answer = 30.0;  // prediction computes 0.3
    const GeneratorMetrics metrics =
        evaluate_generator({{"a", "m", "divide(3, 10)"}}, gold, NumericConfig{},
                           EquivalenceMode::strict);
    CHECK(metrics.exec_acc == 0.0);
    CHECK(metrics.mismatch_histogram.at("percent_vs_fraction") == 1);
  }
}

TEST_CASE("prog_acc <= exec_acc when gold programs execute to gold answers") {
  testutil::Rng rng(404);
  testutil::GeneratorOptions clean;
  clean.unknown_constant = 0.0;
  clean.absent_row = 0.0;
  clean.none_in_arithmetic = 0.0;
  clean.rowref_in_arithmetic = 0.0;
  clean.literal_zero_divisor = 0.0;
  clean.bad_table_args = 0.0;

  for (int fixture = 0; fixture < 50; ++fixture) {
    std::vector<GoldExample> gold;
    std::vector<GeneratorPrediction> preds;
    const std::size_t examples = 4 + rng.index(8);
    for (std::size_t i = 0; i < examples; ++i) {
      GoldExample example;
      example.example_id = "ex" + std::to_string(i);
      example.env = testutil::random_environment(rng);
      Program program;
      while (true) {
        program = testutil::random_program(rng, 3, clean);
        const auto outcome = execute_checked(program, example.env);
        if (const auto* result = std::get_if<ExecutionResult>(&outcome)) {
          if (result->value.is_number() &&
              std::fabs(result->value.number) < 1e12) {
            example.answer = result->value.number;
            break;
          }
          if (!result->value.is_number()) {
            example.answer = std::string(result->value.to_string());
            break;
          }
        }
      }
      example.program = program;

      const double roll = rng.real(0.0, 1.0);
      if (roll < 0.35) {
        preds.push_back({example.example_id, "m", serialize_program(program)});
      } else if (roll < 0.55) {
        Program commuted = program;
        for (auto& step : commuted.steps)
          if (operator_info(step.op).commutative)
            std::swap(step.arg1, step.arg2);
        preds.push_back(
            {example.example_id, "m", serialize_program(commuted)});
      } else if (roll < 0.8) {
        preds.push_back({example.example_id, "m",
                         serialize_program(testutil::random_program(rng, 3))});
      } else if (roll < 0.9) {
        preds.push_back({example.example_id, "m", "add(1,"});
      }  // else: missing prediction
      gold.push_back(std::move(example));
    }
    for (const auto mode :
         {EquivalenceMode::strict, EquivalenceMode::commutative}) {
      const GeneratorMetrics metrics =
          evaluate_generator(preds, gold, NumericConfig{}, mode);
      CHECK(metrics.prog_acc <= metrics.exec_acc);
      for (const auto& outcome : metrics.per_example)
        CHECK((!outcome.prog_ok || outcome.exec_ok));
    }
  }
}

TEST_CASE("recall and precision at k") {
  const std::vector<std::string> ranked = {"t5", "t0", "t2"};
  const std::set<std::string> gold = {"t2", "t5"};
  CHECK(recall_at_k(ranked, gold, 3) == 1.0);
  CHECK(recall_at_k({"t5", "t0", "t1"}, gold, 3) == 0.5);
  CHECK(precision_at_k(ranked, gold, 3) == doctest::Approx(2.0 / 3.0));
  CHECK(precision_at_k(ranked, gold, 5) == doctest::Approx(2.0 / 5.0));
  CHECK(thrown_kind([&] { recall_at_k(ranked, {}, 3); }) ==
        ErrorKind::EmptyGold);
}

TEST_CASE("recall monotone in k; precision times k monotone") {
  testutil::Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> ranked;
    const std::size_t n = 1 + rng.index(20);
    for (std::size_t i = 0; i < n; ++i) ranked.push_back("f" + std::to_string(i));
    std::shuffle(ranked.begin(), ranked.end(), rng.engine());
    std::set<std::string> gold;
    const std::size_t gold_count = 1 + rng.index(4);
    while (gold.size() < gold_count)
      gold.insert("f" + std::to_string(rng.index(n + 4)));

    double previous_recall = 0.0, previous_hits = 0.0;
    for (std::size_t k = 1; k <= n + 2; ++k) {
      const double recall = recall_at_k(ranked, gold, k);
      const double hits = precision_at_k(ranked, gold, k) * static_cast<double>(k);
      CHECK(recall >= previous_recall);
      CHECK(hits >= previous_hits - 1e-9);
      previous_recall = recall;
      previous_hits = hits;
    }
    CHECK(recall_at_k(ranked, gold, 5) >= recall_at_k(ranked, gold, 3));
  }
}

TEST_CASE("precision@3 under perfect recall is bounded by mean gold size / 3") {
  // 71 examples with 2 gold facts + 29 with 1 -> mean gold size 1.71; with
  // every gold fact ranked in the top 3, mean precision@3 is 1.71 / 3.
  std::map<std::string, std::vector<std::string>> rankings;
  std::map<std::string, std::set<std::string>> gold;
  for (int i = 0; i < 100; ++i) {
    const std::string id = "e" + std::to_string(i);
    rankings[id] = {"g0", "g1", "pad"};
    gold[id] = i < 71 ? std::set<std::string>{"g0", "g1"}
                      : std::set<std::string>{"g0"};
  }
  const RetrieverMetrics metrics = evaluate_retriever(rankings, gold, {3});
  CHECK(metrics.recall_at.at(3) == 1.0);
  CHECK(metrics.precision_at.at(3) == doctest::Approx(1.71 / 3.0));
  CHECK(metrics.precision_at.at(3) == doctest::Approx(0.57));
}

TEST_CASE("selection metrics use the selection size as denominator") {
  const std::set<std::string> gold = {"a", "b"};
  const SelectionMetrics two = selection_metrics({"a", "x"}, gold);
  CHECK(two.precision == 0.5);
  CHECK(two.recall == 0.5);
  const SelectionMetrics empty = selection_metrics({}, gold);
  CHECK(empty.precision == 0.0);
  CHECK(empty.recall == 0.0);
}

TEST_CASE("auc hand-worked values and edge cases") {
  CHECK(auc({0.9, 0.8, 0.7, 0.1}, {1, 0, 1, 0}) == 0.75);
  CHECK(auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == 1.0);
  CHECK(auc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == 0.5);
  CHECK(thrown_kind([] { auc({0.1, 0.2}, {1, 1}); }) ==
        ErrorKind::DegenerateLabels);
  CHECK(thrown_kind([] { auc({0.1}, {1, 0}); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("auc equals brute force exactly on random instances") {
  testutil::Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(199);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      // coarse grid forces plenty of ties
      scores[i] = rng.index(10) / 10.0;
      labels[i] = rng.chance(0.4) ? 1 : 0;
    }
    labels[0] = 1;
    labels[n - 1] = 0;
    CHECK(auc(scores, labels) == brute_force_auc(scores, labels));
  }
}

TEST_CASE("overlap_report counts every region") {
  const OverlapReport two = overlap_report(
      {{"A", {"1", "2"}}, {"B", {"2", "3"}}});
  CHECK(two.region_counts.at("A") == 1);
  CHECK(two.region_counts.at("B") == 1);
  CHECK(two.region_counts.at("A&B") == 1);
  CHECK(two.total == 3);

  const OverlapReport same = overlap_report(
      {{"A", {"1", "2"}}, {"B", {"1", "2"}}});
  CHECK(same.region_counts.at("A&B") == 2);
  CHECK(same.region_counts.at("A") == 0);
  CHECK(same.region_counts.at("B") == 0);

  CHECK(thrown_kind([] { overlap_report({{"A", {}}}); }) ==
        ErrorKind::ModelSetMismatch);
}

TEST_CASE("overlap regions partition the union for three random sets") {
  testutil::Rng rng(64);
  for (int trial = 0; trial < 200; ++trial) {
    std::map<std::string, std::set<std::string>> hits;
    for (const char* model : {"A", "B", "C"}) {
      std::set<std::string> ids;
      const std::size_t count = rng.index(12);
      for (std::size_t i = 0; i < count; ++i)
        ids.insert("i" + std::to_string(rng.index(16)));
      hits[model] = std::move(ids);
    }
    const OverlapReport report = overlap_report(hits);
    CHECK(report.region_counts.size() == 7);

    std::set<std::string> expected_union;
    for (const auto& [model, ids] : hits)
      expected_union.insert(ids.begin(), ids.end());
    std::size_t sum = 0;
    for (const auto& [key, count] : report.region_counts) sum += count;
    CHECK(sum == expected_union.size());
    CHECK(report.total == expected_union.size());

    // spot-check one region against direct membership filtering
    std::size_t only_a = 0;
    for (const auto& item : expected_union)
      if (hits["A"].count(item) && !hits["B"].count(item) &&
          !hits["C"].count(item))
        ++only_a;
    CHECK(report.region_counts.at("A") == only_a);
  }
}

TEST_CASE("evaluate_retriever averages and skips empty gold") {
  std::map<std::string, std::vector<std::string>> rankings = {
      {"e1", {"a", "b", "c"}},
      {"e2", {"x", "y", "z"}},
      {"e3", {"q"}},
  };
  std::map<std::string, std::set<std::string>> gold = {
      {"e1", {"a"}}, {"e2", {"z"}}, {"e3", {}}};
  const RetrieverMetrics metrics = evaluate_retriever(rankings, gold, {1, 3});
  CHECK(metrics.n == 2);
  CHECK(metrics.skipped == 1);
  CHECK(metrics.recall_at.at(1) == 0.5);   // e1 hit at 1, e2 miss
  CHECK(metrics.recall_at.at(3) == 1.0);
  CHECK(metrics.precision_at.at(3) == doctest::Approx(1.0 / 3.0));
}
