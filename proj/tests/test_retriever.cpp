#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <optional>
#include <set>

#include "finprog/numeric.hpp"
#include "finprog/retriever.hpp"
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

}  // namespace

TEST_CASE("extract_facts orders pre_text, table rows, post_text") {
  ReportText report;
  report.pre_text = {"first sentence .", "second sentence ."};
  report.table = {{"", "2008", "2009"},
                  {"revenue", "100", "120"},
                  {"costs", "80", "90"}};
  report.post_text = {"closing sentence ."};

  const auto facts = extract_facts(report);
  REQUIRE(facts.size() == 5);
  CHECK(facts[0].fact_id == "text_0");
  CHECK(facts[1].fact_id == "text_1");
  CHECK(facts[2].fact_id == "table_0");
  CHECK(facts[3].fact_id == "table_1");
  CHECK(facts[4].fact_id == "text_2");
  CHECK(facts[2].text == "the revenue of 2008 is 100 ; the revenue of 2009 is 120 ;");
  CHECK(facts[4].origin == FactOrigin::post_text);
  for (std::size_t i = 0; i < facts.size(); ++i) CHECK(facts[i].ordinal == i);

  SUBCASE("raw_row_index numbering starts table ids at 1") {
    const auto raw = extract_facts(report, TableIdScheme::raw_row_index);
    CHECK(raw[2].fact_id == "table_1");
    CHECK(raw[3].fact_id == "table_2");
  }
}

TEST_CASE("extract_facts with an empty table uses text only") {
  ReportText report;
  report.pre_text = {"only text ."};
  const auto facts = extract_facts(report);
  REQUIRE(facts.size() == 1);
  CHECK(facts[0].fact_id == "text_0");

  ReportText empty;
  CHECK(thrown_kind([&] { extract_facts(empty); }) == ErrorKind::EmptyReport);
}

TEST_CASE("extract_facts is id-stable across runs") {
  testutil::Rng rng(5);
  ReportText report;
  for (int i = 0; i < 6; ++i)
    report.pre_text.push_back("sentence " + std::to_string(rng.index(100)));
  report.table = {{"", "a", "b"}, {"r1", "1", "2"}, {"r2", "3", "4"}};
  report.post_text = {"tail"};
  const auto first = extract_facts(report);
  const auto second = extract_facts(report);
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].fact_id == second[i].fact_id);
    CHECK(first[i].text == second[i].text);
  }
}

TEST_CASE("linearize_table_row follows the template") {
  CHECK(linearize_table_row({"", "2008", "2009"}, {"revenue", "100", "120"}) ==
        "the revenue of 2008 is 100 ; the revenue of 2009 is 120 ;");
  CHECK(linearize_table_row({"", "", "2009"}, {"revenue", "100", "120"}) ==
        "the revenue of 2009 is 120 ;");
  CHECK(thrown_kind([] { linearize_table_row({"", "a"}, {"r"}); }) ==
        ErrorKind::LengthMismatch);
  CHECK(thrown_kind([] { linearize_table_row({"revenue"}, {"revenue"}); }) ==
        ErrorKind::EmptyLinearization);
  CHECK(thrown_kind([] {
          linearize_table_row({"", "", ""}, {"r", "1", "2"});
        }) == ErrorKind::EmptyLinearization);
}

TEST_CASE("linearized values round-trip through the cell parser") {
  testutil::Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t columns = 2 + rng.index(5);
    std::vector<std::string> header = {""};
    std::vector<std::string> row = {"metric"};
    std::vector<double> values;
    for (std::size_t c = 1; c < columns; ++c) {
      header.push_back("year" + std::to_string(c));
      const double value = rng.integer(-5000, 5000) / 4.0;
      values.push_back(value);
      row.push_back(format_number(value));
    }
    const std::string text = linearize_table_row(header, row);
    // pull each "is <value> ;" back out and re-parse
    std::size_t cursor = 0;
    for (const double expected : values) {
      const std::size_t is_pos = text.find(" is ", cursor);
      REQUIRE(is_pos != std::string::npos);
      const std::size_t end = text.find(" ;", is_pos);
      const std::string cell = text.substr(is_pos + 4, end - is_pos - 4);
      CHECK(parse_financial_number(cell) == expected);
      cursor = end;
    }
  }
}

TEST_CASE("make_windows matches the worked examples") {
  CHECK(make_windows(10, 8) == std::vector<Window>{{0, 8}, {4, 10}});
  CHECK(make_windows(5, 8) == std::vector<Window>{{0, 5}});
  CHECK(make_windows(16, 8) == std::vector<Window>{{0, 8}, {4, 12}, {8, 16}});
  CHECK(make_windows(1, 2) == std::vector<Window>{{0, 1}});
  CHECK(make_windows(8, 8) == std::vector<Window>{{0, 8}});
}

TEST_CASE("make_windows can left-shift the final window") {
  CHECK(make_windows(10, 8, true) == std::vector<Window>{{0, 8}, {2, 10}});
  CHECK(make_windows(5, 8, true) == std::vector<Window>{{0, 5}});
}

TEST_CASE("window coverage over the full grid") {
  for (std::size_t n : {2, 4, 8, 16}) {
    for (std::size_t fact_count = 1; fact_count <= 64; ++fact_count) {
      const auto windows = make_windows(fact_count, n);
      std::vector<int> coverage(fact_count, 0);
      for (const auto& window : windows) {
        CHECK(window.start < window.end);
        CHECK(window.end <= fact_count);
        CHECK(window.end - window.start <= n);
        for (std::size_t i = window.start; i < window.end; ++i) ++coverage[i];
      }
      for (std::size_t i = 0; i < fact_count; ++i) CHECK(coverage[i] >= 1);
      if (fact_count > n) {
        // interior facts see at least two windows
        for (std::size_t i = n / 2; i + n / 2 < fact_count; ++i)
          CHECK(coverage[i] >= 2);
      }
    }
  }
}

TEST_CASE("aggregate_window_scores sums then maxes") {
  WindowScores first;
  first.start_end["f0"] = {0.2, 0.3};
  first.start_end["f1"] = {0.1, 0.2};
  WindowScores second;
  second.start_end["f1"] = {0.3, 0.2};
  second.start_end["f2"] = {0.05, 0.05};

  const auto scores =
      aggregate_window_scores({first, second}, {"f0", "f1", "f2"});
  CHECK(scores.at("f0") == doctest::Approx(0.5));
  CHECK(scores.at("f1") == doctest::Approx(0.5));  // max(0.3, 0.5)
  CHECK(scores.at("f2") == doctest::Approx(0.1));

  CHECK(thrown_kind([&] {
          aggregate_window_scores({first}, {"f0", "f9"});
        }) == ErrorKind::UncoveredFact);
}

TEST_CASE("aggregation is window-order invariant and monotone") {
  testutil::Rng rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<WindowScores> windows(2 + rng.index(4));
    std::vector<std::string> fact_ids;
    for (int f = 0; f < 6; ++f) {
      const std::string fact = "f" + std::to_string(f);
      fact_ids.push_back(fact);
      for (auto& window : windows)
        if (rng.chance(0.7))
          window.start_end[fact] = {rng.real(-1, 1), rng.real(-1, 1)};
      windows[rng.index(windows.size())].start_end.try_emplace(
          fact, rng.real(-1, 1), rng.real(-1, 1));  // guarantee coverage
    }
    const auto baseline = aggregate_window_scores(windows, fact_ids);

    std::shuffle(windows.begin(), windows.end(), rng.engine());
    CHECK(aggregate_window_scores(windows, fact_ids) == baseline);

    // raising one component never lowers any aggregate
    auto& bump_window = windows[rng.index(windows.size())];
    if (!bump_window.start_end.empty()) {
      auto it = bump_window.start_end.begin();
      std::advance(it, rng.index(bump_window.start_end.size()));
      it->second.first += rng.real(0.0, 1.0);
      const auto bumped = aggregate_window_scores(windows, fact_ids);
      for (const auto& [fact, score] : baseline)
        CHECK(bumped.at(fact) >= score - 1e-12);
    }
  }
}

TEST_CASE("fill_prompt substitutes question and fact, keeps the mask") {
  const std::string tmpl = "question: {question} fact: {fact} answer: {mask}";
  const PromptInstance instance = fill_prompt(tmpl, "Q", "F");
  CHECK(instance.text == "question: Q fact: F answer: {mask}");
  CHECK(instance.text.substr(instance.question_span.begin,
                             instance.question_span.end -
                                 instance.question_span.begin) == "Q");
  CHECK(instance.text.substr(instance.fact_span.begin,
                             instance.fact_span.end - instance.fact_span.begin) ==
        "F");
  CHECK(instance.text.substr(instance.mask_position.begin,
                             instance.mask_position.end -
                                 instance.mask_position.begin) == "{mask}");
}

TEST_CASE("fill_prompt validates placeholders") {
  CHECK(thrown_kind([] { fill_prompt("q {question} {mask}", "q", "f"); }) ==
        ErrorKind::MissingPlaceholder);
  CHECK(thrown_kind([] {
          fill_prompt("{question} {fact} {fact} {mask}", "q", "f");
        }) == ErrorKind::DuplicatePlaceholder);
}

TEST_CASE("fill_prompt length arithmetic and literal substitution") {
  testutil::Rng rng(44);
  const std::string tmpl = "Is \"{fact}\" useful for \"{question}\"? {mask}";
  for (int trial = 0; trial < 100; ++trial) {
    std::string question, fact;
    const int q_len = rng.index(30);
    for (int i = 0; i < q_len; ++i)
      question += static_cast<char>('a' + rng.index(26));
    const int f_len = rng.index(30);
    for (int i = 0; i < f_len; ++i) fact += static_cast<char>('a' + rng.index(26));
    if (rng.chance(0.3)) question += " {braces} pass through";
    const PromptInstance instance = fill_prompt(tmpl, question, fact);
    CHECK(instance.text.size() == tmpl.size() - std::string("{question}").size() -
                                      std::string("{fact}").size() +
                                      question.size() + fact.size());
  }
}

TEST_CASE("rank_and_select orders by score then id") {
  const std::map<std::string, double> scores = {
      {"t0", 0.1}, {"t1", 0.9}, {"t2", 0.5}};
  CHECK(rank_and_select(scores, 2) == std::vector<std::string>{"t1", "t2"});
  CHECK(rank_and_select(scores, 10) ==
        std::vector<std::string>{"t1", "t2", "t0"});

  const std::map<std::string, double> tied = {
      {"b", 0.5}, {"a", 0.5}, {"c", 0.5}};
  CHECK(rank_and_select(tied, 3) == std::vector<std::string>{"a", "b", "c"});

  CHECK(thrown_kind([] {
          rank_and_select({{"x", std::numeric_limits<double>::quiet_NaN()}}, 1);
        }) == ErrorKind::NonFiniteFeature);
}

TEST_CASE("rank_and_select output is a prefix of the full order") {
  testutil::Rng rng(66);
  for (int trial = 0; trial < 200; ++trial) {
    std::map<std::string, double> scores;
    const std::size_t n = 1 + rng.index(12);
    for (std::size_t i = 0; i < n; ++i)
      scores["f" + std::to_string(i)] = rng.index(5) / 5.0;
    const auto full = rank_and_select(scores, n);
    const std::size_t k = 1 + rng.index(n + 3);
    const auto top = rank_and_select(scores, k);
    REQUIRE(top.size() == std::min(k, n));
    for (std::size_t i = 0; i < top.size(); ++i) CHECK(top[i] == full[i]);
  }
}
