#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "finprog/error.hpp"

namespace finprog {

// Turns a report into an ordered fact list and handles the plumbing around
// scorers: table linearization, sliding windows, prompt templates and
// score-to-ranking conversion.

enum class FactOrigin { pre_text, table, post_text };
const char* fact_origin_name(FactOrigin origin);

struct Fact {
  std::string fact_id;  // "text_<i>" or "table_<i>"
  std::string text;
  FactOrigin origin = FactOrigin::pre_text;
  std::size_t ordinal = 0;  // document order across all origins
};

struct ReportText {
  std::vector<std::string> pre_text;
  std::vector<std::vector<std::string>> table;  // first row is the header
  std::vector<std::string> post_text;
};

// Fact-id numbering for table rows. data_rows_from_zero ids the first data
// row as table_0; raw_row_index keeps the row's index in the raw table
// (first data row is table_1), matching datasets that count the header.
enum class TableIdScheme { data_rows_from_zero, raw_row_index };

// One fact per pre_text sentence, per table data row (linearized), per
// post_text sentence, in document order. text_<i> ids continue across
// pre_text and post_text. Errors: EmptyReport.
std::vector<Fact> extract_facts(
    const ReportText& report,
    TableIdScheme scheme = TableIdScheme::data_rows_from_zero);

// "the {row[0]} of {header[j]} is {row[j]} ;" joined over columns j >= 1
// with non-empty headers. Errors: LengthMismatch, EmptyLinearization.
std::string linearize_table_row(const std::vector<std::string>& header,
                                const std::vector<std::string>& row);

struct Window {
  std::size_t start;
  std::size_t end;  // exclusive
  friend bool operator==(const Window&, const Window&) = default;
};

// Windows of up to n facts starting at 0 with step floor(n/2); the last
// window is clipped at fact_count (or shifted left to keep full width when
// shift_last is set and fact_count >= n). Every fact lands in at least one
// window.
std::vector<Window> make_windows(std::size_t fact_count, std::size_t n = 8,
                                 bool shift_last = false);

// Per-window (start, end) scores for the facts it covered.
struct WindowScores {
  std::map<std::string, std::pair<double, double>> start_end;
};

// Fact score within a window is start + end; across windows the maximum
// wins. Every id in fact_ids must be covered. Errors: UncoveredFact.
std::map<std::string, double> aggregate_window_scores(
    const std::vector<WindowScores>& windows,
    const std::vector<std::string>& fact_ids);

struct PromptInstance {
  struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive
  };
  std::string text;
  Span question_span;
  Span fact_span;
  Span mask_position;  // the untouched "{mask}" site
};

// Substitutes {question} and {fact} literally and records where everything
// landed; {mask} stays in place for the scorer. Each placeholder must
// appear exactly once. Errors: MissingPlaceholder, DuplicatePlaceholder.
PromptInstance fill_prompt(const std::string& tmpl, const std::string& question,
                           const std::string& fact);

// Descending score, ties by fact id ascending, first min(k, count) ids.
// Errors: NonFiniteFeature.
std::vector<std::string> rank_and_select(
    const std::map<std::string, double>& scores, std::size_t k = 3);

}  // namespace finprog
