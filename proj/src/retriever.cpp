#include "finprog/retriever.hpp"

#include <algorithm>
#include <cmath>

namespace finprog {

const char* fact_origin_name(FactOrigin origin) {
  switch (origin) {
    case FactOrigin::pre_text: return "pre_text";
    case FactOrigin::table: return "table";
    case FactOrigin::post_text: return "post_text";
  }
  return "unknown";
}

std::string linearize_table_row(const std::vector<std::string>& header,
                                const std::vector<std::string>& row) {
  if (header.size() != row.size())
    throw Error(ErrorKind::LengthMismatch,
                "header has " + std::to_string(header.size()) +
                    " cells, row has " + std::to_string(row.size()));
  std::string out;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (header[j].empty()) continue;
    if (!out.empty()) out += " ";
    out += "the " + row[0] + " of " + header[j] + " is " + row[j] + " ;";
  }
  if (out.empty())
    throw Error(ErrorKind::EmptyLinearization,
                "row \"" + (row.empty() ? std::string() : row[0]) +
                    "\" linearizes to nothing");
  return out;
}

namespace {

// Real tables are ragged now and then; fall back to the row name rather
// than dropping the fact, since fact ids must track row positions.
std::string lenient_linearize(const std::vector<std::string>& header,
                              const std::vector<std::string>& row) {
  if (row.empty()) return "";
  std::string out;
  const std::size_t columns = std::min(header.size(), row.size());
  for (std::size_t j = 1; j < columns; ++j) {
    if (header[j].empty()) continue;
    if (!out.empty()) out += " ";
    out += "the " + row[0] + " of " + header[j] + " is " + row[j] + " ;";
  }
  return out.empty() ? row[0] : out;
}

}  // namespace

std::vector<Fact> extract_facts(const ReportText& report, TableIdScheme scheme) {
  std::vector<Fact> facts;
  std::size_t ordinal = 0;
  std::size_t text_index = 0;

  for (const auto& sentence : report.pre_text)
    facts.push_back({"text_" + std::to_string(text_index++), sentence,
                     FactOrigin::pre_text, ordinal++});

  if (report.table.size() >= 2) {
    const auto& header = report.table[0];
    for (std::size_t r = 1; r < report.table.size(); ++r) {
      const std::size_t id_index =
          scheme == TableIdScheme::data_rows_from_zero ? r - 1 : r;
      facts.push_back({"table_" + std::to_string(id_index),
                       lenient_linearize(header, report.table[r]),
                       FactOrigin::table, ordinal++});
    }
  }

  for (const auto& sentence : report.post_text)
    facts.push_back({"text_" + std::to_string(text_index++), sentence,
                     FactOrigin::post_text, ordinal++});

  if (facts.empty())
    throw Error(ErrorKind::EmptyReport, "report contains no facts");
  return facts;
}

std::vector<Window> make_windows(std::size_t fact_count, std::size_t n,
                                 bool shift_last) {
  if (fact_count < 1 || n < 2)
    throw Error(ErrorKind::SchemaViolation,
                "make_windows needs fact_count >= 1 and n >= 2");
  const std::size_t step = n / 2;
  std::vector<Window> windows;
  std::size_t start = 0;
  while (true) {
    std::size_t end = std::min(start + n, fact_count);
    if (shift_last && end == fact_count && end - start < n && fact_count >= n)
      start = fact_count - n;
    windows.push_back({start, end});
    if (end == fact_count) break;
    start += step;
  }
  return windows;
}

std::map<std::string, double> aggregate_window_scores(
    const std::vector<WindowScores>& windows,
    const std::vector<std::string>& fact_ids) {
  std::map<std::string, double> best;
  for (const auto& window : windows) {
    for (const auto& [fact, scores] : window.start_end) {
      const double sum = scores.first + scores.second;
      const auto it = best.find(fact);
      if (it == best.end() || sum > it->second) best[fact] = sum;
    }
  }
  std::map<std::string, double> out;
  for (const auto& fact : fact_ids) {
    const auto it = best.find(fact);
    if (it == best.end())
      throw Error(ErrorKind::UncoveredFact,
                  "fact \"" + fact + "\" appears in no window");
    out[fact] = it->second;
  }
  return out;
}

PromptInstance fill_prompt(const std::string& tmpl, const std::string& question,
                           const std::string& fact) {
  struct Site {
    const char* name;
    std::size_t pos;
    const std::string* replacement;  // nullptr: leave the placeholder
  };
  Site sites[3] = {{"{question}", 0, &question},
                   {"{fact}", 0, &fact},
                   {"{mask}", 0, nullptr}};
  for (auto& site : sites) {
    const std::string needle = site.name;
    const std::size_t first = tmpl.find(needle);
    if (first == std::string::npos)
      throw Error(ErrorKind::MissingPlaceholder,
                  "template lacks " + needle);
    if (tmpl.find(needle, first + needle.size()) != std::string::npos)
      throw Error(ErrorKind::DuplicatePlaceholder,
                  "template repeats " + needle);
    site.pos = first;
  }
  std::sort(std::begin(sites), std::end(sites),
            [](const Site& a, const Site& b) { return a.pos < b.pos; });

  PromptInstance instance;
  std::size_t cursor = 0;
  auto span_for = [&](const Site& site) -> PromptInstance::Span* {
    if (site.replacement == &question) return &instance.question_span;
    if (site.replacement == &fact) return &instance.fact_span;
    return &instance.mask_position;
  };
  for (const auto& site : sites) {
    instance.text.append(tmpl, cursor, site.pos - cursor);
    const std::string insert =
        site.replacement ? *site.replacement : std::string(site.name);
    PromptInstance::Span* span = span_for(site);
    span->begin = instance.text.size();
    instance.text += insert;
    span->end = instance.text.size();
    cursor = site.pos + std::string(site.name).size();
  }
  instance.text.append(tmpl, cursor, std::string::npos);
  return instance;
}

std::vector<std::string> rank_and_select(
    const std::map<std::string, double>& scores, std::size_t k) {
  std::vector<std::pair<std::string, double>> entries(scores.begin(),
                                                      scores.end());
  for (const auto& [fact, score] : entries)
    if (!std::isfinite(score))
      throw Error(ErrorKind::NonFiniteFeature,
                  "non-finite score for fact \"" + fact + "\"");
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  std::vector<std::string> out;
  const std::size_t limit = std::min(k, entries.size());
  out.reserve(limit);
  for (std::size_t i = 0; i < limit; ++i) out.push_back(entries[i].first);
  return out;
}

}  // namespace finprog
