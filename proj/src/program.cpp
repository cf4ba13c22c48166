#include "finprog/program.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <tuple>

#include "finprog/numeric.hpp"

namespace finprog {

namespace {

constexpr std::array<OperatorInfo, 10> kOperators{{
    {Op::add, "add", true, false},
    {Op::subtract, "subtract", false, false},
    {Op::multiply, "multiply", true, false},
    {Op::divide, "divide", false, false},
    {Op::exp, "exp", false, false},
    {Op::greater, "greater", false, false},
    {Op::table_sum, "table_sum", false, true},
    {Op::table_average, "table_average", false, true},
    {Op::table_max, "table_max", false, true},
    {Op::table_min, "table_min", false, true},
}};

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(text[0])) && text[0] != '_')
    return false;
  return std::all_of(text.begin(), text.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_';
  });
}

bool all_digits(std::string_view text) {
  return !text.empty() &&
         std::all_of(text.begin(), text.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace

const OperatorInfo& operator_info(Op op) {
  return kOperators[static_cast<std::size_t>(op)];
}

std::optional<Op> lookup_operator(std::string_view name) {
  for (const auto& info : kOperators)
    if (info.name == name) return info.op;
  return std::nullopt;
}

std::optional<double> constant_lexicon_value(std::string_view name) {
  constexpr std::string_view prefix = "const_";
  if (name.substr(0, prefix.size()) != prefix) return std::nullopt;
  std::string_view body = name.substr(prefix.size());
  bool negative = false;
  if (!body.empty() && body[0] == 'm') {
    negative = true;
    body = body.substr(1);
  }
  if (!all_digits(body)) return std::nullopt;
  double value = 0.0;
  for (char c : body) value = value * 10.0 + (c - '0');
  return negative ? -value : value;
}

std::vector<std::string> tokenize_program(const std::string& text) {
  std::vector<std::string> tokens;
  const std::size_t n = text.size();
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };

  skip_ws();
  if (i == n) throw Error(ErrorKind::MalformedProgram, "empty program");

  while (true) {
    skip_ws();
    if (i == n)
      throw Error(ErrorKind::MalformedProgram,
                  "trailing comma with no operation after it");

    const std::size_t open = text.find('(', i);
    if (open == std::string::npos)
      throw Error(ErrorKind::MalformedProgram,
                  "expected '(' after operator name near \"" +
                      text.substr(i) + "\"");
    const std::string head = trim(text.substr(i, open - i));
    if (!is_identifier(head))
      throw Error(ErrorKind::MalformedProgram,
                  "bad operator name \"" + head + "\"");
    tokens.push_back(head + "(");
    i = open + 1;

    // Arguments: split on commas at depth zero; the call's closing paren is
    // the first unmatched ')'. Row-name arguments may contain balanced
    // parentheses and internal spaces.
    std::string current;
    int depth = 0;
    bool closed = false;
    while (i < n && !closed) {
      const char c = text[i];
      if (c == '(') {
        ++depth;
        current.push_back(c);
      } else if (c == ')' && depth > 0) {
        --depth;
        current.push_back(c);
      } else if (c == ')') {
        const std::string arg = trim(current);
        if (arg.empty())
          throw Error(ErrorKind::MalformedProgram, "empty argument");
        tokens.push_back(arg);
        tokens.push_back(")");
        closed = true;
      } else if (c == ',' && depth == 0) {
        const std::string arg = trim(current);
        if (arg.empty())
          throw Error(ErrorKind::MalformedProgram, "empty argument");
        tokens.push_back(arg);
        current.clear();
      } else {
        current.push_back(c);
      }
      ++i;
    }
    if (!closed)
      throw Error(ErrorKind::MalformedProgram, "unbalanced parentheses");

    skip_ws();
    if (i == n) break;
    if (text[i] != ',')
      throw Error(ErrorKind::MalformedProgram,
                  "missing comma between operations near \"" +
                      text.substr(i) + "\"");
    ++i;  // next call follows
  }

  tokens.emplace_back("EOF");
  return tokens;
}

Argument parse_argument(const std::string& token) {
  if (token == "none") return NoneArg{};
  if (!token.empty() && token[0] == '#') {
    const std::string body = token.substr(1);
    if (!all_digits(body))
      throw Error(ErrorKind::BadStepRef,
                  "step reference \"" + token +
                      "\" is not '#' followed by a non-negative integer");
    std::size_t index = 0;
    for (char c : body) index = index * 10 + static_cast<std::size_t>(c - '0');
    return StepRef{index};
  }
  if (token.rfind("const_", 0) == 0)
    return Constant{token, constant_lexicon_value(token)};
  if (auto number = parse_financial_number(token)) return Literal{*number};
  return RowRef{token};
}

Program parse_program(const std::vector<std::string>& tokens) {
  if (tokens.empty() || tokens.back() != "EOF")
    throw Error(ErrorKind::MissingEOF, "token list does not end with EOF");
  if (tokens.size() < 5 || (tokens.size() - 1) % 4 != 0)
    throw Error(ErrorKind::MalformedProgram,
                "token count must be 4 per step plus EOF, got " +
                    std::to_string(tokens.size()));

  Program program;
  const std::size_t step_count = (tokens.size() - 1) / 4;
  program.steps.reserve(step_count);
  for (std::size_t j = 0; j < step_count; ++j) {
    const std::string& head = tokens[4 * j];
    const std::string& close = tokens[4 * j + 3];
    if (head.size() < 2 || head.back() != '(')
      throw Error(ErrorKind::MalformedProgram,
                  "expected operator token, got \"" + head + "\"");
    if (close != ")")
      throw Error(ErrorKind::MalformedProgram,
                  "expected \")\" as the fourth token of step " +
                      std::to_string(j));
    const std::string name = head.substr(0, head.size() - 1);
    const auto op = lookup_operator(name);
    if (!op)
      throw Error(ErrorKind::UnknownOperator,
                  "unknown operator \"" + name + "\"");

    Step step{*op, parse_argument(tokens[4 * j + 1]),
              parse_argument(tokens[4 * j + 2])};
    for (const Argument* arg : {&step.arg1, &step.arg2}) {
      if (const auto* ref = std::get_if<StepRef>(arg)) {
        if (ref->index >= j)
          throw Error(ErrorKind::ForwardStepRef,
                      "step " + std::to_string(j) + " references #" +
                          std::to_string(ref->index) +
                          ", which is not an earlier step");
      }
    }
    program.steps.push_back(std::move(step));
  }
  return program;
}

Program parse_program_text(const std::string& text) {
  return parse_program(tokenize_program(text));
}

std::string serialize_argument(const Argument& arg) {
  return std::visit(
      [](const auto& a) -> std::string {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, Literal>) return format_number(a.value);
        else if constexpr (std::is_same_v<T, Constant>) return a.name;
        else if constexpr (std::is_same_v<T, StepRef>)
          return "#" + std::to_string(a.index);
        else if constexpr (std::is_same_v<T, RowRef>) return a.name;
        else return "none";
      },
      arg);
}

std::string serialize_program(const Program& program) {
  std::string out;
  for (std::size_t j = 0; j < program.steps.size(); ++j) {
    const Step& step = program.steps[j];
    if (j > 0) out += ", ";
    out += operator_info(step.op).name;
    out += "(";
    out += serialize_argument(step.arg1);
    out += ", ";
    out += serialize_argument(step.arg2);
    out += ")";
  }
  return out;
}

std::vector<std::string> serialize_tokens(const Program& program) {
  std::vector<std::string> tokens;
  tokens.reserve(program.steps.size() * 4 + 1);
  for (const Step& step : program.steps) {
    tokens.push_back(std::string(operator_info(step.op).name) + "(");
    tokens.push_back(serialize_argument(step.arg1));
    tokens.push_back(serialize_argument(step.arg2));
    tokens.emplace_back(")");
  }
  tokens.emplace_back("EOF");
  return tokens;
}

namespace {

// Ordering key for commutative canonicalization: variant rank first, then a
// numeric component (literal/constant value, step index), then text.
std::tuple<int, double, std::string> argument_order_key(const Argument& arg) {
  return std::visit(
      [](const auto& a) -> std::tuple<int, double, std::string> {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, Literal>) return {0, a.value, ""};
        else if constexpr (std::is_same_v<T, Constant>)
          return {1, a.value.value_or(std::numeric_limits<double>::infinity()),
                  a.name};
        else if constexpr (std::is_same_v<T, StepRef>)
          return {2, static_cast<double>(a.index), ""};
        else if constexpr (std::is_same_v<T, RowRef>) return {3, 0.0, a.name};
        else return {4, 0.0, ""};
      },
      arg);
}

}  // namespace

Program canonicalize_program(const Program& program, EquivalenceMode mode) {
  Program out = program;
  if (mode == EquivalenceMode::strict) return out;
  for (Step& step : out.steps) {
    if (!operator_info(step.op).commutative) continue;
    if (argument_order_key(step.arg2) < argument_order_key(step.arg1))
      std::swap(step.arg1, step.arg2);
  }
  return out;
}

}  // namespace finprog
