#include "finprog/executor.hpp"

#include <algorithm>
#include <cmath>

#include "finprog/numeric.hpp"

namespace finprog {

std::string Value::to_string() const {
  if (kind == Kind::number) return format_number(number);
  return truth ? "yes" : "no";
}

void Environment::add_row(const std::string& name,
                          std::vector<std::string> cells) {
  const std::string key = lower_collapse(name);
  if (row_index_.count(key)) return;  // first occurrence wins
  row_index_.emplace(key, rows_.size());
  rows_.emplace_back(name, std::move(cells));
}

void Environment::set_constant(const std::string& name, double value) {
  constants_[name] = value;
}

Environment Environment::from_table(
    const std::vector<std::vector<std::string>>& table,
    const NumericConfig& cfg) {
  Environment env;
  env.numeric = cfg;
  for (std::size_t r = 1; r < table.size(); ++r) {
    const auto& row = table[r];
    if (row.empty()) continue;
    env.add_row(row[0], {row.begin() + 1, row.end()});
  }
  return env;
}

const std::vector<std::string>* Environment::find_row(
    const std::string& name) const {
  const auto it = row_index_.find(lower_collapse(name));
  if (it == row_index_.end()) return nullptr;
  return &rows_[it->second].second;
}

std::optional<double> Environment::find_constant(const std::string& name) const {
  const auto it = constants_.find(name);
  if (it == constants_.end()) return std::nullopt;
  return it->second;
}

std::string Resolved::describe() const {
  switch (kind) {
    case Kind::value:
      return value.to_string();
    case Kind::row: {
      std::string out = "[";
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ", ";
        out += format_number(row[i]);
      }
      return out + "]";
    }
    case Kind::none:
      return "none";
  }
  return "";
}

double parse_cell_number(const std::string& text) {
  const auto value = parse_financial_number(text);
  if (!value)
    throw Error(ErrorKind::NotANumber,
                "\"" + text + "\" is not a number");
  return *value;
}

Resolved resolve_argument(const Argument& arg, const Environment& env,
                          const StepMemory& memory) {
  return std::visit(
      [&](const auto& a) -> Resolved {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, Literal>) {
          return Resolved::from_value(Value::num(a.value));
        } else if constexpr (std::is_same_v<T, Constant>) {
          if (const auto v = env.find_constant(a.name))
            return Resolved::from_value(Value::num(*v));
          if (a.value) return Resolved::from_value(Value::num(*a.value));
          throw Error(ErrorKind::UnknownConstant,
                      "unknown constant \"" + a.name + "\"");
        } else if constexpr (std::is_same_v<T, StepRef>) {
          if (a.index >= memory.results.size())
            throw Error(ErrorKind::ForwardStepRef,
                        "#" + std::to_string(a.index) +
                            " has not been computed yet");
          return Resolved::from_value(memory.results[a.index]);
        } else if constexpr (std::is_same_v<T, RowRef>) {
          const auto* cells = env.find_row(a.name);
          if (!cells)
            throw Error(ErrorKind::RowNotFound,
                        "no table row named \"" + a.name + "\"");
          std::vector<double> values;
          values.reserve(cells->size());
          for (const auto& cell : *cells)
            if (const auto v = parse_financial_number(cell))
              values.push_back(*v);
          if (values.empty())
            throw Error(ErrorKind::EmptyRow,
                        "row \"" + a.name + "\" has no numeric cells");
          return Resolved::from_row(std::move(values));
        } else {
          return Resolved::none();
        }
      },
      arg);
}

namespace {

double require_number(const Resolved& operand, const char* side) {
  if (operand.kind == Resolved::Kind::row)
    throw Error(ErrorKind::TypeMismatch,
                std::string(side) + " operand is a table row, expected a number");
  if (operand.kind == Resolved::Kind::none)
    throw Error(ErrorKind::TypeMismatch,
                std::string(side) + " operand is none, expected a number");
  if (!operand.value.is_number())
    throw Error(ErrorKind::TypeMismatch,
                std::string(side) + " operand is yes/no, expected a number");
  return operand.value.number;
}

Value apply_operator(Op op, const Resolved& lhs, const Resolved& rhs,
                     const NumericConfig& cfg) {
  const OperatorInfo& info = operator_info(op);
  if (info.table) {
    if (lhs.kind != Resolved::Kind::row)
      throw Error(ErrorKind::TypeMismatch,
                  std::string(info.name) + " expects a table row first");
    if (rhs.kind != Resolved::Kind::none)
      throw Error(ErrorKind::TypeMismatch,
                  std::string(info.name) + " expects none as second argument");
    const std::vector<double>& cells = lhs.row;
    double acc = cells[0];
    switch (op) {
      case Op::table_sum:
      case Op::table_average:
        for (std::size_t i = 1; i < cells.size(); ++i) acc += cells[i];
        if (op == Op::table_average) acc /= static_cast<double>(cells.size());
        break;
      case Op::table_max:
        for (std::size_t i = 1; i < cells.size(); ++i)
          acc = std::max(acc, cells[i]);
        break;
      case Op::table_min:
        for (std::size_t i = 1; i < cells.size(); ++i)
          acc = std::min(acc, cells[i]);
        break;
      default:
        break;
    }
    return Value::num(acc);
  }

  const double a = require_number(lhs, "left");
  const double b = require_number(rhs, "right");
  switch (op) {
    case Op::add:
      return Value::num(a + b);
    case Op::subtract:
      return Value::num(a - b);
    case Op::multiply:
      return Value::num(a * b);
    case Op::divide:
      if (std::fabs(b) < cfg.div_epsilon)
        throw Error(ErrorKind::DivisionByZero,
                    "divisor " + format_number(b) + " is below " +
                        format_number(cfg.div_epsilon));
      return Value::num(a / b);
    case Op::exp: {
      const double r = std::pow(a, b);
      if (!std::isfinite(r))
        throw Error(ErrorKind::NumericDomain,
                    "exp(" + format_number(a) + ", " + format_number(b) +
                        ") is not a finite real");
      return Value::num(r);
    }
    case Op::greater:
      return Value::yes_no(a > b);
    default:
      break;
  }
  throw Error(ErrorKind::TypeMismatch, "unhandled operator");
}

}  // namespace

Value execute_step(const Step& step, const Environment& env,
                   const StepMemory& memory) {
  const Resolved lhs = resolve_argument(step.arg1, env, memory);
  const Resolved rhs = resolve_argument(step.arg2, env, memory);
  return apply_operator(step.op, lhs, rhs, env.numeric);
}

std::variant<ExecutionResult, ExecutionError> execute_checked(
    const Program& program, const Environment& env) {
  ExecutionResult result;
  StepMemory memory;
  if (program.steps.empty())
    return ExecutionError{ErrorKind::MalformedProgram, 0, "empty program"};
  for (std::size_t i = 0; i < program.steps.size(); ++i) {
    const Step& step = program.steps[i];
    try {
      const Resolved lhs = resolve_argument(step.arg1, env, memory);
      const Resolved rhs = resolve_argument(step.arg2, env, memory);
      const Value value = apply_operator(step.op, lhs, rhs, env.numeric);
      memory.results.push_back(value);
      result.trace.push_back({i, std::string(operator_info(step.op).name),
                              lhs.describe(), rhs.describe(), value});
    } catch (const Error& e) {
      return ExecutionError{e.kind(), i, e.what()};
    }
  }
  result.value = memory.results.back();
  return result;
}

ExecutionResult execute_program(const Program& program, const Environment& env) {
  auto outcome = execute_checked(program, env);
  if (auto* err = std::get_if<ExecutionError>(&outcome))
    throw Error(err->kind,
                "step " + std::to_string(err->step_index) + ": " + err->message);
  return std::get<ExecutionResult>(std::move(outcome));
}

bool answers_match(const Value& a, const Value& b, const NumericConfig& cfg) {
  if (a.kind != b.kind) return false;
  if (a.kind == Value::Kind::boolean) return a.truth == b.truth;
  return nearly_equal(a.number, b.number, cfg.abs_tol, cfg.rel_tol);
}

bool answers_match(const std::string& gold, const Value& value,
                   const NumericConfig& cfg) {
  const std::string norm = lower_collapse(gold);
  if (norm == "yes" || norm == "no")
    return answers_match(Value::yes_no(norm == "yes"), value, cfg);
  if (const auto number = parse_financial_number(gold))
    return answers_match(Value::num(*number), value, cfg);
  return false;
}

}  // namespace finprog
