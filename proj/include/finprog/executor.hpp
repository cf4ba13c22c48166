#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "finprog/error.hpp"
#include "finprog/program.hpp"

namespace finprog {

struct NumericConfig {
  double abs_tol = 1e-5;
  double rel_tol = 1e-5;
  double div_epsilon = 1e-12;
};

// A program result: a number or a yes/no truth value.
struct Value {
  enum class Kind { number, boolean };
  Kind kind = Kind::number;
  double number = 0.0;
  bool truth = false;

  static Value num(double v) { return {Kind::number, v, false}; }
  static Value yes_no(bool b) { return {Kind::boolean, 0.0, b}; }
  bool is_number() const { return kind == Kind::number; }
  std::string to_string() const;

  friend bool operator==(const Value& a, const Value& b) {
    if (a.kind != b.kind) return false;
    return a.kind == Kind::number ? a.number == b.number : a.truth == b.truth;
  }
};

// Numeric context a program runs against: table rows (name -> cell texts,
// insertion-ordered) and named constants. Row lookups lowercase the name
// and collapse whitespace; the first row wins when two names normalize to
// the same key. Constants fall back to the const_<digits> lexicon rule
// when not set explicitly.
class Environment {
 public:
  NumericConfig numeric;

  void add_row(const std::string& name, std::vector<std::string> cells);
  void set_constant(const std::string& name, double value);

  // Builds rows from a table whose first row is the header; each data
  // row contributes row[0] as the name and row[1..] as the cells.
  static Environment from_table(const std::vector<std::vector<std::string>>& table,
                                const NumericConfig& cfg = {});

  const std::vector<std::string>* find_row(const std::string& name) const;
  std::optional<double> find_constant(const std::string& name) const;
  const std::vector<std::pair<std::string, std::vector<std::string>>>& rows()
      const {
    return rows_;
  }

 private:
  std::vector<std::pair<std::string, std::vector<std::string>>> rows_;
  std::unordered_map<std::string, std::size_t> row_index_;
  std::map<std::string, double> constants_;
};

// Results of the steps executed so far, referenced as #0, #1, ...
struct StepMemory {
  std::vector<Value> results;
};

// An argument after resolution: a scalar value, a row's numeric cells, or
// the "none" placeholder table operators take as their second argument.
struct Resolved {
  enum class Kind { value, row, none };
  Kind kind = Kind::none;
  Value value;
  std::vector<double> row;

  static Resolved from_value(Value v) { return {Kind::value, v, {}}; }
  static Resolved from_row(std::vector<double> cells) {
    return {Kind::row, {}, std::move(cells)};
  }
  static Resolved none() { return {}; }
  std::string describe() const;
};

struct StepTrace {
  std::size_t index;
  std::string op;
  std::string lhs;
  std::string rhs;
  Value result;
};

struct ExecutionResult {
  Value value;
  std::vector<StepTrace> trace;
};

struct ExecutionError {
  ErrorKind kind;
  std::size_t step_index;
  std::string message;
};

// Normalizes one table cell to a number ("$1,234.5" -> 1234.5, "(12)" ->
// -12, "5.3%" -> 5.3). Errors: NotANumber.
double parse_cell_number(const std::string& text);

// Literal -> its number; Constant -> environment constant, falling back to
// the lexicon rule (UnknownConstant otherwise); StepRef -> stored result;
// RowRef -> the row's numeric cells with non-numeric cells skipped
// (RowNotFound / EmptyRow); none -> placeholder.
Resolved resolve_argument(const Argument& arg, const Environment& env,
                          const StepMemory& memory);

// Executes one step. Both arguments are resolved first (left, then right),
// so resolution errors take precedence over type errors; then operand
// kinds are checked (left, then right) and the operator applied:
//   add/subtract/multiply/divide/exp over two numbers, DivisionByZero when
//   |divisor| < div_epsilon, NumericDomain when exp leaves the reals or
//   overflows; greater -> yes/no; table_sum/average/max/min fold a row and
//   require (row, none) arguments. Any other operand kind is TypeMismatch.
Value execute_step(const Step& step, const Environment& env,
                   const StepMemory& memory);

// Runs all steps in order, appending each result to the step memory. The
// last step's value is the program's value. Deterministic.
// Errors carry the failing step in the message ("step 2: ...").
ExecutionResult execute_program(const Program& program, const Environment& env);

// Non-throwing variant used by evaluators.
std::variant<ExecutionResult, ExecutionError> execute_checked(
    const Program& program, const Environment& env);

// Numbers match within max(abs_tol, rel_tol * max(|a|, |b|)); yes/no
// values compare exactly; a number never matches a yes/no value.
bool answers_match(const Value& a, const Value& b, const NumericConfig& cfg);

// Gold answers arrive as text: "yes"/"no" compare against truth values,
// anything else goes through parse_cell_number. Unparseable text never
// matches (reported, not thrown).
bool answers_match(const std::string& gold, const Value& value,
                   const NumericConfig& cfg);

}  // namespace finprog
