#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "finprog/error.hpp"

namespace finprog {

// The reasoning-program DSL. A program is a comma-separated sequence of
// calls `op(a, b)`; in token form every call is exactly four tokens
// ["op(", a, b, ")"] and the list is terminated by "EOF". The second and
// third tokens are arguments: numbers, constants, references to earlier
// step results ("#0", "#1", ...), table row names, or "none".

enum class Op {
  add,
  subtract,
  multiply,
  divide,
  exp,
  greater,
  table_sum,
  table_average,
  table_max,
  table_min,
};

struct OperatorInfo {
  Op op;
  std::string_view name;
  bool commutative;  // true exactly for add and multiply
  bool table;        // row-folding operators take (row, none) arguments
};

const OperatorInfo& operator_info(Op op);
std::optional<Op> lookup_operator(std::string_view name);

struct Literal {
  double value;
  friend bool operator==(const Literal&, const Literal&) = default;
};

// A named constant such as "const_100" or "const_m1". `value` carries the
// lexicon value when the name matches const_<digits> (that number) or
// const_m<digits> (negated); other const_* names stay unresolved until
// execution, where they raise UnknownConstant.
struct Constant {
  std::string name;
  std::optional<double> value;
  friend bool operator==(const Constant& a, const Constant& b) {
    return a.name == b.name;
  }
};

struct StepRef {
  std::size_t index;
  friend bool operator==(const StepRef&, const StepRef&) = default;
};

struct RowRef {
  std::string name;
  friend bool operator==(const RowRef&, const RowRef&) = default;
};

struct NoneArg {
  friend bool operator==(const NoneArg&, const NoneArg&) { return true; }
};

using Argument = std::variant<Literal, Constant, StepRef, RowRef, NoneArg>;

struct Step {
  Op op;
  Argument arg1;
  Argument arg2;
  friend bool operator==(const Step&, const Step&) = default;
};

struct Program {
  std::vector<Step> steps;
  friend bool operator==(const Program&, const Program&) = default;
};

enum class EquivalenceMode { strict, commutative };

// Lexicon rule for constant names: const_<digits> -> value,
// const_m<digits> -> negated value, anything else -> nullopt.
std::optional<double> constant_lexicon_value(std::string_view name);

// Splits program text into tokens and appends "EOF". Arguments keep
// internal spaces ("net revenue" is one token) and may contain balanced
// parentheses; surrounding whitespace is stripped.
// Errors: MalformedProgram (unbalanced parentheses, empty argument,
// missing comma between calls, empty program).
std::vector<std::string> tokenize_program(const std::string& text);

// "#k" -> StepRef, "const_*" -> Constant, "none" -> NoneArg, number text
// (financial notation allowed) -> Literal, anything else -> RowRef.
// Errors: BadStepRef ("#" not followed by a non-negative integer).
Argument parse_argument(const std::string& token);

// Validates the four-tokens-per-step shape, operator names, backward-only
// step references and the terminal "EOF".
// Errors: MissingEOF, MalformedProgram, UnknownOperator, ForwardStepRef,
// BadStepRef.
Program parse_program(const std::vector<std::string>& tokens);

// tokenize_program + parse_program.
Program parse_program_text(const std::string& text);

std::string serialize_argument(const Argument& arg);

// Canonical text form `op(a, b), op(c, d)`. parse_program_text of the
// output reproduces the program exactly.
std::string serialize_program(const Program& program);

// Token form of the program, ending with "EOF".
std::vector<std::string> serialize_tokens(const Program& program);

// strict: identity. commutative: the two arguments of every add/multiply
// step are put into a deterministic order (variant rank, then numeric
// value for literals/constants and index for step refs, then text).
// Idempotent; never changes step count or operator sequence.
Program canonicalize_program(const Program& program, EquivalenceMode mode);

}  // namespace finprog
