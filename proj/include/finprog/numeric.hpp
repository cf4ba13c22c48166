#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace finprog {

// Shortest decimal text that parses back to exactly the same double
// (std::to_chars round-trip form), e.g. 3.0 -> "3", 1234.5 -> "1234.5".
std::string format_number(double value);

// Lenient number parse for financial text: strips "$", "%", thousands
// commas and surrounding whitespace; "(x)" is an accounting negative.
// Percent values keep their face value ("5.3%" -> 5.3). Returns nullopt
// for text that is not a number; never returns a non-finite value.
std::optional<double> parse_financial_number(const std::string& text);

// |a - b| <= max(abs_tol, rel_tol * max(|a|, |b|)). Symmetric in a and b.
bool nearly_equal(double a, double b, double abs_tol, double rel_tol);

// Lowercase ASCII, collapse whitespace runs to one space, trim the ends.
// Used for row-name lookups and question tokenization.
std::string lower_collapse(const std::string& text);

std::string trim(const std::string& text);

double sigmoid(double z);

// log(1 + exp(x)) without overflow; building block of the logistic loss.
double softplus(double x);

// Minimal dense row-major matrix used by the trainers.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
  std::span<double> row(std::size_t r) {
    return {data.data() + r * cols, cols};
  }
};

}  // namespace finprog
