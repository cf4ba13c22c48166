#include "finprog/numeric.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace finprog {

std::string format_number(double value) {
  std::array<char, 64> buf;
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

std::string trim(const std::string& text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return text.substr(b, e - b);
}

std::optional<double> parse_financial_number(const std::string& text) {
  std::string s = trim(text);
  bool negative = false;

  // Currency markers and accounting negatives can wrap each other: "$(1,234)".
  bool changed = true;
  while (changed && !s.empty()) {
    changed = false;
    if (s.front() == '$') {
      s = trim(s.substr(1));
      changed = true;
    }
    if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
      s = trim(s.substr(1, s.size() - 2));
      negative = !negative;
      changed = true;
    }
  }
  if (!s.empty() && s.back() == '%') s = trim(s.substr(0, s.size() - 1));
  std::erase(s, ',');
  if (!s.empty() && s.front() == '+') s = s.substr(1);
  if (s.empty()) return std::nullopt;
  // strtod accepts hex floats and inf/nan spellings; none of those are numbers
  // in financial text.
  if (s.find_first_of("xX") != std::string::npos) return std::nullopt;

  errno = 0;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return negative ? -v : v;
}

bool nearly_equal(double a, double b, double abs_tol, double rel_tol) {
  if (a == b) return true;
  if (!std::isfinite(a) || !std::isfinite(b)) return false;
  const double diff = std::fabs(a - b);
  const double scale = std::max(std::fabs(a), std::fabs(b));
  return diff <= std::max(abs_tol, rel_tol * scale);
}

std::string lower_collapse(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace finprog
