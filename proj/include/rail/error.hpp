#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rail {

// Scenario or argument combination that cannot be run.
class config_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Scenario validation failure carrying every violation found.
class validation_error : public config_error {
public:
  explicit validation_error(std::vector<std::string> violations)
      : config_error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid scenario:";
    for (const auto& s : v) out += "\n  - " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

// Malformed text input. `line` is 1-based, 0 when unknown.
class parse_error : public std::runtime_error {
public:
  parse_error(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " at line " + std::to_string(line) : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

// Input outside the region where a model is defined (p = 0 for TCP, etc).
class model_domain_error : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Lookup of a sequence number or parameter that does not exist.
class lookup_error : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

inline void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0))
    throw config_error(std::string(name) + " must lie in [0,1], got " + std::to_string(p));
}

}  // namespace rail
