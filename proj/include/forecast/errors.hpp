#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace forecast {

// Caller supplied data that cannot be processed (empty sets, degenerate sizes).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A precondition of an operation was violated by the caller (shape mismatch,
// out-of-range index). Indicates a programming error rather than bad data.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by the trajectory CSV reader. Carries every offending line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::vector<std::size_t> lines, const std::string& detail);

  const std::vector<std::size_t>& lines() const { return lines_; }

 private:
  std::vector<std::size_t> lines_;
};

// A forecasting stage failed; the stage name is kept for reporting.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& detail);

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

namespace detail {
[[noreturn]] void contract_failure(const char* expr, const char* file, int line,
                                   const std::string& msg);
}  // namespace detail

}  // namespace forecast

#define FORECAST_EXPECT(cond, msg)                                               \
  do {                                                                           \
    if (!(cond)) ::forecast::detail::contract_failure(#cond, __FILE__, __LINE__, \
                                                      (msg));                    \
  } while (0)
