#include "forecast/errors.hpp"

#include <sstream>

namespace forecast {

namespace {
std::string describe_lines(const std::vector<std::size_t>& lines,
                           const std::string& detail) {
  std::ostringstream os;
  os << detail;
  if (!lines.empty()) {
    os << " (line";
    if (lines.size() > 1) os << 's';
    for (std::size_t i = 0; i < lines.size(); ++i) {
      os << (i == 0 ? " " : ", ") << lines[i];
    }
    os << ')';
  }
  return os.str();
}
}  // namespace

ParseError::ParseError(std::vector<std::size_t> lines, const std::string& detail)
    : std::runtime_error(describe_lines(lines, detail)), lines_(std::move(lines)) {}

StageError::StageError(std::string stage, const std::string& detail)
    : std::runtime_error(stage + ": " + detail), stage_(std::move(stage)) {}

namespace detail {
void contract_failure(const char* expr, const char* file, int line,
                      const std::string& msg) {
  std::ostringstream os;
  os << "contract violation: " << msg << " [" << expr << "] at " << file << ':' << line;
  throw ContractViolation(os.str());
}
}  // namespace detail

}  // namespace forecast
