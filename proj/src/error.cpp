#include "concore/error.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace concore {

UnknownOperatorError::UnknownOperatorError(const std::string& name, std::vector<std::string> suggestions)
    : Error(suggestions.empty()
                ? fmt::format("unknown operator '{}'", name)
                : fmt::format("unknown operator '{}' (nearest: {})", name, fmt::join(suggestions, ", "))),
      suggestions_(std::move(suggestions)) {}

ExpectationMismatch::ExpectationMismatch(std::size_t turn, std::string field, const std::string& detail)
    : Error(fmt::format("turn {}: {} mismatch: {}", turn, field, detail)),
      turn_(turn),
      field_(std::move(field)) {}

}  // namespace concore
