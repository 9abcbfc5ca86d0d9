#pragma once

#include <cstddef>
#include <string_view>

namespace concore {

/// Number of maximal runs of non-whitespace characters. This is the token
/// measure used for every budget and every report.
std::size_t count_tokens(std::string_view text);

}  // namespace concore
