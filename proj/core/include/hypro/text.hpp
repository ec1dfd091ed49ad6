#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hypro/types.hpp"

namespace hypro {

/// ASCII casefold. Bytes outside ASCII pass through unchanged.
std::string casefold(std::string_view s);

std::string trim(std::string_view s);

/// Casefold, trim, and collapse internal whitespace runs to one space.
std::string canonicalize_cell_key(std::string_view text);

/// Plain decimal rendering: integral values print without a fraction and
/// trailing fractional zeros are dropped. No exponent below 1e15.
std::string render_number(double x);

std::vector<std::string> answer_value_to_strings(const AnswerValue& v);

}  // namespace hypro
