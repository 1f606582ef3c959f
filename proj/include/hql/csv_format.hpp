#pragma once

#include <string>

namespace hql {

/// Shortest decimal text that parses back to the same double. Used for every
/// number written to CSV files and checkpoints so outputs are byte-stable.
std::string format_double(double value);

/// Locale-independent strict parse; throws std::invalid_argument on any
/// trailing garbage or empty input.
double parse_double(const std::string& text);

}  // namespace hql
