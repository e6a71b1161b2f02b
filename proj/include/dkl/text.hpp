#pragma once

#include <string>

namespace dkl {

/// Shortest decimal representation that parses back to the identical double.
std::string format_double(double value);

}  // namespace dkl
