#pragma once

#include <string>

namespace otafl {

/// Shortest round-trip decimal form, '.' separator, independent of locale.
std::string format_double(double x);

}  // namespace otafl
