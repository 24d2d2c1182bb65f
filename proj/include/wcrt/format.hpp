#pragma once

#include <string>

namespace wcrt {

/// Shortest decimal form that round-trips the exact double; never depends on
/// locale, so rendered artifacts are byte-identical across runs.
std::string format_double(double value);

/// Fixed-point form with the given number of fractional digits.
std::string format_fixed(double value, int digits);

} // namespace wcrt
