#pragma once

#include <stdexcept>
#include <string>

namespace wcrt {

/// Malformed or out-of-range input data (CSV cells, scale configs, ...).
/// Carries enough location context to fix the offending file.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative routine exhausted its budget without reaching tolerance.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace wcrt
