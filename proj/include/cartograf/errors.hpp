#pragma once

#include <stdexcept>
#include <string>

namespace cartograf {

/// Bad input data or resources: missing file, malformed row, inconsistent
/// shapes. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Training produced a non-finite loss or activation. CLI exit code 3.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace cartograf
