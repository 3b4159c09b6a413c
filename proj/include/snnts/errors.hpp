#pragma once

#include <stdexcept>
#include <string>

namespace snnts {

/// Malformed or inconsistent input data (files, datasets, dimension mismatches
/// between a dataset and an encoder). The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parse failure in one of the textual file formats. Carries the 1-based line
/// number when one is known (0 otherwise).
class FormatError : public DataError {
public:
    FormatError(const std::string& what, std::size_t line = 0)
        : DataError(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace snnts
