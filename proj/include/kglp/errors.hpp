#pragma once

#include <stdexcept>
#include <string>

namespace kglp {

// Bad input files / malformed lines. CLI maps this to exit code 2.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally invalid data or configuration. CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failures during computation (non-finite loss, io errors mid-run, ...).
// CLI maps this to exit code 3.
class RuntimeFault : public std::runtime_error {
public:
    explicit RuntimeFault(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace kglp
