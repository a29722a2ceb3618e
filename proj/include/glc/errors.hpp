#pragma once

#include <stdexcept>
#include <string>

namespace glc {

// Error taxonomy mirrored by the CLI exit codes: parameter misuse -> 2,
// malformed or inconsistent input data -> 3, numerical failure -> 4.

struct param_error : std::invalid_argument {
    explicit param_error(const std::string& msg) : std::invalid_argument(msg) {}
};

struct data_error : std::runtime_error {
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace glc
