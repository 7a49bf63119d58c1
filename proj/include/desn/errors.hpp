#pragma once

// Exception types shared by every module. The CLI maps them to exit codes.

#include <stdexcept>
#include <string>

namespace desn {

/// Base class of all library errors.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid hyperparameters or arguments (CLI exit code 1).
class config_error : public error {
public:
    using error::error;
};

/// Shape, length, or file-content problems (CLI exit code 2).
class data_error : public error {
public:
    using error::error;
};

/// Singular systems, non-finite values, divergence (CLI exit code 3).
class numerical_error : public error {
public:
    using error::error;
};

}  // namespace desn
