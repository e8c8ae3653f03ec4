#pragma once

#include <stdexcept>
#include <string>

namespace emgauth {

// Bad input: malformed dataset, invalid configuration, violated precondition.
// The CLI maps these to exit code 1.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Problems reading or writing the on-disk dataset layout. Messages carry the
// offending path.
class DatasetError : public ValidationError {
public:
    DatasetError(const std::string& path, const std::string& reason)
        : ValidationError(path + ": " + reason), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

// Numerical failure while running the pipeline (exit code 2).
class ComputationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularCovarianceError : public ComputationError {
public:
    using ComputationError::ComputationError;
};

} // namespace emgauth
