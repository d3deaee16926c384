#pragma once

#include <stdexcept>
#include <string>

namespace fairalloc {

/// Error categories. The CLI maps each category to a distinct exit code.
enum class ErrorCategory {
    invalid_input = 2,
    feasibility = 3,
    configuration = 4,
    resource = 5,
    estimation = 6,
    parse = 7,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

struct InvalidInput : Error {
    explicit InvalidInput(const std::string& what) : Error(ErrorCategory::invalid_input, what) {}
};

struct FeasibilityError : Error {
    explicit FeasibilityError(const std::string& what) : Error(ErrorCategory::feasibility, what) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorCategory::configuration, what) {}
};

struct ResourceError : Error {
    explicit ResourceError(const std::string& what) : Error(ErrorCategory::resource, what) {}
};

struct EstimationError : Error {
    explicit EstimationError(const std::string& what) : Error(ErrorCategory::estimation, what) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(ErrorCategory::parse, what) {}
};

} // namespace fairalloc
