#pragma once

#include <stdexcept>
#include <string>

namespace spectromind {

// Error taxonomy; the CLI maps each class to a distinct exit code.
struct ConfigError : std::runtime_error {  // bad parameters / invariant violations (exit 2)
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DependencyError : std::runtime_error {  // missing artifact / stage-order violation (exit 3)
    explicit DependencyError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {  // malformed or inconsistent data (exit 4)
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ServiceError : std::runtime_error {  // remote endpoint failure (exit 5)
    explicit ServiceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace spectromind
