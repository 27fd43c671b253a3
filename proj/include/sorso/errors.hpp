#pragma once

#include <stdexcept>
#include <string>

namespace sorso {

// Bad file contents, bad key, out-of-range value. CLI exit code 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Violated call contract (bad action id, wrong game, mismatched shapes).
struct UsageError : std::logic_error {
    explicit UsageError(const std::string& what) : std::logic_error(what) {}
};

// Non-finite value produced during learning, trace bound exceeded, step cap hit.
// CLI exit code 2.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Sample collection budget exhausted before reaching the requested count.
struct CollectionError : std::runtime_error {
    explicit CollectionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sorso
