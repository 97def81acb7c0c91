#pragma once

#include <stdexcept>
#include <string>

namespace baas {

/// Raised when an input violates a documented invariant (bad config, bad
/// hyperparameter, malformed record). The CLI maps it to exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for file-system and parse failures. The CLI maps it to exit code 2.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw ValidationError(what);
}

}  // namespace baas
