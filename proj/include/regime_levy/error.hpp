#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace regime_levy {

/// Broad failure classes. The CLI maps each one to a distinct exit code.
enum class ErrorCategory {
    config,      // a parameter violates an operation's precondition
    io,          // file missing, unreadable, or malformed
    numerical,   // underflow, non-finite likelihood, failed decomposition
    degenerate,  // a regime or subsample with too little mass to estimate
};

inline std::string_view to_string(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::config: return "config";
        case ErrorCategory::io: return "io";
        case ErrorCategory::numerical: return "numerical";
        case ErrorCategory::degenerate: return "degenerate";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory c, const std::string& what) {
    throw Error(c, what);
}

inline void require(bool cond, const std::string& what) {
    if (!cond) fail(ErrorCategory::config, what);
}

}  // namespace regime_levy
