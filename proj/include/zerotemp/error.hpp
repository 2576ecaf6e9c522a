#pragma once

#include <stdexcept>
#include <string>

namespace zerotemp {

enum class ErrorKind {
    InvalidInput,
    ResourceLimit,
    NumericFailure,
    DepthExceeded,
    UnsupportedVariant,
    Ambiguity,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Process exit code used by the command line tool.
inline int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::ResourceLimit: return 2;
    case ErrorKind::NumericFailure: return 3;
    default: return 1;
    }
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace zerotemp
