#pragma once

#include <stdexcept>
#include <string>

namespace qbell {

enum class ErrorCode {
    InvalidArgument,
    ContextMismatch,
    UnsupportedReduction,
    CapExceeded,
    NotNormalised,
    ToleranceAmbiguity,
    InvalidGroup,
    NoValidU,
    WitnessNotFound,
    ParamOutOfRange,
    GammaNonPositive,
    AlphaNonPositive,
    Overflow,
    Parse,
    Io,
    Internal,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) fail(code, what);
}

}  // namespace qbell
