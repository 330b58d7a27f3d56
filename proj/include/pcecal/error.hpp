#pragma once

#include <stdexcept>
#include <string>

namespace pcecal {

// Failure categories. The C API maps these one-to-one onto pcecal_status.
enum class ErrorCode {
    invalid_argument,
    domain,        // value outside the admissible region (bounds, [-1,1], ...)
    shape,         // dimension / length mismatch
    precondition,  // operation not applicable to these inputs
    numerical,     // solver failure, degenerate statistic, non-finite value
    capacity,      // index arithmetic overflow
    io,
    parse,
    partial,       // external ensemble only partially harvested
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) fail(code, what);
}

}  // namespace pcecal
