#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace overcrit {

enum class ErrorCode {
    invalid_argument,
    no_gap,
    no_dive,
    tracking_lost,
    no_gap_state,
    over_under_critical,
    no_plateau,
    insufficient_grid,
    step_failure,
    io_failure,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message)
{
    if (!condition)
        fail(code, message);
}

} // namespace overcrit
