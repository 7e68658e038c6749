#include "overcrit/errors.hpp"

namespace overcrit {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::no_gap: return "NoGap";
    case ErrorCode::no_dive: return "NoDive";
    case ErrorCode::tracking_lost: return "TrackingLost";
    case ErrorCode::no_gap_state: return "NoGapState";
    case ErrorCode::over_under_critical: return "OverUnderCritical";
    case ErrorCode::no_plateau: return "NoPlateau";
    case ErrorCode::insufficient_grid: return "InsufficientGrid";
    case ErrorCode::step_failure: return "StepFailure";
    case ErrorCode::io_failure: return "IoFailure";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message)
    , code_(code)
{
}

void fail(ErrorCode code, const std::string& message)
{
    throw Error(code, message);
}

} // namespace overcrit
