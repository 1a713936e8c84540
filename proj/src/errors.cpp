#include "qbell/errors.hpp"

namespace qbell {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ContextMismatch: return "ContextMismatch";
        case ErrorCode::UnsupportedReduction: return "UnsupportedReduction";
        case ErrorCode::CapExceeded: return "CapExceeded";
        case ErrorCode::NotNormalised: return "NotNormalised";
        case ErrorCode::ToleranceAmbiguity: return "ToleranceAmbiguity";
        case ErrorCode::InvalidGroup: return "InvalidGroup";
        case ErrorCode::NoValidU: return "NoValidU";
        case ErrorCode::WitnessNotFound: return "WitnessNotFound";
        case ErrorCode::ParamOutOfRange: return "ParamOutOfRange";
        case ErrorCode::GammaNonPositive: return "GammaNonPositive";
        case ErrorCode::AlphaNonPositive: return "AlphaNonPositive";
        case ErrorCode::Overflow: return "Overflow";
        case ErrorCode::Parse: return "Parse";
        case ErrorCode::Io: return "Io";
        case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

}  // namespace qbell
