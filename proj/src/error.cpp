#include "treealg/error.hpp"

namespace treealg {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::Domain: return "DOMAIN";
    case ErrorCode::SchemaMismatch: return "SCHEMA_MISMATCH";
    case ErrorCode::KindMismatch: return "KIND_MISMATCH";
    case ErrorCode::BudgetExceeded: return "BUDGET_EXCEEDED";
    case ErrorCode::DegenerateCorrelation: return "DEGENERATE_CORRELATION";
    case ErrorCode::UnsupportedGeometry: return "UNSUPPORTED_GEOMETRY";
    case ErrorCode::Parse: return "PARSE";
    case ErrorCode::Validation: return "VALIDATION";
    case ErrorCode::Io: return "IO";
    }
    return "UNKNOWN";
}

} // namespace treealg
