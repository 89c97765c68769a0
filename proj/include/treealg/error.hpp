#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace treealg {

/** Failure categories. The CLI maps these onto exit codes and the
 *  `code=<NAME>` field of its stderr diagnostics. */
enum class ErrorCode {
    InvalidArgument,
    Domain,
    SchemaMismatch,
    KindMismatch,
    BudgetExceeded,
    DegenerateCorrelation,
    UnsupportedGeometry,
    Parse,
    Validation,
    Io,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    /** True for failures of the computation itself rather than of its inputs. */
    bool is_computation_error() const noexcept {
        return code_ == ErrorCode::BudgetExceeded ||
               code_ == ErrorCode::DegenerateCorrelation ||
               code_ == ErrorCode::UnsupportedGeometry;
    }

private:
    ErrorCode code_;
};

} // namespace treealg
