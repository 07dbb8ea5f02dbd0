#include "roughn/errors.hpp"

namespace roughn {

const char* errc_name(errc code) noexcept {
    switch (code) {
    case errc::ok: return "ok";
    case errc::invalid_argument: return "invalid-argument";
    case errc::table_too_small: return "table-too-small";
    case errc::out_of_range: return "out-of-range";
    case errc::empty_support: return "empty-support";
    case errc::numeric_failure: return "numeric-failure";
    case errc::budget_exceeded: return "budget-exceeded";
    case errc::io_error: return "io-error";
    case errc::fingerprint_mismatch: return "fingerprint-mismatch";
    case errc::internal: return "internal";
    }
    return "unknown";
}

} // namespace roughn
