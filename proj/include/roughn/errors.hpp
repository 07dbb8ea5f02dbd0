#pragma once

#include <stdexcept>
#include <string>

namespace roughn {

// Mirrors rl_status in roughn.h; values must stay in sync.
enum class errc : int {
    ok = 0,
    invalid_argument = 1,
    table_too_small = 2,
    out_of_range = 3,
    empty_support = 4,
    numeric_failure = 5,
    budget_exceeded = 6,
    io_error = 7,
    fingerprint_mismatch = 8,
    internal = 9,
};

const char* errc_name(errc code) noexcept;

class lab_error : public std::runtime_error {
public:
    lab_error(errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
    throw lab_error(code, what);
}

inline void require(bool cond, errc code, const std::string& what) {
    if (!cond) fail(code, what);
}

} // namespace roughn
