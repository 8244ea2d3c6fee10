#pragma once

#include <stdexcept>
#include <string>

namespace tokgraft {

enum class Errc {
    io_error,
    invalid_format,
    invalid_utf8,
    unknown_token_id,
    invalid_byte_sequence,
    invalid_vocabulary,
    fingerprint_mismatch,
    duplicate_special_name,
    unknown_language,
    missing_special_token,
    unsupported_task,
    non_finite_input,
    insufficient_samples,
    invalid_token_counts,
    invalid_argument,
};

// Single exception type carrying a stable error code; the CLI maps codes to
// documented exit statuses.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace tokgraft
