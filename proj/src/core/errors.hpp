#pragma once

#include <stdexcept>
#include <string>

namespace opf {

enum class Errc {
    invalid_argument,
    decode,
    unsupported_format,
    empty_audio,
    too_short,
    all_silent,
    dimension_mismatch,
    empty_foreground,
    incompatible_histogram,
    conflict,
    not_found,
    empty_enrollment,
    factor_unavailable,
    heterogeneous_corpus,
    io,
    parse,
    bad_version,
    network,
    internal,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, std::string message) {
    throw Error(code, std::move(message));
}

} // namespace opf
