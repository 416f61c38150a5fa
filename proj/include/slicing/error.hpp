#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace slicing {

enum class Errc {
    not_strictly_increasing,
    empty_input,
    universe_too_small,
    buffer_too_small,
    index_out_of_bounds,
    rank_out_of_range,
    malformed_buffer,
    malformed_file,
    infeasible_parameters,
    validation_failure,
};

inline const char* to_string(Errc code) noexcept {
    switch (code) {
        case Errc::not_strictly_increasing: return "NotStrictlyIncreasing";
        case Errc::empty_input: return "EmptyInput";
        case Errc::universe_too_small: return "UniverseTooSmall";
        case Errc::buffer_too_small: return "BufferTooSmall";
        case Errc::index_out_of_bounds: return "IndexOutOfBounds";
        case Errc::rank_out_of_range: return "RankOutOfRange";
        case Errc::malformed_buffer: return "MalformedBuffer";
        case Errc::malformed_file: return "MalformedFile";
        case Errc::infeasible_parameters: return "InfeasibleParameters";
        case Errc::validation_failure: return "ValidationFailure";
    }
    return "Unknown";
}

/// Every failure raised by the library. `position()` carries the offending
/// index for errors that have one (e.g. the first non-increasing pair).
class Error : public std::runtime_error {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    Error(Errc code, const std::string& message, std::size_t position = npos)
        : std::runtime_error(std::string(to_string(code)) + ": " + message),
          code_(code),
          position_(position) {}

    Errc code() const noexcept { return code_; }
    std::size_t position() const noexcept { return position_; }

private:
    Errc code_;
    std::size_t position_;
};

}  // namespace slicing
