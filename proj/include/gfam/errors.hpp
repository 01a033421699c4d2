#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gfam {

/// Malformed literal (branch, ordinal, rational, vector line). Carries the
/// zero-based character offset at which parsing stopped.
class ParseError : public std::invalid_argument {
public:
    ParseError(const std::string& message, std::string input, std::size_t position)
        : std::invalid_argument(message + " at position " + std::to_string(position)),
          message_(message), input_(std::move(input)), position_(position) {}

    /// The message without the position suffix.
    const std::string& message() const noexcept { return message_; }
    const std::string& input() const noexcept { return input_; }
    std::size_t position() const noexcept { return position_; }

private:
    std::string message_;
    std::string input_;
    std::size_t position_;
};

/// A configured size cap (support, family size, enumeration universe) was exceeded.
class CapExceeded : public std::length_error {
public:
    using std::length_error::length_error;
};

} // namespace gfam
