#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace forge {

enum class ErrorKind {
    invalid_argument,
    bounds,
    schema_mismatch,
    missing_role,
    out_of_range,
    duplicate_role,
    unparseable,
    empty_mask,
    dimension_mismatch,
    io,
    not_found,
    conflict,
    service_unavailable,
    service_protocol,
    no_match,
    missing_depth,
    unreachable,
    empty_set,
};

const char* to_string(ErrorKind kind);
// Falls back to invalid_argument for unknown names.
ErrorKind error_kind_from_string(const std::string& name);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Byte range [offset, offset + length) of the input text an error refers to.
struct TextSpan {
    std::size_t offset = 0;
    std::size_t length = 0;
};

class ParseError : public Error {
public:
    ParseError(ErrorKind kind, const std::string& message, TextSpan span)
        : Error(kind, message), span_(span) {}

    TextSpan span() const noexcept { return span_; }

private:
    TextSpan span_;
};

}  // namespace forge
