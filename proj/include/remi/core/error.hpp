#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace remi {

enum class ErrorCode {
    not_found,
    conflict,
    precondition,
    validation,
    unauthorized,
    forbidden,
    provider,
    io,
};

const char* to_string(ErrorCode code);

struct FieldError {
    std::string field;
    std::string code;
    std::string message;

    bool operator==(const FieldError&) const = default;
};

// Every service-level failure is reported as an Error; the HTTP layer maps
// the code onto a status and serializes field errors when present.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, std::vector<FieldError> fields = {})
        : std::runtime_error(std::move(message)), code_(code), fields_(std::move(fields)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::vector<FieldError>& fields() const noexcept { return fields_; }

private:
    ErrorCode code_;
    std::vector<FieldError> fields_;
};

[[noreturn]] inline void throw_not_found(const std::string& what) {
    throw Error(ErrorCode::not_found, what + " not found");
}

}  // namespace remi
