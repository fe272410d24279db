#pragma once

#include <stdexcept>
#include <string>

namespace cubewright {

// Error categories map onto CLI exit codes: usage(1), format(2),
// resource(3), inconsistency(4).
enum class ErrorKind {
    Usage,
    Format,
    Resource,
    Inconsistency,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error format_error(std::string msg) { return Error(ErrorKind::Format, std::move(msg)); }
inline Error usage_error(std::string msg) { return Error(ErrorKind::Usage, std::move(msg)); }
inline Error resource_error(std::string msg) { return Error(ErrorKind::Resource, std::move(msg)); }
inline Error inconsistency_error(std::string msg) { return Error(ErrorKind::Inconsistency, std::move(msg)); }

} // namespace cubewright
