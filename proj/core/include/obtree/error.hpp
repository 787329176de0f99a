#ifndef OBTREE_ERROR_HPP
#define OBTREE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace obtree {

/// Error category, used by the CLI to pick an exit code:
/// user errors (bad flags, malformed data files) exit 1,
/// internal errors exit 2.
enum class ErrorKind { user, internal };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    static Error user(const std::string& message) { return Error(ErrorKind::user, message); }
    static Error internal(const std::string& message) { return Error(ErrorKind::internal, message); }

private:
    ErrorKind kind_;
};

} // namespace obtree

#endif // OBTREE_ERROR_HPP
