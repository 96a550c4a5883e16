#pragma once

#include <stdexcept>
#include <string>

namespace spcalda {

/// Base of every error raised by the library. Carries a short kind tag so
/// callers (and the CLI) can map failures without string matching.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct InvalidInput : Error {
    explicit InvalidInput(const std::string& m) : Error("InvalidInput", m) {}
};

// Direct p x p path requested above the materialization guard.
struct DimensionGuard : Error {
    explicit DimensionGuard(const std::string& m) : Error("DimensionGuard", m) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& m) : Error("DimensionMismatch", m) {}
};

struct SingularWithinEstimate : Error {
    explicit SingularWithinEstimate(const std::string& m) : Error("SingularWithinEstimate", m) {}
};

struct GapTooSmall : Error {
    explicit GapTooSmall(const std::string& m) : Error("GapTooSmall", m) {}
};

struct PreconditionViolated : Error {
    explicit PreconditionViolated(const std::string& m) : Error("PreconditionViolated", m) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& m) : Error("ParseError", m) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error("ConfigError", m) {}
};

}  // namespace spcalda
