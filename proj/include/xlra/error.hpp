#pragma once

#include <stdexcept>
#include <string>

namespace xlra {

/// Thrown when a caller breaks a documented precondition (bad index, r <= 0, ...).
class ContractViolation : public std::logic_error
{
  public:
    explicit ContractViolation(const std::string& what)
        : std::logic_error(what)
    {
    }
};

/// Thrown when a user-supplied configuration cannot describe a valid run.
class ConfigError : public std::runtime_error
{
  public:
    explicit ConfigError(const std::string& what)
        : std::runtime_error(what)
    {
    }
};

inline void
require(bool condition, const char* message)
{
    if (!condition)
    {
        throw ContractViolation(message);
    }
}

} // namespace xlra
