#ifndef CHIRALCMT_ERROR_HPP
#define CHIRALCMT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace chiralcmt
{

enum class ErrorKind
{
    Contract,   // precondition or invariant violated by the caller
    Data,       // malformed or unusable input data
    Numerical,  // iteration failed to converge, singular system, pole
    Io,         // filesystem failure
};

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string &message) : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ContractError : Error
{
    explicit ContractError(const std::string &message) : Error(ErrorKind::Contract, message) {}
};

struct DataError : Error
{
    explicit DataError(const std::string &message) : Error(ErrorKind::Data, message) {}
};

struct NumericalError : Error
{
    explicit NumericalError(const std::string &message) : Error(ErrorKind::Numerical, message) {}
};

// Raised when a transmission denominator or linear system is singular at the
// evaluation frequency.
struct PoleError : NumericalError
{
    explicit PoleError(const std::string &message) : NumericalError(message) {}
};

struct IoError : Error
{
    explicit IoError(const std::string &message) : Error(ErrorKind::Io, message) {}
};

inline void require(bool condition, const std::string &message)
{
    if (!condition)
        throw ContractError(message);
}

} // namespace chiralcmt

#endif
