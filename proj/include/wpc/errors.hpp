#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wpc {

// Base of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error
{
public:
    using Error::Error;
};

// An eigenvalue fell below the clamp threshold of make_psd.
class NotPositive : public Error
{
public:
    NotPositive(const std::string& what, double eigenvalue)
        : Error(what), eigenvalue_(eigenvalue) {}

    double eigenvalue() const noexcept { return eigenvalue_; }

private:
    double eigenvalue_;
};

class ConvergenceFailure : public Error
{
public:
    using Error::Error;
};

class InvalidDepth : public Error
{
public:
    using Error::Error;
};

class InvalidFilter : public Error
{
public:
    using Error::Error;
};

class UnknownNode : public Error
{
public:
    using Error::Error;
};

// A checked identity failed beyond its tolerance, or an intermediate
// remainder left the positive cone during extraction.
class NumericalBreakdown : public Error
{
public:
    NumericalBreakdown(const std::string& what, std::ptrdiff_t step = -1)
        : Error(what), step_(step) {}

    // extraction step index, or -1 when not raised by an extraction loop
    std::ptrdiff_t step() const noexcept { return step_; }

private:
    std::ptrdiff_t step_;
};

class UndefinedCoherence : public Error
{
public:
    using Error::Error;
};

class AbsoluteContinuityViolation : public Error
{
public:
    using Error::Error;
};

class MalformedInput : public Error
{
public:
    using Error::Error;
};

class InvalidConfig : public Error
{
public:
    using Error::Error;
};

} // namespace wpc
