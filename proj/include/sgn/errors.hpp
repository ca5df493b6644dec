#pragma once

#include <stdexcept>
#include <string>

namespace sgn {

// Every failure raised by the library derives from Error so callers (the
// corpus runner in particular) can record it per case and keep going.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// A test function that the grid cannot resolve (width <= 4h and friends).
class Unresolvable : public Error {
public:
    using Error::Error;
};

// Averaging or integration over a set of zero measure.
class DegenerateRegion : public Error {
public:
    using Error::Error;
};

// An escape interval would leave the sampling window.
class WindowExit : public Error {
public:
    WindowExit(const std::string& what, double position)
        : Error(what), position_(position) {}
    double position() const noexcept { return position_; }

private:
    double position_;
};

// A claimed structural property of a sparse family does not hold.
class ConstructionViolation : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

// Young function or modular evaluation ran out of floating point range.
class RangeError : public Error {
public:
    RangeError(const std::string& what, double argument)
        : Error(what), argument_(argument) {}
    double argument() const noexcept { return argument_; }

private:
    double argument_;
};

class AdmissibilityError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace sgn
