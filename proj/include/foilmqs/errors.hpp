#pragma once

#include <stdexcept>
#include <string>

namespace foil {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// linalg
class SingularMatrix : public Error {
public:
    using Error::Error;
};
class InconsistentRhs : public Error {
public:
    using Error::Error;
};
class SizeGuard : public Error {
public:
    using Error::Error;
};

// input handling
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& message)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
          line_(line),
          column_(column) {}
    ParseError(std::size_t line, const std::string& message) : ParseError(line, 1, message) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};
class ValidationError : public Error {
public:
    using Error::Error;
};

// mesh / field model
class DegenerateGeometry : public Error {
public:
    using Error::Error;
};
class EmptyWinding : public Error {
public:
    using Error::Error;
};
class RankDeficientCoupling : public Error {
public:
    using Error::Error;
};

// circuit / DAE analysis
class UnclassifiedElement : public Error {
public:
    using Error::Error;
};
class SingularConductance : public Error {
public:
    using Error::Error;
};
class NonpositiveInductance : public Error {
public:
    using Error::Error;
};
class IndefiniteDifference : public Error {
public:
    using Error::Error;
};

// time stepping
class SingularSystemAtStep : public Error {
public:
    using Error::Error;
};
class InconsistentInitialState : public Error {
public:
    using Error::Error;
};

}  // namespace foil
