#pragma once

#include <stdexcept>
#include <string>

namespace zerodef {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inconsistent dimensions or non-finite / negative matrix entries.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation (negative state,
/// boundary point where a positive one is required, index out of range).
class DomainError : public Error {
public:
    using Error::Error;
};

/// One of the network hypotheses (irreducibility, entries of B, rank, rows)
/// does not hold, or a control condition is violated.
class HypothesisError : public Error {
public:
    using Error::Error;
};

/// An iterative method failed to converge or a residual check failed.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// The request has no solution (e.g. a state outside R = R^n_+ + D).
class InfeasibleError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(int line, int column, const std::string& message)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
          line_(line),
          column_(column) {}

    [[nodiscard]] int line() const noexcept { return line_; }
    [[nodiscard]] int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace zerodef
