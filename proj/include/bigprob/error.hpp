#pragma once

#include <stdexcept>
#include <string>

namespace bigprob {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Interface mismatch in composition.
class CompositionError : public Error {
public:
    using Error::Error;
};

/// Name clash in a tensor product.
class TensorError : public Error {
public:
    using Error::Error;
};

/// Unknown or duplicate link name.
class NameError : public Error {
public:
    using Error::Error;
};

/// Operand has the wrong number of regions or sites.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A bigraph violates one of the solidity clauses.
class SolidityError : public Error {
public:
    using Error::Error;
};

/// A match is not an occurrence of the redex in the target.
class MatchError : public Error {
public:
    using Error::Error;
};

/// Operation requires a ground bigraph.
class GroundError : public Error {
public:
    using Error::Error;
};

/// Model file is well-formed text but semantically invalid.
class ModelError : public Error {
public:
    using Error::Error;
};

/// Lexical or syntax error, carrying a 1-based source position.
class ParseError : public ModelError {
public:
    ParseError(int line, int column, const std::string& message)
        : ModelError(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

/// Analysis query cannot be evaluated (unknown label, wrong model kind, ...).
class AnalysisError : public Error {
public:
    using Error::Error;
};

}  // namespace bigprob
