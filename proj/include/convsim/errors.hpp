#pragma once

#include <stdexcept>
#include <string>

namespace convsim {

// Base for every error raised by the library. The CLI maps subclasses of
// ValidationError to exit status 1 and everything else to 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ParseError : public ValidationError {
public:
    ParseError(const std::string& what, int line, std::string field)
        : ValidationError(what), line_(line), field_(std::move(field)) {}

    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    int line_;
    std::string field_;
};

class OutOfGrid : public Error {
public:
    using Error::Error;
};

class UnknownTower : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class CategoryMismatch : public Error {
public:
    using Error::Error;
};

// All literal or speaker weights vanished over the decode space.
class ZeroMass : public Error {
public:
    using Error::Error;
};

class MisalignedMessage : public Error {
public:
    using Error::Error;
};

class NoFiniteCandidate : public Error {
public:
    using Error::Error;
};

class NonFiniteLoss : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace convsim
