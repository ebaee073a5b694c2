#pragma once

#include <stdexcept>
#include <string>

namespace fewscale {

/// Base of every error raised by the library. `is_io()` separates
/// filesystem failures from validation failures so the CLI can map them
/// onto distinct exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual bool is_io() const noexcept { return false; }
};

class IoError : public Error {
public:
    using Error::Error;
    bool is_io() const noexcept override { return true; }
};

class FormatError : public Error {
public:
    using Error::Error;
};

class CorruptionError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class InsufficientClassesError : public Error {
public:
    using Error::Error;
};

class EpisodeInfeasibleError : public Error {
public:
    using Error::Error;
};

class DegenerateInputError : public Error {
public:
    using Error::Error;
};

class DegenerateLawError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class ComparisonUnavailableError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace fewscale
