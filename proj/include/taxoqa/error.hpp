#pragma once

#include <stdexcept>
#include <string>

namespace taxoqa {

// Process exit codes used by the command-line tool.
enum class ExitCode : int {
    kOk = 0,
    kConfig = 2,
    kEndpoint = 3,
    kData = 4,
};

// Base class for every error raised by the library. The category decides the
// exit code the CLI reports.
class Error : public std::runtime_error {
public:
    Error(ExitCode category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ExitCode category() const noexcept { return category_; }

private:
    ExitCode category_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ExitCode::kConfig, what) {}
};

class EndpointError : public Error {
public:
    explicit EndpointError(const std::string& what) : Error(ExitCode::kEndpoint, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ExitCode::kData, what) {}
};

// Malformed input text. Carries the 1-based line number when known (0 otherwise).
class ParseError : public DataError {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : DataError(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class UnknownConceptError : public DataError {
public:
    explicit UnknownConceptError(const std::string& concept_id)
        : DataError("unknown concept '" + concept_id + "'"), concept_(concept_id) {}

    const std::string& concept_id() const noexcept { return concept_; }

private:
    std::string concept_;
};

// Numerical precondition failures (zero-norm rows, constant inputs, ...).
class NumericError : public DataError {
public:
    explicit NumericError(const std::string& what) : DataError(what) {}
};

}  // namespace taxoqa
