#pragma once

#include <stdexcept>
#include <string>

namespace gavel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input file or payload. Carries the offending line when known.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line = 0)
        : Error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// A domain invariant was violated. Names the offending field.
class ValidationError : public Error {
public:
    ValidationError(const std::string& msg, std::string field)
        : Error(msg + " [field: " + field + "]"), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Backend call failed. Transport failures are retryable, decode failures are not.
class BackendError : public Error {
public:
    BackendError(const std::string& msg, bool retryable, std::string raw = {})
        : Error(msg), retryable_(retryable), raw_(std::move(raw)) {}
    bool retryable() const { return retryable_; }
    const std::string& raw() const { return raw_; }

private:
    bool retryable_;
    std::string raw_;
};

/// An LLM-as-judge call failed to produce parseable output twice in a row.
class JudgeFormatError : public Error {
public:
    JudgeFormatError(const std::string& msg, std::string first_raw, std::string second_raw)
        : Error(msg), first_raw_(std::move(first_raw)), second_raw_(std::move(second_raw)) {}
    const std::string& first_raw() const { return first_raw_; }
    const std::string& second_raw() const { return second_raw_; }

private:
    std::string first_raw_;
    std::string second_raw_;
};

/// File I/O failure, surfaced with the path involved.
class IoError : public Error {
public:
    IoError(const std::string& msg, std::string path)
        : Error(msg + ": " + path), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

} // namespace gavel
