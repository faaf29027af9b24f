#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sqlcritic {

/// SQL text could not be lexed/parsed as a single statement.
/// Carries the byte offset of the failure and a hint for what was expected.
class ParseError : public std::runtime_error {
public:
    ParseError(size_t offset, std::string expected, const std::string& detail)
        : std::runtime_error("parse error at offset " + std::to_string(offset) + ": " + detail +
                             (expected.empty() ? "" : " (expected " + expected + ")")),
          offset_(offset),
          expected_(std::move(expected)) {}

    size_t offset() const { return offset_; }
    const std::string& expected() const { return expected_; }

private:
    size_t offset_;
    std::string expected_;
};

/// Critique text with no recognizable verdict and no parseable point lines.
class MalformedCritique : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A remote explanation judge is configured but cannot be reached.
class JudgeUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyBatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyDataset : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adaptive preference coefficient collapsed to <= 0; beta is too small for
/// verdict-conflict pairs.
class DegenerateCoefficient : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Database file missing or not openable. Distinct from a bad query, which is
/// reported as an execution outcome, not an exception.
class DbUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Transport or protocol failure talking to a model endpoint.
class ClientError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sqlcritic
