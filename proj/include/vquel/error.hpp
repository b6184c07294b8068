#pragma once

#include <stdexcept>
#include <string>

namespace vquel {

/// Line/column position inside query source text, both 1-based.
struct SourcePos {
    int line = 0;
    int column = 0;

    bool valid() const { return line > 0; }
    std::string to_string() const { return std::to_string(line) + ":" + std::to_string(column); }
    bool operator==(const SourcePos&) const = default;
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Repository, storage and ingestion failures (CLI exit code 1).
class RepositoryError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public RepositoryError {
public:
    using RepositoryError::RepositoryError;
};

/// Rejected commit: bad parents, schema violations, provenance that does
/// not follow the version graph, duplicate discriminators.
class CommitError : public RepositoryError {
public:
    using RepositoryError::RepositoryError;
};

/// Any failure attributable to the query text (CLI exit code 2).
class QueryError : public Error {
public:
    QueryError(const std::string& message, SourcePos pos = {})
        : Error(pos.valid() ? pos.to_string() + ": " + message : message), pos_(pos), bare_(message) {}

    SourcePos pos() const { return pos_; }
    const std::string& bare_message() const { return bare_; }

private:
    SourcePos pos_;
    std::string bare_;
};

class LexError : public QueryError {
public:
    using QueryError::QueryError;
};

class ParseError : public QueryError {
public:
    using QueryError::QueryError;
};

class SemanticError : public QueryError {
public:
    using QueryError::QueryError;
};

/// Raised during evaluation: type errors, inapplicable steps, alias collisions.
class EvalError : public QueryError {
public:
    using QueryError::QueryError;
};

}  // namespace vquel
