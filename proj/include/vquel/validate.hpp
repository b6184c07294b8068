#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vquel/ast.hpp"

namespace vquel {

enum class Severity { Error, Warning };

struct Diagnostic {
    Severity severity = Severity::Error;
    std::string message;
    SourcePos pos;

    std::string to_string() const;  // "l:c: error: ..."
};

/// Static checks: declarations (undeclared, duplicate, forward references,
/// reserved names), step applicability per entity kind, aggregate
/// structure (`group by` placement and targets, nesting), `.all` placement,
/// set-valued paths outside aggregates, and `into` column naming.
/// A `sort by` key absent from the targets is only a warning.
std::vector<Diagnostic> validate(const QueryProgram& program);

bool has_errors(const std::vector<Diagnostic>& diagnostics);

/// Throws SemanticError for the first error diagnostic.
void throw_on_errors(const std::vector<Diagnostic>& diagnostics);

/// Column name a target contributes in `into` mode: the alias, else the
/// last attribute of a path or up-reference, else the aggregate operator.
std::optional<std::string> derived_column_name(const Target& target);

/// Result column label of a non-`.all` target: the alias or its source text.
std::string column_label(const Target& target);

bool is_all_path(const Expr& e);

}  // namespace vquel
