#pragma once

#include <span>
#include <string_view>

#include "vquel/ast.hpp"
#include "vquel/lexer.hpp"

namespace vquel {

struct ParseOptions {
    /// Accept iterator names with the reserved desugaring prefix.
    bool allow_reserved = false;
};

/// Recursive-descent parser. Throws ParseError ("expected ..., found ...")
/// with the position of the offending token.
QueryProgram parse(std::span<const Token> tokens, const ParseOptions& options = {});
QueryProgram parse(std::string_view source, const ParseOptions& options = {});

bool is_reserved_name(std::string_view name);

}  // namespace vquel
