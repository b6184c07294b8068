#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vquel/error.hpp"

namespace vquel {

enum class TokenKind { Keyword, Ident, String, Int, Float, Symbol };

enum class Keyword {
    Range, Of, Is, Retrieve, Into, Unique, Where, Sort, By, Asc, Desc, And, Or, Not, Group, All, True, False,
};

std::string_view to_string(Keyword kw);
std::optional<Keyword> lookup_keyword(std::string_view word);  // case-insensitive

struct Token {
    TokenKind kind = TokenKind::Symbol;
    std::string text;  // identifier/symbol text, decoded string literal, number spelling
    Keyword keyword = Keyword::Range;  // valid when kind == Keyword
    SourcePos pos;

    bool is(Keyword kw) const { return kind == TokenKind::Keyword && keyword == kw; }
    bool is_symbol(std::string_view s) const { return kind == TokenKind::Symbol && text == s; }
    std::string describe() const;
};

/// Splits query text into tokens. Keywords are case-insensitive; string
/// literals use double quotes (or ``TeX-style'' quotes); `--` starts a
/// comment. Throws LexError with the offending position.
std::vector<Token> tokenize(std::string_view source);

}  // namespace vquel
