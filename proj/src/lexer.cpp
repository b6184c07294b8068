#include "vquel/lexer.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <utility>

namespace vquel {

namespace {

constexpr std::array<std::pair<std::string_view, Keyword>, 18> kKeywords{{
    {"range", Keyword::Range},   {"of", Keyword::Of},         {"is", Keyword::Is},
    {"retrieve", Keyword::Retrieve}, {"into", Keyword::Into}, {"unique", Keyword::Unique},
    {"where", Keyword::Where},   {"sort", Keyword::Sort},     {"by", Keyword::By},
    {"asc", Keyword::Asc},       {"desc", Keyword::Desc},     {"and", Keyword::And},
    {"or", Keyword::Or},         {"not", Keyword::Not},       {"group", Keyword::Group},
    {"all", Keyword::All},       {"true", Keyword::True},     {"false", Keyword::False},
}};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space_and_comments();
            if (at_end()) break;
            out.push_back(next());
        }
        return out;
    }

private:
    bool at_end() const { return i_ >= src_.size(); }
    char peek(std::size_t ahead = 0) const { return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0'; }
    SourcePos here() const { return {line_, col_}; }

    void advance() {
        if (src_[i_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++i_;
    }

    void skip_space_and_comments() {
        while (!at_end()) {
            char c = peek();
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '-' && peek(1) == '-') {
                while (!at_end() && peek() != '\n') advance();
            } else {
                break;
            }
        }
    }

    Token next() {
        SourcePos pos = here();
        char c = peek();
        if (ident_start(c)) return word(pos);
        if (digit(c)) return number(pos);
        if (c == '"') return string(pos, "\"");
        if (c == '`' && peek(1) == '`') return string(pos, "''");

        static constexpr std::array<std::string_view, 4> two{"!=", "<=", ">=", "<>"};
        for (auto sym : two) {
            if (src_.substr(i_, 2) == sym) {
                advance();
                advance();
                return Token{TokenKind::Symbol, sym == "<>" ? "!=" : std::string(sym), {}, pos};
            }
        }
        static constexpr std::string_view single = ".,()=<>+-*/;";
        if (single.find(c) != std::string_view::npos) {
            advance();
            return Token{TokenKind::Symbol, std::string(1, c), {}, pos};
        }
        throw LexError(std::string("illegal character '") + c + "'", pos);
    }

    Token word(SourcePos pos) {
        std::size_t start = i_;
        while (!at_end() && ident_char(peek())) advance();
        std::string text(src_.substr(start, i_ - start));
        if (auto kw = lookup_keyword(text)) return Token{TokenKind::Keyword, text, *kw, pos};
        return Token{TokenKind::Ident, text, {}, pos};
    }

    Token number(SourcePos pos) {
        std::size_t start = i_;
        bool is_float = false;
        while (digit(peek())) advance();
        if (peek() == '.' && digit(peek(1))) {
            is_float = true;
            advance();
            while (digit(peek())) advance();
        }
        if ((peek() == 'e' || peek() == 'E') &&
            (digit(peek(1)) || ((peek(1) == '+' || peek(1) == '-') && digit(peek(2))))) {
            is_float = true;
            advance();
            if (peek() == '+' || peek() == '-') advance();
            while (digit(peek())) advance();
        }
        if (ident_char(peek())) throw LexError("malformed number", pos);
        std::string text(src_.substr(start, i_ - start));
        if (!is_float) {
            std::int64_t v = 0;
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
            if (ec != std::errc{}) throw LexError("integer literal out of range", pos);
        }
        return Token{is_float ? TokenKind::Float : TokenKind::Int, text, {}, pos};
    }

    Token string(SourcePos pos, std::string_view close) {
        advance();
        if (close == "''") advance();  // second backtick
        std::string text;
        while (true) {
            if (at_end()) throw LexError("unterminated string literal", pos);
            if (src_.substr(i_, close.size()) == close) {
                for (std::size_t k = 0; k < close.size(); ++k) advance();
                break;
            }
            char c = peek();
            if (c == '\\' && close == "\"") {
                advance();
                if (at_end()) throw LexError("unterminated string literal", pos);
                char e = peek();
                switch (e) {
                    case 'n': text += '\n'; break;
                    case 't': text += '\t'; break;
                    case '"': text += '"'; break;
                    case '\\': text += '\\'; break;
                    default: throw LexError(std::string("unknown escape '\\") + e + "'", here());
                }
                advance();
                continue;
            }
            text += c;
            advance();
        }
        return Token{TokenKind::String, text, {}, pos};
    }

    std::string_view src_;
    std::size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

}  // namespace

std::string_view to_string(Keyword kw) {
    for (const auto& [name, k] : kKeywords) {
        if (k == kw) return name;
    }
    return "?";
}

std::optional<Keyword> lookup_keyword(std::string_view word) {
    if (word.size() > 8) return std::nullopt;
    std::string lower;
    for (char c : word) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (const auto& [name, k] : kKeywords) {
        if (name == lower) return k;
    }
    return std::nullopt;
}

std::string Token::describe() const {
    switch (kind) {
        case TokenKind::Keyword: return "keyword '" + text + "'";
        case TokenKind::Ident: return "identifier '" + text + "'";
        case TokenKind::String: return "string \"" + text + "\"";
        case TokenKind::Int:
        case TokenKind::Float: return "number " + text;
        case TokenKind::Symbol: return "'" + text + "'";
    }
    return text;
}

std::vector<Token> tokenize(std::string_view source) {
    return Lexer(source).run();
}

}  // namespace vquel
