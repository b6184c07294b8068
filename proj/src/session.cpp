#include "vquel/session.hpp"

#include "vquel/desugar.hpp"
#include "vquel/parser.hpp"

namespace vquel {

void StatementBuffer::append(std::string_view text) { pending_ += text; }

std::optional<std::string> StatementBuffer::next() {
    for (std::size_t& i = scanned_; i < pending_.size(); ++i) {
        char c = pending_[i];
        char n = i + 1 < pending_.size() ? pending_[i + 1] : '\0';
        switch (state_) {
            case State::Code:
                if (c == '"') {
                    state_ = State::Quote;
                } else if (c == '`' && n == '`') {
                    state_ = State::TexQuote;
                    ++i;
                } else if (c == '-' && n == '-') {
                    state_ = State::Comment;
                    ++i;
                } else if (c == ';') {
                    std::string chunk = pending_.substr(0, i);
                    pending_.erase(0, i + 1);
                    i = 0;
                    return chunk;
                }
                break;
            case State::Quote:
                if (c == '\\') ++i;
                else if (c == '"') state_ = State::Code;
                break;
            case State::TexQuote:
                if (c == '\'' && n == '\'') {
                    state_ = State::Code;
                    ++i;
                }
                break;
            case State::Comment:
                if (c == '\n') state_ = State::Code;
                break;
        }
    }
    // Trailing half of a two-character token may still arrive.
    if (!pending_.empty() && scanned_ == pending_.size() && state_ == State::Code &&
        (pending_.back() == '`' || pending_.back() == '-')) {
        --scanned_;
    }
    return std::nullopt;
}

bool StatementBuffer::blank() const { return pending_.find_first_not_of(" \t\r\n") == std::string::npos; }

void StatementBuffer::clear() {
    pending_.clear();
    scanned_ = 0;
    state_ = State::Code;
}

std::vector<ResultSet> Session::submit(std::string_view source, std::vector<Diagnostic>* warnings) {
    QueryProgram fresh = parse(source);
    QueryProgram program = kept_;
    for (auto& s : fresh.statements) program.statements.push_back(s);
    QueryProgram lowered = desugar(program);
    auto diags = validate(lowered);
    throw_on_errors(diags);
    auto results = engine_.execute(lowered);
    if (warnings) {
        for (auto& d : diags) warnings->push_back(std::move(d));
    }
    for (auto& s : fresh.statements) {
        const auto* r = std::get_if<RetrieveStmt>(&s);
        if (!r || r->into) kept_.statements.push_back(std::move(s));
    }
    return results;
}

}  // namespace vquel
