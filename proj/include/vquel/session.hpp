#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vquel/ast.hpp"
#include "vquel/engine.hpp"
#include "vquel/validate.hpp"

namespace vquel {

/// Collects input lines and hands out complete statements ended by `;`.
/// Semicolons inside string literals and `--` comments do not count.
class StatementBuffer {
public:
    void append(std::string_view text);
    /// Next complete chunk without its `;`, or nullopt.
    std::optional<std::string> next();
    /// True when nothing but whitespace is pending.
    bool blank() const;
    void clear();

private:
    enum class State { Code, Quote, TexQuote, Comment };

    std::string pending_;
    std::size_t scanned_ = 0;
    State state_ = State::Code;
};

/// Interactive evaluation state. Range declarations and `retrieve into`
/// statements persist across submissions; a submission that fails leaves
/// the session unchanged.
class Session {
public:
    explicit Session(const Repository& repo) : engine_(repo) {}

    /// Runs `source` after everything kept so far and returns the results
    /// of its plain retrieves. Throws QueryError.
    std::vector<ResultSet> submit(std::string_view source, std::vector<Diagnostic>* warnings = nullptr);

    void reset() { kept_.statements.clear(); }
    std::size_t kept() const { return kept_.statements.size(); }

private:
    Engine engine_;
    QueryProgram kept_;
};

}  // namespace vquel
