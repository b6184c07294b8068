#include "vquel/value.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "vquel/error.hpp"

namespace vquel {

namespace {

constexpr std::int64_t kMicrosPerSecond = 1'000'000;

bool read_digits(std::string_view text, std::size_t& pos, std::size_t count, int& out) {
    if (pos + count > text.size()) return false;
    int value = 0;
    for (std::size_t i = 0; i < count; ++i) {
        char c = text[pos + i];
        if (c < '0' || c > '9') return false;
        value = value * 10 + (c - '0');
    }
    pos += count;
    out = value;
    return true;
}

std::optional<std::int64_t> days_from_civil(int year, int month, int day) {
    using namespace std::chrono;
    year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                       std::chrono::day{static_cast<unsigned>(day)}};
    if (!ymd.ok()) return std::nullopt;
    return sys_days{ymd}.time_since_epoch().count();
}

std::optional<Timestamp> parse_us_date(std::string_view text) {
    // MM/DD/YYYY
    std::size_t pos = 0;
    int month = 0, day = 0, year = 0;
    if (!read_digits(text, pos, 2, month) || pos >= text.size() || text[pos++] != '/') return std::nullopt;
    if (!read_digits(text, pos, 2, day) || pos >= text.size() || text[pos++] != '/') return std::nullopt;
    if (!read_digits(text, pos, 4, year) || pos != text.size()) return std::nullopt;
    auto days = days_from_civil(year, month, day);
    if (!days) return std::nullopt;
    return Timestamp{*days * 86400 * kMicrosPerSecond};
}

std::optional<Timestamp> parse_rfc3339(std::string_view text) {
    std::size_t pos = 0;
    int year = 0, month = 0, day = 0;
    if (!read_digits(text, pos, 4, year) || pos >= text.size() || text[pos++] != '-') return std::nullopt;
    if (!read_digits(text, pos, 2, month) || pos >= text.size() || text[pos++] != '-') return std::nullopt;
    if (!read_digits(text, pos, 2, day)) return std::nullopt;
    auto days = days_from_civil(year, month, day);
    if (!days) return std::nullopt;
    std::int64_t micros = *days * 86400 * kMicrosPerSecond;
    if (pos == text.size()) return Timestamp{micros};

    if (text[pos] != 'T' && text[pos] != 't' && text[pos] != ' ') return std::nullopt;
    ++pos;
    int hour = 0, minute = 0, second = 0;
    if (!read_digits(text, pos, 2, hour) || pos >= text.size() || text[pos++] != ':') return std::nullopt;
    if (!read_digits(text, pos, 2, minute) || pos >= text.size() || text[pos++] != ':') return std::nullopt;
    if (!read_digits(text, pos, 2, second)) return std::nullopt;
    if (hour > 23 || minute > 59 || second > 60) return std::nullopt;
    micros += (std::int64_t{hour} * 3600 + minute * 60 + second) * kMicrosPerSecond;

    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        std::int64_t frac = 0;
        int digits = 0;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            if (digits < 6) {
                frac = frac * 10 + (text[pos] - '0');
                ++digits;
            }
            ++pos;
        }
        if (digits == 0) return std::nullopt;
        for (; digits < 6; ++digits) frac *= 10;
        micros += frac;
    }

    if (pos >= text.size()) return std::nullopt;  // offset required once a time is present
    if (text[pos] == 'Z' || text[pos] == 'z') {
        ++pos;
    } else if (text[pos] == '+' || text[pos] == '-') {
        int sign = text[pos] == '+' ? 1 : -1;
        ++pos;
        int oh = 0, om = 0;
        if (!read_digits(text, pos, 2, oh) || pos >= text.size() || text[pos++] != ':') return std::nullopt;
        if (!read_digits(text, pos, 2, om)) return std::nullopt;
        micros -= sign * (std::int64_t{oh} * 3600 + om * 60) * kMicrosPerSecond;
    } else {
        return std::nullopt;
    }
    if (pos != text.size()) return std::nullopt;
    return Timestamp{micros};
}

std::string format_double(double d) {
    if (std::isnan(d)) return "nan";
    if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
    std::string out(buf, end);
    if (out.find_first_of(".eE") == std::string::npos) out += ".0";
    return out;
}

int type_rank(Value::Type t) {
    switch (t) {
        case Value::Type::Null: return 0;
        case Value::Type::Bool: return 1;
        case Value::Type::Int:
        case Value::Type::Float: return 2;
        case Value::Type::Str: return 3;
        case Value::Type::Timestamp: return 4;
    }
    return 5;
}

std::strong_ordering order_doubles(double a, double b) {
    if (a < b) return std::strong_ordering::less;
    if (a > b) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

// Compares two non-null values that are known comparable; returns nullopt
// when they are not.
std::optional<std::strong_ordering> ordered_compare(const Value& a, const Value& b) {
    using T = Value::Type;
    if (a.type() == T::Int && b.type() == T::Int) return a.as_int() <=> b.as_int();
    if (a.is_numeric() && b.is_numeric()) return order_doubles(*a.numeric(), *b.numeric());
    if (a.type() == T::Str && b.type() == T::Str) return a.as_string().compare(b.as_string()) <=> 0;
    if (a.type() == T::Bool && b.type() == T::Bool) return a.as_bool() <=> b.as_bool();
    if (a.type() == T::Timestamp && b.type() == T::Timestamp) return a.as_timestamp() <=> b.as_timestamp();
    if (a.type() == T::Timestamp && b.type() == T::Str) {
        if (auto ts = parse_timestamp(b.as_string())) return a.as_timestamp() <=> *ts;
    }
    if (a.type() == T::Str && b.type() == T::Timestamp) {
        if (auto ts = parse_timestamp(a.as_string())) return *ts <=> b.as_timestamp();
    }
    return std::nullopt;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    if (text.size() == 10 && text[2] == '/') return parse_us_date(text);
    return parse_rfc3339(text);
}

std::string format_timestamp(Timestamp ts) {
    using namespace std::chrono;
    std::int64_t micros = ts.micros;
    std::int64_t secs = micros / kMicrosPerSecond;
    std::int64_t frac = micros % kMicrosPerSecond;
    if (frac < 0) {
        frac += kMicrosPerSecond;
        --secs;
    }
    std::int64_t days = secs / 86400;
    std::int64_t rem = secs % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[64];
    int n = std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                          static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                          static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60), static_cast<int>(rem % 60));
    std::string out(buf, static_cast<std::size_t>(n));
    if (frac != 0) {
        std::snprintf(buf, sizeof buf, ".%06lld", static_cast<long long>(frac));
        out += buf;
    }
    out += 'Z';
    return out;
}

std::string_view to_string(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "!=";
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
    }
    return "?";
}

std::string_view to_string(ColumnType type) {
    switch (type) {
        case ColumnType::Int: return "int";
        case ColumnType::Float: return "float";
        case ColumnType::Bool: return "bool";
        case ColumnType::String: return "string";
        case ColumnType::Timestamp: return "timestamp";
    }
    return "?";
}

std::optional<ColumnType> parse_column_type(std::string_view name) {
    if (name == "int") return ColumnType::Int;
    if (name == "float") return ColumnType::Float;
    if (name == "bool") return ColumnType::Bool;
    if (name == "string") return ColumnType::String;
    if (name == "timestamp") return ColumnType::Timestamp;
    return std::nullopt;
}

std::string_view to_string(Value::Type type) {
    switch (type) {
        case Value::Type::Null: return "null";
        case Value::Type::Bool: return "bool";
        case Value::Type::Int: return "int";
        case Value::Type::Float: return "float";
        case Value::Type::Str: return "string";
        case Value::Type::Timestamp: return "timestamp";
    }
    return "?";
}

std::optional<double> Value::numeric() const {
    if (type() == Type::Int) return static_cast<double>(as_int());
    if (type() == Type::Float) return as_float();
    return std::nullopt;
}

std::string Value::to_string() const {
    switch (type()) {
        case Type::Null: return "";
        case Type::Bool: return as_bool() ? "true" : "false";
        case Type::Int: return std::to_string(as_int());
        case Type::Float: return format_double(as_float());
        case Type::Str: return as_string();
        case Type::Timestamp: return format_timestamp(as_timestamp());
    }
    return "";
}

std::string Value::to_literal() const {
    switch (type()) {
        case Type::Str: {
            std::string out = "\"";
            for (char c : as_string()) {
                if (c == '"' || c == '\\') out += '\\';
                out += c;
            }
            return out + "\"";
        }
        case Type::Timestamp: return "\"" + format_timestamp(as_timestamp()) + "\"";
        case Type::Null: return "null";
        default: return to_string();
    }
}

bool compare(const Value& lhs, CompareOp op, const Value& rhs) {
    if (lhs.is_null() || rhs.is_null()) return false;
    auto ord = ordered_compare(lhs, rhs);
    if (!ord) {
        switch (op) {
            case CompareOp::Eq: return false;
            case CompareOp::Ne: return true;
            default:
                throw EvalError("cannot order " + std::string(to_string(lhs.type())) + " against " +
                                std::string(to_string(rhs.type())));
        }
    }
    switch (op) {
        case CompareOp::Eq: return *ord == 0;
        case CompareOp::Ne: return *ord != 0;
        case CompareOp::Lt: return *ord < 0;
        case CompareOp::Le: return *ord <= 0;
        case CompareOp::Gt: return *ord > 0;
        case CompareOp::Ge: return *ord >= 0;
    }
    return false;
}

std::strong_ordering total_order(const Value& lhs, const Value& rhs) {
    int ra = type_rank(lhs.type());
    int rb = type_rank(rhs.type());
    if (ra != rb) return ra <=> rb;
    if (lhs.is_numeric()) {
        auto c = (lhs.type() == Value::Type::Int && rhs.type() == Value::Type::Int)
                     ? lhs.as_int() <=> rhs.as_int()
                     : order_doubles(*lhs.numeric(), *rhs.numeric());
        if (c != 0) return c;
        return static_cast<int>(lhs.type()) <=> static_cast<int>(rhs.type());
    }
    return structural_order(lhs, rhs);
}

std::strong_ordering structural_order(const Value& lhs, const Value& rhs) {
    if (lhs.type() != rhs.type()) return static_cast<int>(lhs.type()) <=> static_cast<int>(rhs.type());
    switch (lhs.type()) {
        case Value::Type::Null: return std::strong_ordering::equal;
        case Value::Type::Bool: return lhs.as_bool() <=> rhs.as_bool();
        case Value::Type::Int: return lhs.as_int() <=> rhs.as_int();
        case Value::Type::Float: return order_doubles(lhs.as_float(), rhs.as_float());
        case Value::Type::Str: return lhs.as_string().compare(rhs.as_string()) <=> 0;
        case Value::Type::Timestamp: return lhs.as_timestamp() <=> rhs.as_timestamp();
    }
    return std::strong_ordering::equal;
}

bool conforms(const Value& value, ColumnType type) {
    switch (value.type()) {
        case Value::Type::Null: return true;
        case Value::Type::Bool: return type == ColumnType::Bool;
        case Value::Type::Int: return type == ColumnType::Int;
        case Value::Type::Float: return type == ColumnType::Float;
        case Value::Type::Str: return type == ColumnType::String;
        case Value::Type::Timestamp: return type == ColumnType::Timestamp;
    }
    return false;
}

}  // namespace vquel
