#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace vquel {

/// UTC instant with microsecond precision.
struct Timestamp {
    std::int64_t micros = 0;  // since 1970-01-01T00:00:00Z

    auto operator<=>(const Timestamp&) const = default;
};

/// Accepts RFC 3339 (`2015-01-01T10:00:00Z`, fractional seconds and
/// numeric offsets allowed, `T` may be a space), a bare `YYYY-MM-DD`, and
/// `MM/DD/YYYY`.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// RFC 3339 in UTC; fractional seconds only when non-zero.
std::string format_timestamp(Timestamp ts);

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(CompareOp op);

/// Declared column type of a relation schema.
enum class ColumnType { Int, Float, Bool, String, Timestamp };

std::string_view to_string(ColumnType type);
std::optional<ColumnType> parse_column_type(std::string_view name);

/// Dynamically typed scalar used for every record field and query result cell.
class Value {
public:
    enum class Type { Null, Bool, Int, Float, Str, Timestamp };

    Value() = default;
    Value(std::nullptr_t) {}
    Value(bool b) : data_(b) {}
    Value(int i) : data_(std::int64_t{i}) {}
    Value(std::int64_t i) : data_(i) {}
    Value(double d) : data_(d) {}
    Value(std::string s) : data_(std::move(s)) {}
    Value(const char* s) : data_(std::string(s)) {}
    Value(Timestamp ts) : data_(ts) {}

    Type type() const { return static_cast<Type>(data_.index()); }
    bool is_null() const { return type() == Type::Null; }
    bool is_numeric() const { return type() == Type::Int || type() == Type::Float; }

    bool as_bool() const { return std::get<bool>(data_); }
    std::int64_t as_int() const { return std::get<std::int64_t>(data_); }
    double as_float() const { return std::get<double>(data_); }
    const std::string& as_string() const { return std::get<std::string>(data_); }
    Timestamp as_timestamp() const { return std::get<Timestamp>(data_); }

    /// Int or Float widened to double.
    std::optional<double> numeric() const;

    /// Display text: strings unquoted, null as empty, floats shortest round-trip.
    std::string to_string() const;

    /// Query-literal rendering: strings quoted and escaped.
    std::string to_literal() const;

    /// Structural equality: same type and same payload. Used for record
    /// content (`.all`, `changed`) and never coerces Int to Float.
    bool operator==(const Value&) const = default;

private:
    std::variant<std::monostate, bool, std::int64_t, double, std::string, Timestamp> data_;
};

std::string_view to_string(Value::Type type);

/// Comparison with query semantics:
///  - Null on either side yields false for every operator.
///  - Int and Float compare numerically.
///  - A Str compared to a Timestamp is parsed as a timestamp when possible.
///  - Other cross-type `=` is false and `!=` is true; cross-type ordering
///    throws EvalError.
bool compare(const Value& lhs, CompareOp op, const Value& rhs);

/// Strict total order over all values: Null < Bool < numbers < Str <
/// Timestamp, numbers ordered numerically with Int before an equal Float.
/// Used for sorting, `unique`, and multiset comparisons.
std::strong_ordering total_order(const Value& lhs, const Value& rhs);

/// Total order that distinguishes Int from Float (type index first).
/// Consistent with operator==.
std::strong_ordering structural_order(const Value& lhs, const Value& rhs);

/// True when the value may be stored in a column of `type` (Null always fits).
bool conforms(const Value& value, ColumnType type);

}  // namespace vquel
