#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace rollup {

enum class ColumnKind { Numeric, Textual };

/// A nullable table cell: Null, a finite 64-bit float, or a byte string.
///
/// Non-finite numbers never occur at rest: NaN or infinity produced by
/// parsing or arithmetic become Null on construction.
class Value {
public:
    Value() = default;  // Null

    static Value number(double v);
    static Value text(std::string s);

    bool is_null() const { return cell_.index() == 0; }
    bool is_number() const { return cell_.index() == 1; }
    bool is_text() const { return cell_.index() == 2; }

    /// Pre: is_number().
    double as_number() const { return std::get<1>(cell_); }

    /// Pre: is_text().
    const std::string& as_text() const { return std::get<2>(cell_); }

    /// Exact equality: Null == Null, floats compare bitwise-equal values,
    /// text compares byte-for-byte.
    friend bool operator==(const Value&, const Value&) = default;

private:
    std::variant<std::monostate, double, std::string> cell_;
};

/// Renders a value as a canonical grouping key. Numbers use minimal digits
/// (integers without a decimal point), so a numeric code column and a textual
/// one holding the same digits produce identical keys. Null renders as "NA".
std::string canonical_key(const Value& v);

/// Shortest-round-trip rendering of a double, integers without exponent.
std::string canonical_number(double v);

/// The number whose canonical rendering is exactly `key`, if any. "111"
/// gives 111; "0111" gives nothing since its zeros would not survive.
std::optional<double> lossless_number(const std::string& key);

/// Renders with at most `significant_digits` significant digits (printf %g).
std::string format_number(double v, int significant_digits);

}  // namespace rollup
