#include "rollup/value.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>

namespace rollup {

Value Value::number(double v) {
    if (!std::isfinite(v)) return Value{};
    Value out;
    out.cell_ = v;
    return out;
}

Value Value::text(std::string s) {
    Value out;
    out.cell_ = std::move(s);
    return out;
}

std::string canonical_number(double v) {
    if (v == 0.0) return "0";  // merge the signed zeros
    // Integral values inside the exactly-representable range print as plain
    // integers; classification codes stored numerically must not pick up an
    // exponent or a trailing ".0".
    constexpr double kExactIntLimit = 9007199254740992.0;  // 2^53
    double rounded = std::nearbyint(v);
    if (rounded == v && std::fabs(v) < kExactIntLimit) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.0f", v);
        return buf;
    }
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) return "NA";
    return std::string(buf, end);
}

std::optional<double> lossless_number(const std::string& key) {
    if (key.empty()) return std::nullopt;
    double v = 0.0;
    auto [end, ec] = std::from_chars(key.data(), key.data() + key.size(), v);
    if (ec != std::errc{} || end != key.data() + key.size()) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    if (canonical_number(v) != key) return std::nullopt;
    return v;
}

std::string canonical_key(const Value& v) {
    if (v.is_null()) return "NA";
    if (v.is_text()) return v.as_text();
    return canonical_number(v.as_number());
}

std::string format_number(double v, int significant_digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, v);
    return buf;
}

}  // namespace rollup
