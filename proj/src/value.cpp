#include "feather/value.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string_view>

namespace feather {

std::string_view to_string(DecompKind kind) noexcept
{
    switch (kind) {
    case DecompKind::mandatory: return "mandatory";
    case DecompKind::optional: return "optional";
    case DecompKind::alternative: return "alternative";
    case DecompKind::or_: return "or";
    }
    return "?";
}

std::optional<DecompKind> parse_decomp_kind(std::string_view text) noexcept
{
    if (text == "mandatory") return DecompKind::mandatory;
    if (text == "optional") return DecompKind::optional;
    if (text == "alternative") return DecompKind::alternative;
    if (text == "or") return DecompKind::or_;
    return std::nullopt;
}

std::string_view to_string(ConstraintKind kind) noexcept
{
    return kind == ConstraintKind::requires_ ? "requires" : "excludes";
}

std::string_view to_string(ValueType type) noexcept
{
    switch (type) {
    case ValueType::integer: return "integer";
    case ValueType::real: return "real";
    case ValueType::boolean: return "boolean";
    case ValueType::string: return "string";
    }
    return "?";
}

std::string format_real(double value)
{
    if (!std::isfinite(value))
        throw std::invalid_argument("non-finite real has no literal form");
    char buffer[512];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value, std::chars_format::fixed);
    if (ec != std::errc{})
        throw std::invalid_argument("real value too long to format");
    std::string text(buffer, end);
    if (text.find('.') == std::string::npos)
        text += ".0";
    return text;
}

std::string format_literal(const AttributeValue& value)
{
    switch (value.type()) {
    case ValueType::integer: return std::to_string(value.as_integer());
    case ValueType::real: return format_real(value.as_real());
    case ValueType::boolean: return value.as_boolean() ? "true" : "false";
    case ValueType::string: return '"' + value.as_string() + '"';
    }
    return {};
}

bool is_string_literal_char(char c) noexcept
{
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'))
        return true;
    constexpr std::string_view other = " ~!@#$%^&*()_+[]'/.,-;:";
    return other.find(c) != std::string_view::npos;
}

bool is_representable_string(std::string_view text) noexcept
{
    if (text.empty())
        return false;
    for (char c : text)
        if (!is_string_literal_char(c))
            return false;
    return true;
}

} // namespace feather
