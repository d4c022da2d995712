#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace feather {

/// Type of the relation between a feature and its parent.
enum class DecompKind { mandatory, optional, alternative, or_ };

/// Group kinds (alternative, or) share a group id among siblings; the
/// other two are solitary.
constexpr bool is_group(DecompKind kind) noexcept
{
    return kind == DecompKind::alternative || kind == DecompKind::or_;
}

std::string_view to_string(DecompKind kind) noexcept;
std::optional<DecompKind> parse_decomp_kind(std::string_view text) noexcept;

enum class ConstraintKind { requires_, excludes };

std::string_view to_string(ConstraintKind kind) noexcept;

enum class ValueType { integer, real, boolean, string };

std::string_view to_string(ValueType type) noexcept;

/// A typed feature attribute value. Integers and reals are distinct tags.
class AttributeValue {
public:
    using Storage = std::variant<std::int64_t, double, bool, std::string>;

    AttributeValue() : storage_(std::int64_t{0}) {}
    AttributeValue(std::int64_t v) : storage_(v) {}
    AttributeValue(int v) : storage_(std::int64_t{v}) {}
    AttributeValue(double v) : storage_(v) {}
    AttributeValue(bool v) : storage_(v) {}
    AttributeValue(std::string v) : storage_(std::move(v)) {}
    AttributeValue(const char* v) : storage_(std::string(v)) {}

    ValueType type() const noexcept { return static_cast<ValueType>(storage_.index()); }
    bool is_numeric() const noexcept
    {
        return type() == ValueType::integer || type() == ValueType::real;
    }

    std::int64_t as_integer() const { return std::get<std::int64_t>(storage_); }
    double as_real() const { return std::get<double>(storage_); }
    bool as_boolean() const { return std::get<bool>(storage_); }
    const std::string& as_string() const { return std::get<std::string>(storage_); }

    const Storage& storage() const noexcept { return storage_; }

    /// Exact equality: tag and payload must both match.
    friend bool operator==(const AttributeValue&, const AttributeValue&) = default;

private:
    Storage storage_;
};

/// Renders a real so that it reads back as the same double and always
/// carries a decimal point (the literal grammar requires digits on both
/// sides of it).
std::string format_real(double value);

/// Renders a value as a Feather/TVL literal (strings quoted).
std::string format_literal(const AttributeValue& value);

/// Characters allowed inside a string literal besides letters and digits.
bool is_string_literal_char(char c) noexcept;

/// True when every character of `text` may appear inside a string literal.
bool is_representable_string(std::string_view text) noexcept;

/// Minimal expected-like carrier used where failure is an ordinary outcome.
template <class T, class E>
class Result {
public:
    Result(T value) : storage_(std::in_place_index<0>, std::move(value)) {}
    Result(E error) : storage_(std::in_place_index<1>, std::move(error)) {}

    bool has_value() const noexcept { return storage_.index() == 0; }
    explicit operator bool() const noexcept { return has_value(); }

    T& value() & { return std::get<0>(storage_); }
    const T& value() const& { return std::get<0>(storage_); }
    T&& value() && { return std::get<0>(std::move(storage_)); }
    const E& error() const { return std::get<1>(storage_); }

    const T& operator*() const& { return value(); }
    const T* operator->() const { return &value(); }

private:
    std::variant<T, E> storage_;
};

} // namespace feather
