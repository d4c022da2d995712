#pragma once

#include "feather/model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace feather {

/// Types an expression can evaluate to. The last two only come from
/// structural terms and decomposition literals.
enum class ExprType { integer, real, boolean, string, decomp, decomp_id };

std::string_view to_string(ExprType type) noexcept;

/// Opaque value of a `_decompID` term; only comparable for equality.
struct DecompId {
    int value = 0;
    friend bool operator==(DecompId, DecompId) = default;
};

/// Result of evaluating an expression. Alternative order matches ExprType.
using Value = std::variant<std::int64_t, double, bool, std::string, DecompKind, DecompId>;

inline ExprType type_of(const Value& v) noexcept
{
    return static_cast<ExprType>(v.index());
}

/// Converts an evaluated value to an attribute value; decomposition values
/// have no attribute form.
std::optional<AttributeValue> to_attribute_value(const Value& v);
std::string format_value(const Value& v);

enum class StructuralAttr { none, name, parent, decomp, decomp_id };

std::string_view to_string(StructuralAttr attr) noexcept;

/// A feature descriptor: a quoted feature name or a feature variable.
struct FeatureDesc {
    bool is_variable = false;
    std::string text; ///< feature name or variable identifier
    int slot = -1;    ///< variable slot inside the owning command

    static FeatureDesc literal(std::string name) { return {false, std::move(name), -1}; }
    static FeatureDesc variable(std::string name, int slot = -1) { return {true, std::move(name), slot}; }

    friend bool operator==(const FeatureDesc&, const FeatureDesc&) = default;
};

/// `"Feature".attr` or `V.attr`; structural terms leave `attribute` empty.
struct Term {
    FeatureDesc subject;
    StructuralAttr structural = StructuralAttr::none;
    std::string attribute;

    friend bool operator==(const Term&, const Term&) = default;
};

enum class UnaryOp { negate, logical_not };
enum class BinaryOp { add, sub, mul, div, mod, lt, le, gt, ge, eq, ne, logical_and, logical_or };

std::string_view to_string(UnaryOp op) noexcept;
std::string_view to_string(BinaryOp op) noexcept;
/// Binding strength; larger binds tighter.
int precedence(BinaryOp op) noexcept;

/// Expression tree stored as a flat node arena; `root` indexes `nodes`.
class Expression {
public:
    enum class Kind { literal, term, unary, binary };

    struct Node {
        Kind kind = Kind::literal;
        Value literal;
        Term term;
        UnaryOp unary = UnaryOp::negate;
        BinaryOp binary = BinaryOp::add;
        int lhs = -1;
        int rhs = -1;

        friend bool operator==(const Node&, const Node&) = default;
    };

    int add_literal(Value v);
    int add_term(Term t);
    int add_unary(UnaryOp op, int operand);
    int add_binary(BinaryOp op, int lhs, int rhs);

    const Node& node(int index) const { return nodes_.at(static_cast<std::size_t>(index)); }
    Node& node(int index) { return nodes_.at(static_cast<std::size_t>(index)); }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    int root() const noexcept { return root_; }
    void set_root(int index) noexcept { root_ = index; }
    bool empty() const noexcept { return root_ < 0; }

    /// Splits a tree of top-level `and`s into the root indices of its conjuncts.
    std::vector<int> conjuncts() const;
    /// Variable slots referenced under `index`, ascending and unique.
    std::vector<int> slots_under(int index) const;

    std::string to_infix() const;
    std::string to_infix(int index) const;
    /// Postfix rendering used by the intermediate dump (`1 2 3 * +`).
    std::string to_postfix() const;

    /// Structural equality of the trees (arena layout ignored).
    bool same_tree(const Expression& other) const;

private:
    std::vector<Node> nodes_;
    int root_ = -1;
};

struct EvalError {
    std::string message;
};

/// Feature chosen for each variable slot.
using Binding = std::span<const FeatureId>;

Result<ExprType, EvalError> typecheck(const Expression& expr, const FeatureModel& model, Binding binding);
Result<Value, EvalError> evaluate(const Expression& expr, const FeatureModel& model, Binding binding);
Result<Value, EvalError> evaluate_node(const Expression& expr, int index, const FeatureModel& model,
                                       Binding binding);

/// Non-allocating check used by the resolver: true iff the subexpression
/// evaluates to boolean true without any error.
bool holds(const Expression& expr, int index, const FeatureModel& model, Binding binding) noexcept;

/// What an occurrence of `V.attr` demands from the attribute.
enum class UsageContext { numeric, integer, boolean, string, decomp, decomp_id, any };

std::string_view to_string(UsageContext ctx) noexcept;

struct Usage {
    int slot = -1;
    std::string variable;
    StructuralAttr structural = StructuralAttr::none;
    std::string attribute;
    UsageContext context = UsageContext::any;

    friend bool operator==(const Usage&, const Usage&) = default;
};

/// Every variable term of `expr` with the type its position demands.
/// `root_context` is the demand placed on the whole expression.
std::vector<Usage> referenced_usages(const Expression& expr, UsageContext root_context = UsageContext::boolean);

/// True when feature `f` can stand in for a variable under this usage.
bool admits(const FeatureModel& model, FeatureId f, const Usage& usage);

} // namespace feather
