#include "feather/expression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace feather {

std::string_view to_string(ExprType type) noexcept
{
    switch (type) {
    case ExprType::integer: return "integer";
    case ExprType::real: return "real";
    case ExprType::boolean: return "boolean";
    case ExprType::string: return "string";
    case ExprType::decomp: return "decomposition type";
    case ExprType::decomp_id: return "decomposition id";
    }
    return "?";
}

std::optional<AttributeValue> to_attribute_value(const Value& v)
{
    switch (type_of(v)) {
    case ExprType::integer: return AttributeValue(std::get<std::int64_t>(v));
    case ExprType::real: return AttributeValue(std::get<double>(v));
    case ExprType::boolean: return AttributeValue(std::get<bool>(v));
    case ExprType::string: return AttributeValue(std::get<std::string>(v));
    default: return std::nullopt;
    }
}

std::string format_value(const Value& v)
{
    switch (type_of(v)) {
    case ExprType::decomp: return std::string(to_string(std::get<DecompKind>(v)));
    case ExprType::decomp_id: return "#" + std::to_string(std::get<DecompId>(v).value);
    default: return format_literal(*to_attribute_value(v));
    }
}

std::string_view to_string(StructuralAttr attr) noexcept
{
    switch (attr) {
    case StructuralAttr::name: return "_name";
    case StructuralAttr::parent: return "_parent";
    case StructuralAttr::decomp: return "_decomp";
    case StructuralAttr::decomp_id: return "_decompID";
    case StructuralAttr::none: break;
    }
    return "";
}

std::string_view to_string(UnaryOp op) noexcept
{
    return op == UnaryOp::negate ? "-" : "not";
}

std::string_view to_string(BinaryOp op) noexcept
{
    switch (op) {
    case BinaryOp::add: return "+";
    case BinaryOp::sub: return "-";
    case BinaryOp::mul: return "*";
    case BinaryOp::div: return "/";
    case BinaryOp::mod: return "%";
    case BinaryOp::lt: return "<";
    case BinaryOp::le: return "<=";
    case BinaryOp::gt: return ">";
    case BinaryOp::ge: return ">=";
    case BinaryOp::eq: return "=";
    case BinaryOp::ne: return "<>";
    case BinaryOp::logical_and: return "and";
    case BinaryOp::logical_or: return "or";
    }
    return "?";
}

int precedence(BinaryOp op) noexcept
{
    switch (op) {
    case BinaryOp::logical_or: return 1;
    case BinaryOp::logical_and: return 2;
    case BinaryOp::eq:
    case BinaryOp::ne: return 3;
    case BinaryOp::lt:
    case BinaryOp::le:
    case BinaryOp::gt:
    case BinaryOp::ge: return 4;
    case BinaryOp::add:
    case BinaryOp::sub: return 5;
    case BinaryOp::mul:
    case BinaryOp::div:
    case BinaryOp::mod: return 6;
    }
    return 0;
}

std::string_view to_string(UsageContext ctx) noexcept
{
    switch (ctx) {
    case UsageContext::numeric: return "numeric";
    case UsageContext::integer: return "integer";
    case UsageContext::boolean: return "boolean";
    case UsageContext::string: return "string";
    case UsageContext::decomp: return "decomp";
    case UsageContext::decomp_id: return "decompID";
    case UsageContext::any: return "any";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Tree construction and rendering

int Expression::add_literal(Value v)
{
    Node n;
    n.kind = Kind::literal;
    n.literal = std::move(v);
    nodes_.push_back(std::move(n));
    return root_ = static_cast<int>(nodes_.size() - 1);
}

int Expression::add_term(Term t)
{
    Node n;
    n.kind = Kind::term;
    n.term = std::move(t);
    nodes_.push_back(std::move(n));
    return root_ = static_cast<int>(nodes_.size() - 1);
}

int Expression::add_unary(UnaryOp op, int operand)
{
    Node n;
    n.kind = Kind::unary;
    n.unary = op;
    n.lhs = operand;
    nodes_.push_back(std::move(n));
    return root_ = static_cast<int>(nodes_.size() - 1);
}

int Expression::add_binary(BinaryOp op, int lhs, int rhs)
{
    Node n;
    n.kind = Kind::binary;
    n.binary = op;
    n.lhs = lhs;
    n.rhs = rhs;
    nodes_.push_back(std::move(n));
    return root_ = static_cast<int>(nodes_.size() - 1);
}

std::vector<int> Expression::conjuncts() const
{
    std::vector<int> out;
    if (empty())
        return out;
    std::vector<int> stack{root_};
    while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        const Node& n = node(i);
        if (n.kind == Kind::binary && n.binary == BinaryOp::logical_and) {
            stack.push_back(n.rhs);
            stack.push_back(n.lhs);
        } else {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<int> Expression::slots_under(int index) const
{
    std::vector<int> out;
    std::vector<int> stack{index};
    while (!stack.empty()) {
        const Node& n = node(stack.back());
        stack.pop_back();
        if (n.kind == Kind::term && n.term.subject.is_variable)
            out.push_back(n.term.subject.slot);
        if (n.lhs >= 0)
            stack.push_back(n.lhs);
        if (n.rhs >= 0)
            stack.push_back(n.rhs);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

std::string render_term(const Term& t)
{
    std::string out = t.subject.is_variable ? t.subject.text : '"' + t.subject.text + '"';
    out += '.';
    out += t.structural == StructuralAttr::none ? t.attribute : std::string(to_string(t.structural));
    return out;
}

void infix(const Expression& e, int index, std::string& out)
{
    const auto& n = e.node(index);
    switch (n.kind) {
    case Expression::Kind::literal: out += format_value(n.literal); return;
    case Expression::Kind::term: out += render_term(n.term); return;
    case Expression::Kind::unary: {
        out += n.unary == UnaryOp::negate ? "-" : "not ";
        bool wrap = e.node(n.lhs).kind == Expression::Kind::binary;
        if (wrap)
            out += '(';
        infix(e, n.lhs, out);
        if (wrap)
            out += ')';
        return;
    }
    case Expression::Kind::binary: {
        int p = precedence(n.binary);
        auto side = [&](int child, bool right) {
            const auto& c = e.node(child);
            bool wrap = c.kind == Expression::Kind::binary &&
                        (precedence(c.binary) < p || (right && precedence(c.binary) == p));
            if (wrap)
                out += '(';
            infix(e, child, out);
            if (wrap)
                out += ')';
        };
        side(n.lhs, false);
        out += ' ';
        out += to_string(n.binary);
        out += ' ';
        side(n.rhs, true);
        return;
    }
    }
}

void postfix(const Expression& e, int index, std::string& out)
{
    const auto& n = e.node(index);
    switch (n.kind) {
    case Expression::Kind::literal:
    case Expression::Kind::term:
        if (!out.empty())
            out += ' ';
        out += n.kind == Expression::Kind::literal ? format_value(n.literal) : render_term(n.term);
        return;
    case Expression::Kind::unary:
        postfix(e, n.lhs, out);
        out += n.unary == UnaryOp::negate ? " neg" : " not";
        return;
    case Expression::Kind::binary:
        postfix(e, n.lhs, out);
        postfix(e, n.rhs, out);
        out += ' ';
        out += to_string(n.binary);
        return;
    }
}

bool same_subtree(const Expression& a, int ia, const Expression& b, int ib)
{
    const auto& x = a.node(ia);
    const auto& y = b.node(ib);
    if (x.kind != y.kind)
        return false;
    switch (x.kind) {
    case Expression::Kind::literal: return x.literal == y.literal;
    case Expression::Kind::term: return x.term == y.term;
    case Expression::Kind::unary: return x.unary == y.unary && same_subtree(a, x.lhs, b, y.lhs);
    case Expression::Kind::binary:
        return x.binary == y.binary && same_subtree(a, x.lhs, b, y.lhs) && same_subtree(a, x.rhs, b, y.rhs);
    }
    return false;
}

} // namespace

std::string Expression::to_infix() const
{
    return empty() ? std::string() : to_infix(root_);
}

std::string Expression::to_infix(int index) const
{
    std::string out;
    infix(*this, index, out);
    return out;
}

std::string Expression::to_postfix() const
{
    std::string out;
    if (!empty())
        postfix(*this, root_, out);
    return out;
}

bool Expression::same_tree(const Expression& other) const
{
    if (empty() || other.empty())
        return empty() == other.empty();
    return same_subtree(*this, root_, other, other.root_);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

// Working value: strings borrow from the model or the expression, which
// both outlive one evaluation.
struct Scratch {
    ExprType type = ExprType::integer;
    std::int64_t i = 0;
    double r = 0.0;
    bool b = false;
    std::string_view s;
    DecompKind d = DecompKind::mandatory;
    int g = 0;

    bool numeric() const { return type == ExprType::integer || type == ExprType::real; }
    double real() const { return type == ExprType::integer ? static_cast<double>(i) : r; }
};

void load(const Value& v, Scratch& out)
{
    out.type = type_of(v);
    switch (out.type) {
    case ExprType::integer: out.i = std::get<std::int64_t>(v); break;
    case ExprType::real: out.r = std::get<double>(v); break;
    case ExprType::boolean: out.b = std::get<bool>(v); break;
    case ExprType::string: out.s = std::get<std::string>(v); break;
    case ExprType::decomp: out.d = std::get<DecompKind>(v); break;
    case ExprType::decomp_id: out.g = std::get<DecompId>(v).value; break;
    }
}

void load(const AttributeValue& v, Scratch& out)
{
    switch (v.type()) {
    case ValueType::integer: out.type = ExprType::integer; out.i = v.as_integer(); break;
    case ValueType::real: out.type = ExprType::real; out.r = v.as_real(); break;
    case ValueType::boolean: out.type = ExprType::boolean; out.b = v.as_boolean(); break;
    case ValueType::string: out.type = ExprType::string; out.s = v.as_string(); break;
    }
}

Value store(const Scratch& s)
{
    switch (s.type) {
    case ExprType::integer: return s.i;
    case ExprType::real: return s.r;
    case ExprType::boolean: return s.b;
    case ExprType::string: return std::string(s.s);
    case ExprType::decomp: return s.d;
    case ExprType::decomp_id: return DecompId{s.g};
    }
    return std::int64_t{0};
}

bool is_arithmetic(BinaryOp op)
{
    return op == BinaryOp::add || op == BinaryOp::sub || op == BinaryOp::mul || op == BinaryOp::div ||
           op == BinaryOp::mod;
}

bool is_relational(BinaryOp op)
{
    return op == BinaryOp::lt || op == BinaryOp::le || op == BinaryOp::gt || op == BinaryOp::ge;
}

class Evaluator {
public:
    Evaluator(const Expression& e, const FeatureModel& m, Binding binding, bool check_only, std::string* error)
        : e_(e), m_(m), binding_(binding), check_only_(check_only), error_(error)
    {
    }

    bool run(int index, Scratch& out)
    {
        const auto& n = e_.node(index);
        switch (n.kind) {
        case Expression::Kind::literal: load(n.literal, out); return true;
        case Expression::Kind::term: return term(n.term, out);
        case Expression::Kind::unary: return unary(n, out);
        case Expression::Kind::binary: return binary(n, out);
        }
        return false;
    }

private:
    template <class F>
    bool fail(F&& message)
    {
        if (error_)
            *error_ = message();
        return false;
    }

    bool subject(const FeatureDesc& d, FeatureId& out)
    {
        if (d.is_variable) {
            if (d.slot < 0 || static_cast<std::size_t>(d.slot) >= binding_.size() ||
                !m_.contains(binding_[d.slot]))
                return fail([&] { return "Feature variable " + d.text + " is not bound to a feature"; });
            out = binding_[d.slot];
            return true;
        }
        auto id = m_.find(d.text);
        if (!id)
            return fail([&] { return "Feature \"" + d.text + "\" does not exist"; });
        out = *id;
        return true;
    }

    bool term(const Term& t, Scratch& out)
    {
        FeatureId id = 0;
        if (!subject(t.subject, id))
            return false;
        const Feature& f = m_.feature(id);
        switch (t.structural) {
        case StructuralAttr::name:
            out.type = ExprType::string;
            out.s = f.name;
            return true;
        case StructuralAttr::parent:
            out.type = ExprType::string;
            out.s = f.parent ? std::string_view(m_.feature(*f.parent).name) : std::string_view();
            return true;
        case StructuralAttr::decomp:
            if (!f.decomp)
                return fail([&] { return "The root feature \"" + f.name + "\" has no decomposition relation"; });
            out.type = ExprType::decomp;
            out.d = *f.decomp;
            return true;
        case StructuralAttr::decomp_id:
            if (!f.decomp)
                return fail([&] { return "The root feature \"" + f.name + "\" has no decomposition relation"; });
            out.type = ExprType::decomp_id;
            out.g = f.group_id;
            return true;
        case StructuralAttr::none: break;
        }
        const AttributeValue* v = f.find_attribute(t.attribute);
        if (!v)
            return fail([&] {
                return "Feature \"" + f.name + "\" does not have an attribute named \"" + t.attribute + "\"";
            });
        load(*v, out);
        return true;
    }

    bool unary(const Expression::Node& n, Scratch& out)
    {
        if (!run(n.lhs, out))
            return false;
        if (n.unary == UnaryOp::logical_not) {
            if (out.type != ExprType::boolean)
                return fail([&] { return "Operator 'not' cannot be applied to " + std::string(to_string(out.type)); });
            out.b = !out.b;
            return true;
        }
        if (out.type == ExprType::real) {
            out.r = -out.r;
            return true;
        }
        if (out.type != ExprType::integer)
            return fail([&] { return "Operator '-' cannot be applied to " + std::string(to_string(out.type)); });
        if (out.i == std::numeric_limits<std::int64_t>::min()) {
            if (!check_only_)
                return fail([] { return std::string("Integer overflow"); });
            out.i = 0;
            return true;
        }
        out.i = -out.i;
        return true;
    }

    bool mismatch(BinaryOp op, const Scratch& a, const Scratch& b)
    {
        return fail([&] {
            return "Operator '" + std::string(to_string(op)) + "' cannot be applied to " +
                   std::string(to_string(a.type)) + " and " + std::string(to_string(b.type));
        });
    }

    bool binary(const Expression::Node& n, Scratch& out)
    {
        Scratch a;
        Scratch b;
        // Both sides are always evaluated: errors anywhere make the whole
        // expression ill-formed, whatever the other operand says.
        if (!run(n.lhs, a) || !run(n.rhs, b))
            return false;
        BinaryOp op = n.binary;

        if (op == BinaryOp::logical_and || op == BinaryOp::logical_or) {
            if (a.type != ExprType::boolean || b.type != ExprType::boolean)
                return mismatch(op, a, b);
            out.type = ExprType::boolean;
            out.b = op == BinaryOp::logical_and ? (a.b && b.b) : (a.b || b.b);
            return true;
        }
        if (op == BinaryOp::eq || op == BinaryOp::ne) {
            bool equal = false;
            if (a.numeric() && b.numeric()) {
                equal = (a.type == ExprType::integer && b.type == ExprType::integer) ? a.i == b.i
                                                                                      : a.real() == b.real();
            } else if (a.type != b.type) {
                return mismatch(op, a, b);
            } else {
                switch (a.type) {
                case ExprType::boolean: equal = a.b == b.b; break;
                case ExprType::string: equal = a.s == b.s; break;
                case ExprType::decomp: equal = a.d == b.d; break;
                case ExprType::decomp_id: equal = a.g == b.g; break;
                default: break;
                }
            }
            out.type = ExprType::boolean;
            out.b = (op == BinaryOp::eq) == equal;
            return true;
        }
        if (!a.numeric() || !b.numeric())
            return mismatch(op, a, b);

        if (is_relational(op)) {
            bool both_int = a.type == ExprType::integer && b.type == ExprType::integer;
            int cmp = 0;
            if (both_int)
                cmp = a.i < b.i ? -1 : (a.i > b.i ? 1 : 0);
            else
                cmp = a.real() < b.real() ? -1 : (a.real() > b.real() ? 1 : 0);
            out.type = ExprType::boolean;
            switch (op) {
            case BinaryOp::lt: out.b = cmp < 0; break;
            case BinaryOp::le: out.b = cmp <= 0; break;
            case BinaryOp::gt: out.b = cmp > 0; break;
            default: out.b = cmp >= 0; break;
            }
            return true;
        }
        return arithmetic(op, a, b, out);
    }

    bool arithmetic(BinaryOp op, const Scratch& a, const Scratch& b, Scratch& out)
    {
        bool both_int = a.type == ExprType::integer && b.type == ExprType::integer;
        if (op == BinaryOp::mod) {
            if (!both_int)
                return mismatch(op, a, b);
            out.type = ExprType::integer;
            if (b.i == 0) {
                if (!check_only_)
                    return fail([] { return std::string("Modulo by zero"); });
                out.i = 0;
                return true;
            }
            out.i = b.i == -1 ? 0 : a.i % b.i;
            return true;
        }
        if (op == BinaryOp::div) {
            out.type = ExprType::real;
            double divisor = b.real();
            if (divisor == 0.0) {
                if (!check_only_)
                    return fail([] { return std::string("Division by zero"); });
                out.r = 0.0;
                return true;
            }
            out.r = a.real() / divisor;
            return finite(out);
        }
        if (both_int) {
            out.type = ExprType::integer;
            bool overflow = false;
            switch (op) {
            case BinaryOp::add: overflow = __builtin_add_overflow(a.i, b.i, &out.i); break;
            case BinaryOp::sub: overflow = __builtin_sub_overflow(a.i, b.i, &out.i); break;
            default: overflow = __builtin_mul_overflow(a.i, b.i, &out.i); break;
            }
            if (overflow && !check_only_)
                return fail([] { return std::string("Integer overflow"); });
            return true;
        }
        out.type = ExprType::real;
        switch (op) {
        case BinaryOp::add: out.r = a.real() + b.real(); break;
        case BinaryOp::sub: out.r = a.real() - b.real(); break;
        default: out.r = a.real() * b.real(); break;
        }
        return finite(out);
    }

    bool finite(Scratch& out)
    {
        if (std::isfinite(out.r) || check_only_)
            return true;
        return fail([] { return std::string("Arithmetic overflow"); });
    }

    const Expression& e_;
    const FeatureModel& m_;
    Binding binding_;
    bool check_only_;
    std::string* error_;
};

} // namespace

Result<ExprType, EvalError> typecheck(const Expression& expr, const FeatureModel& model, Binding binding)
{
    if (expr.empty())
        return ExprType::boolean;
    std::string error;
    Scratch out;
    Evaluator ev(expr, model, binding, true, &error);
    if (!ev.run(expr.root(), out))
        return EvalError{error};
    return out.type;
}

Result<Value, EvalError> evaluate_node(const Expression& expr, int index, const FeatureModel& model,
                                       Binding binding)
{
    std::string error;
    Scratch out;
    Evaluator ev(expr, model, binding, false, &error);
    if (!ev.run(index, out))
        return EvalError{error};
    return store(out);
}

Result<Value, EvalError> evaluate(const Expression& expr, const FeatureModel& model, Binding binding)
{
    if (expr.empty())
        return Value(true);
    return evaluate_node(expr, expr.root(), model, binding);
}

bool holds(const Expression& expr, int index, const FeatureModel& model, Binding binding) noexcept
{
    Scratch out;
    Evaluator ev(expr, model, binding, false, nullptr);
    return ev.run(index, out) && out.type == ExprType::boolean && out.b;
}

// ---------------------------------------------------------------------------
// Usage analysis

namespace {

UsageContext structural_context(StructuralAttr attr)
{
    switch (attr) {
    case StructuralAttr::name:
    case StructuralAttr::parent: return UsageContext::string;
    case StructuralAttr::decomp: return UsageContext::decomp;
    case StructuralAttr::decomp_id: return UsageContext::decomp_id;
    case StructuralAttr::none: break;
    }
    return UsageContext::any;
}

// The demand an operand places on the opposite side of = / <>.
UsageContext static_context(const Expression& e, int index)
{
    const auto& n = e.node(index);
    switch (n.kind) {
    case Expression::Kind::literal:
        switch (type_of(n.literal)) {
        case ExprType::integer:
        case ExprType::real: return UsageContext::numeric;
        case ExprType::boolean: return UsageContext::boolean;
        case ExprType::string: return UsageContext::string;
        case ExprType::decomp: return UsageContext::decomp;
        case ExprType::decomp_id: return UsageContext::decomp_id;
        }
        return UsageContext::any;
    case Expression::Kind::term:
        return n.term.structural == StructuralAttr::none ? UsageContext::any : structural_context(n.term.structural);
    case Expression::Kind::unary:
        return n.unary == UnaryOp::negate ? UsageContext::numeric : UsageContext::boolean;
    case Expression::Kind::binary:
        return is_arithmetic(n.binary) ? UsageContext::numeric : UsageContext::boolean;
    }
    return UsageContext::any;
}

void collect(const Expression& e, int index, UsageContext ctx, std::vector<Usage>& out)
{
    const auto& n = e.node(index);
    switch (n.kind) {
    case Expression::Kind::literal: return;
    case Expression::Kind::term:
        if (n.term.subject.is_variable) {
            UsageContext c = n.term.structural == StructuralAttr::none ? ctx : structural_context(n.term.structural);
            out.push_back({n.term.subject.slot, n.term.subject.text, n.term.structural, n.term.attribute, c});
        }
        return;
    case Expression::Kind::unary:
        collect(e, n.lhs, n.unary == UnaryOp::negate ? UsageContext::numeric : UsageContext::boolean, out);
        return;
    case Expression::Kind::binary:
        if (n.binary == BinaryOp::eq || n.binary == BinaryOp::ne) {
            collect(e, n.lhs, static_context(e, n.rhs), out);
            collect(e, n.rhs, static_context(e, n.lhs), out);
            return;
        }
        UsageContext operand = UsageContext::numeric;
        if (n.binary == BinaryOp::mod)
            operand = UsageContext::integer;
        else if (n.binary == BinaryOp::logical_and || n.binary == BinaryOp::logical_or)
            operand = UsageContext::boolean;
        collect(e, n.lhs, operand, out);
        collect(e, n.rhs, operand, out);
        return;
    }
}

} // namespace

std::vector<Usage> referenced_usages(const Expression& expr, UsageContext root_context)
{
    std::vector<Usage> out;
    if (!expr.empty())
        collect(expr, expr.root(), root_context, out);
    return out;
}

bool admits(const FeatureModel& model, FeatureId f, const Usage& usage)
{
    const Feature& feature = model.feature(f);
    switch (usage.structural) {
    case StructuralAttr::name:
    case StructuralAttr::parent: return true;
    case StructuralAttr::decomp:
    case StructuralAttr::decomp_id: return feature.decomp.has_value();
    case StructuralAttr::none: break;
    }
    const AttributeValue* v = feature.find_attribute(usage.attribute);
    if (!v)
        return false;
    switch (usage.context) {
    case UsageContext::numeric: return v->is_numeric();
    case UsageContext::integer: return v->type() == ValueType::integer;
    case UsageContext::boolean: return v->type() == ValueType::boolean;
    case UsageContext::string: return v->type() == ValueType::string;
    case UsageContext::decomp:
    case UsageContext::decomp_id: return false;
    case UsageContext::any: return true;
    }
    return false;
}

} // namespace feather
