#include "feather/syntax.hpp"

#include "lexer.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace feather {

using detail::Token;
using detail::TokenKind;

std::string SourceDiagnostic::render() const
{
    return "line " + std::to_string(pos.line) + ", column " + std::to_string(pos.column) + ": " + message;
}

std::string_view to_string(ValueKind kind) noexcept
{
    switch (kind) {
    case ValueKind::inherited: return "inherited";
    case ValueKind::numeric: return "numeric";
    case ValueKind::boolean: return "boolean";
    case ValueKind::string: return "string";
    }
    return "?";
}

std::string_view Command::code() const noexcept
{
    struct Visitor {
        std::string_view operator()(const AddFeatureCmd&) const { return "addf"; }
        std::string_view operator()(const UpdateFeatureCmd& c) const { return c.all ? "upmf" : "upf"; }
        std::string_view operator()(const RemoveFeatureCmd& c) const { return c.all ? "rmmf" : "rmf"; }
        std::string_view operator()(const AddConstraintCmd&) const { return "addc"; }
        std::string_view operator()(const UpdateConstraintCmd& c) const { return c.all ? "upmc" : "upc"; }
        std::string_view operator()(const RemoveConstraintCmd& c) const { return c.all ? "rmmc" : "rmc"; }
    };
    return std::visit(Visitor{}, body);
}

bool is_feather_keyword(std::string_view word) noexcept
{
    static constexpr std::array<std::string_view, 30> words = {
        "root",      "feature",     "constraint",  "attribute",      "mandatory", "optional",
        "alternative", "or",        "to",          "requires",       "excludes",  "add",
        "update",    "updateall",   "remove",      "removeall",      "with",      "attributes",
        "where",     "set",         "inherited",   "numeric",        "boolean",   "string",
        "true",      "false",       "not",         "and",            "leftfeature", "rightfeature"};
    return word == "constrainttype" || std::find(words.begin(), words.end(), word) != words.end();
}

namespace {

struct SyntaxError {
    SourcePos pos;
    std::string message;
};

enum class Unit { script, declarations, commands };

std::optional<StructuralAttr> structural_from(std::string_view w)
{
    if (w == "_name") return StructuralAttr::name;
    if (w == "_parent") return StructuralAttr::parent;
    if (w == "_decomp") return StructuralAttr::decomp;
    if (w == "_decompID") return StructuralAttr::decomp_id;
    return std::nullopt;
}

bool is_decomp_node(const Expression& e, int i)
{
    const auto& n = e.node(i);
    return (n.kind == Expression::Kind::literal && type_of(n.literal) == ExprType::decomp) ||
           (n.kind == Expression::Kind::term && n.term.structural == StructuralAttr::decomp);
}

bool is_decomp_id_node(const Expression& e, int i)
{
    const auto& n = e.node(i);
    return n.kind == Expression::Kind::term && n.term.structural == StructuralAttr::decomp_id;
}

class Parser {
public:
    explicit Parser(std::string_view text) : toks_(detail::tokenize(text, false)) {}

    Diagnostics diags;
    Script script;

    void run(Unit unit)
    {
        unit_ = unit;
        while (peek().kind != TokenKind::end) {
            try {
                statement();
            } catch (const SyntaxError& e) {
                diags.push_back({e.pos, e.message});
                sync();
            }
        }
        if (unit != Unit::commands && !root_seen_)
            diags.push_back({peek().pos, "missing root declaration"});
        script.has_declarations = root_seen_;
    }

    Expression standalone_expression(std::vector<std::string>* variables)
    {
        Expression e;
        try {
            vars_ = variables ? variables : &scratch_vars_;
            parse_expression_into(e);
            if (peek().kind != TokenKind::end)
                fail_expected("end of expression");
        } catch (const SyntaxError& err) {
            diags.push_back({err.pos, err.message});
        }
        return e;
    }

private:
    // ---- token helpers ----------------------------------------------------

    const Token& peek(std::size_t k = 0) const { return toks_[std::min(p_ + k, toks_.size() - 1)]; }

    const Token& next()
    {
        const Token& t = peek();
        if (t.kind == TokenKind::error)
            throw SyntaxError{t.pos, t.text};
        if (p_ < toks_.size() - 1)
            ++p_;
        return t;
    }

    [[noreturn]] void fail(const Token& at, std::string message)
    {
        if (at.kind == TokenKind::error)
            throw SyntaxError{at.pos, at.text};
        throw SyntaxError{at.pos, std::move(message)};
    }

    [[noreturn]] void fail_expected(std::string_view what)
    {
        fail(peek(), "expected " + std::string(what) + ", found " + detail::describe(peek()));
    }

    void expect_punct(std::string_view p)
    {
        if (!peek().is_punct(p))
            fail_expected("'" + std::string(p) + "'");
        next();
    }

    void expect_word(std::string_view w)
    {
        if (!peek().is_word(w))
            fail_expected("'" + std::string(w) + "'");
        next();
    }

    bool accept_word(std::string_view w)
    {
        if (!peek().is_word(w))
            return false;
        next();
        return true;
    }

    void sync()
    {
        while (peek().kind != TokenKind::end) {
            bool semi = peek().is_punct(";");
            ++p_;
            if (semi)
                return;
        }
    }

    // ---- statements -------------------------------------------------------

    void statement()
    {
        const Token& t = peek();
        if (t.kind != TokenKind::word)
            fail_expected("a declaration or a command");
        const std::string& w = t.text;
        if (w == "root" || w == "feature" || w == "constraint") {
            if (unit_ == Unit::commands)
                fail(t, "declarations are not allowed in a commands file");
            if (phase_ == Phase::commands)
                fail(t, "declarations must precede commands");
            if (w == "root") {
                if (root_seen_)
                    fail(t, "only one root declaration is allowed");
                root_seen_ = true;
                phase_ = Phase::features;
                root_decl();
                return;
            }
            if (!root_seen_) {
                root_seen_ = true;
                phase_ = Phase::features;
                fail(t, "declarations must start with the root feature");
            }
            if (w == "feature") {
                if (phase_ == Phase::constraints)
                    fail(t, "feature declarations must precede constraint declarations");
                feature_decl();
            } else {
                phase_ = Phase::constraints;
                constraint_decl();
            }
            return;
        }
        if (w == "add" || w == "update" || w == "updateall" || w == "remove" || w == "removeall") {
            if (unit_ == Unit::declarations)
                fail(t, "commands are not allowed in a declarations file");
            if (unit_ == Unit::script && !root_seen_) {
                root_seen_ = true;
                fail(t, "declarations must start with the root feature");
            }
            phase_ = Phase::commands;
            command();
            return;
        }
        fail(t, "expected a declaration or a command, found " + detail::describe(t));
    }

    std::string feature_name(std::string_view what)
    {
        if (peek().kind != TokenKind::string)
            fail_expected(what);
        return next().text;
    }

    std::string attribute_name()
    {
        const Token& t = peek();
        if (t.kind != TokenKind::word)
            fail_expected("an attribute identifier");
        if (!detail::is_lower(t.text[0]))
            fail(t, "attribute identifier '" + t.text + "' must start with a lowercase letter");
        if (is_feather_keyword(t.text))
            fail(t, "'" + t.text + "' is a reserved word and cannot name an attribute");
        return next().text;
    }

    AttributeValue literal_value()
    {
        const Token& t = peek();
        if (t.is_punct("+") || t.is_punct("-")) {
            bool negative = t.text == "-";
            next();
            const Token& num = peek();
            if (num.kind == TokenKind::integer) {
                next();
                return negative ? AttributeValue(-num.integer) : AttributeValue(num.integer);
            }
            if (num.kind == TokenKind::real) {
                next();
                return negative ? AttributeValue(-num.real) : AttributeValue(num.real);
            }
            fail_expected("a numeric literal after the sign");
        }
        switch (t.kind) {
        case TokenKind::integer: return AttributeValue(next().integer);
        case TokenKind::real: return AttributeValue(next().real);
        case TokenKind::string: return AttributeValue(next().text);
        case TokenKind::word:
            if (t.text == "true" || t.text == "false")
                return AttributeValue(next().text == "true");
            break;
        default: break;
        }
        fail_expected("a literal value");
    }

    void attribute_decls(std::vector<AttributeDecl>& out)
    {
        while (peek().is_word("attribute")) {
            next();
            AttributeDecl a;
            a.pos = peek().pos;
            a.name = attribute_name();
            a.value = literal_value();
            out.push_back(std::move(a));
        }
    }

    void root_decl()
    {
        RootDecl r;
        r.pos = next().pos;
        r.name = feature_name("the root feature name");
        attribute_decls(r.attributes);
        expect_punct(";");
        script.declarations.root = std::move(r);
    }

    void feature_decl()
    {
        FeatureDecl f;
        f.pos = next().pos;
        f.name = feature_name("a feature name");
        f.parent = feature_name("the parent feature name");
        const Token& k = peek();
        auto kind = k.kind == TokenKind::word ? parse_decomp_kind(k.text) : std::nullopt;
        if (!kind)
            fail_expected("a decomposition relation (mandatory, optional, alternative to, or to)");
        next();
        f.decomp = *kind;
        if (is_group(*kind)) {
            expect_word("to");
            f.group_sibling = feature_name("a sibling feature name");
        }
        attribute_decls(f.attributes);
        expect_punct(";");
        script.declarations.features.push_back(std::move(f));
    }

    ConstraintKind constraint_kind()
    {
        if (accept_word("requires"))
            return ConstraintKind::requires_;
        if (accept_word("excludes"))
            return ConstraintKind::excludes;
        fail_expected("'requires' or 'excludes'");
    }

    void constraint_decl()
    {
        ConstraintDecl c;
        c.pos = next().pos;
        c.left = feature_name("a feature name");
        c.kind = constraint_kind();
        c.right = feature_name("a feature name");
        expect_punct(";");
        script.declarations.constraints.push_back(std::move(c));
    }

    // ---- commands -----------------------------------------------------------

    int slot_of(const std::string& name)
    {
        auto it = std::find(vars_->begin(), vars_->end(), name);
        if (it != vars_->end())
            return static_cast<int>(it - vars_->begin());
        vars_->push_back(name);
        return static_cast<int>(vars_->size() - 1);
    }

    bool at_feature_desc() const
    {
        const Token& t = peek();
        return t.kind == TokenKind::string || (t.kind == TokenKind::word && detail::is_upper(t.text[0]));
    }

    FeatureDesc feature_desc()
    {
        const Token& t = peek();
        if (t.kind == TokenKind::string)
            return FeatureDesc::literal(next().text);
        if (t.kind == TokenKind::word && detail::is_upper(t.text[0])) {
            std::string name = next().text;
            int slot = slot_of(name);
            return FeatureDesc::variable(std::move(name), slot);
        }
        fail_expected("a feature name or a feature variable");
    }

    // "Name" or V._name (a bare V is read the same way).
    FeatureDesc name_desc()
    {
        FeatureDesc d = feature_desc();
        if (d.is_variable && peek().is_punct(".")) {
            next();
            if (!peek().is_word("_name"))
                fail(peek(), "only " + d.text + "._name can describe a feature here");
            next();
        }
        return d;
    }

    DecompSpec decomp_spec()
    {
        DecompSpec spec;
        const Token& t = peek();
        auto kind = t.kind == TokenKind::word ? parse_decomp_kind(t.text) : std::nullopt;
        if (kind) {
            next();
            spec.kind = kind;
        } else if (at_feature_desc()) {
            spec.from = feature_desc();
            expect_punct(".");
            if (!peek().is_word("_decomp"))
                fail_expected("'_decomp'");
            next();
        } else {
            fail_expected("a decomposition relation");
        }
        if (peek().is_word("to")) {
            if (spec.kind && !is_group(*spec.kind))
                fail(peek(), "a " + std::string(to_string(*spec.kind)) + " relation cannot name a sibling");
            next();
            spec.sibling = feature_desc();
        }
        return spec;
    }

    ValueSpec value_spec()
    {
        ValueSpec v;
        const Token& t = peek();
        if (t.is_word("inherited")) {
            v.kind = ValueKind::inherited;
        } else if (t.is_word("numeric")) {
            v.kind = ValueKind::numeric;
        } else if (t.is_word("boolean")) {
            v.kind = ValueKind::boolean;
        } else if (t.is_word("string")) {
            v.kind = ValueKind::string;
        } else {
            fail_expected("an attribute type (inherited, numeric, boolean or string)");
        }
        next();
        expect_punct(":");
        switch (v.kind) {
        case ValueKind::inherited:
            v.source = feature_desc();
            expect_punct(".");
            v.source_attr = attribute_name();
            break;
        case ValueKind::numeric:
        case ValueKind::boolean: parse_expression_into(v.expr); break;
        case ValueKind::string: v.text = feature_name("a string literal"); break;
        }
        return v;
    }

    AttrAssign attr_assign()
    {
        AttrAssign a;
        a.pos = peek().pos;
        a.name = attribute_name();
        expect_punct("=");
        a.value = value_spec();
        return a;
    }

    void where_clause(Command& cmd)
    {
        if (accept_word("where"))
            parse_expression_into(cmd.where);
    }

    void command()
    {
        Command cmd;
        vars_ = &cmd.variables;
        const Token& head = next();
        cmd.pos = head.pos;
        std::string verb = head.text;
        bool is_feature = false;
        if (accept_word("feature"))
            is_feature = true;
        else if (!accept_word("constraint"))
            fail_expected("'feature' or 'constraint'");

        bool all = verb == "updateall" || verb == "removeall";
        if (is_feature) {
            if (verb == "add") {
                cmd.body = add_feature();
            } else if (verb == "update" || verb == "updateall") {
                UpdateFeatureCmd u;
                u.all = all;
                u.target = target_desc(all);
                expect_word("set");
                u.updates = feature_updates(all);
                cmd.body = std::move(u);
            } else {
                RemoveFeatureCmd r;
                r.all = all;
                r.target = target_desc(all);
                cmd.body = std::move(r);
            }
        } else {
            ConstraintDesc desc;
            desc.left = feature_desc();
            desc.kind = constraint_kind();
            desc.right = feature_desc();
            if (verb == "add") {
                cmd.body = AddConstraintCmd{std::move(desc)};
            } else if (verb == "update" || verb == "updateall") {
                UpdateConstraintCmd u;
                u.all = all;
                u.desc = std::move(desc);
                expect_word("set");
                u.updates = constraint_updates();
                cmd.body = std::move(u);
            } else {
                RemoveConstraintCmd r;
                r.all = all;
                r.desc = std::move(desc);
                cmd.body = std::move(r);
            }
        }
        where_clause(cmd);
        expect_punct(";");
        vars_ = &scratch_vars_;
        script.commands.push_back(std::move(cmd));
    }

    FeatureDesc target_desc(bool all)
    {
        const Token& t = peek();
        FeatureDesc d = feature_desc();
        if (all && !d.is_variable)
            fail(t, "a multiple-feature command needs a feature variable");
        return d;
    }

    AddFeatureCmd add_feature()
    {
        AddFeatureCmd a;
        a.name = feature_name("the new feature name");
        expect_word("with");
        expect_word("attributes");
        expect_punct("(");
        bool has_parent = false;
        bool has_decomp = false;
        for (;;) {
            const Token& t = peek();
            if (t.is_word("_parent")) {
                if (has_parent)
                    fail(t, "_parent is assigned more than once");
                next();
                expect_punct("=");
                a.parent = name_desc();
                has_parent = true;
            } else if (t.is_word("_decomp")) {
                if (has_decomp)
                    fail(t, "_decomp is assigned more than once");
                next();
                expect_punct("=");
                a.decomp = decomp_spec();
                has_decomp = true;
            } else if (t.is_word("_name") || t.is_word("_decompID")) {
                fail(t, t.text + " cannot be assigned in an add feature command");
            } else {
                a.attributes.push_back(attr_assign());
            }
            if (peek().is_punct(",")) {
                next();
                continue;
            }
            break;
        }
        if (!has_parent)
            fail(peek(), "add feature needs a _parent assignment");
        if (!has_decomp)
            fail(peek(), "add feature needs a _decomp assignment");
        expect_punct(")");
        return a;
    }

    FeatureUpdates feature_updates(bool all)
    {
        FeatureUpdates u;
        for (;;) {
            const Token& t = peek();
            SourcePos pos = t.pos;
            if (t.is_word("_name")) {
                if (all)
                    fail(t, "updateall feature cannot change _name");
                next();
                expect_punct("=");
                std::string name = feature_name("a string literal");
                if (!u.name)
                    u.name = std::move(name);
                u.parts.push_back({"_name", pos});
            } else if (t.is_word("_parent")) {
                next();
                expect_punct("=");
                FeatureDesc d = name_desc();
                if (!u.parent)
                    u.parent = std::move(d);
                u.parts.push_back({"_parent", pos});
            } else if (t.is_word("_decomp")) {
                next();
                expect_punct("=");
                DecompSpec d = decomp_spec();
                if (!u.decomp)
                    u.decomp = std::move(d);
                u.parts.push_back({"_decomp", pos});
            } else if (t.is_word("_decompID")) {
                fail(t, "_decompID is read-only");
            } else {
                AttrAssign a = attr_assign();
                u.parts.push_back({a.name, pos});
                u.attributes.push_back(std::move(a));
            }
            if (!peek().is_punct(","))
                break;
            next();
        }
        return u;
    }

    ConstraintUpdates constraint_updates()
    {
        ConstraintUpdates u;
        for (;;) {
            const Token& t = peek();
            SourcePos pos = t.pos;
            if (t.is_word("leftfeature")) {
                next();
                expect_punct("=");
                FeatureDesc d = name_desc();
                if (!u.left)
                    u.left = std::move(d);
                u.parts.push_back({"leftfeature", pos});
            } else if (t.is_word("rightfeature")) {
                next();
                expect_punct("=");
                FeatureDesc d = name_desc();
                if (!u.right)
                    u.right = std::move(d);
                u.parts.push_back({"rightfeature", pos});
            } else if (t.is_word("constrainttype")) {
                next();
                expect_punct("=");
                ConstraintKind k = constraint_kind();
                if (!u.kind)
                    u.kind = k;
                u.parts.push_back({"constrainttype", pos});
            } else {
                fail_expected("leftfeature, rightfeature or constrainttype");
            }
            if (!peek().is_punct(","))
                break;
            next();
        }
        return u;
    }

    // ---- expressions --------------------------------------------------------

    void parse_expression_into(Expression& e)
    {
        SourcePos start = peek().pos;
        e.set_root(parse_or(e));
        check_structural_placement(e, start);
    }

    int parse_or(Expression& e)
    {
        int lhs = parse_and(e);
        while (peek().is_word("or") && !ends_operand(1)) {
            next();
            lhs = e.add_binary(BinaryOp::logical_or, lhs, parse_and(e));
        }
        return lhs;
    }

    // `or` after an operand is the operator unless nothing that could start
    // an operand follows it.
    bool ends_operand(std::size_t k) const
    {
        const Token& t = peek(k);
        if (t.kind == TokenKind::end)
            return true;
        if (t.kind == TokenKind::punct)
            return !(t.text == "(" || t.text == "-");
        return t.kind == TokenKind::word && (t.text == "where" || t.text == "to");
    }

    int parse_and(Expression& e)
    {
        int lhs = parse_equality(e);
        while (peek().is_word("and")) {
            next();
            lhs = e.add_binary(BinaryOp::logical_and, lhs, parse_equality(e));
        }
        return lhs;
    }

    int parse_equality(Expression& e)
    {
        int lhs = parse_relational(e);
        for (;;) {
            BinaryOp op;
            if (peek().is_punct("="))
                op = BinaryOp::eq;
            else if (peek().is_punct("<>"))
                op = BinaryOp::ne;
            else
                return lhs;
            next();
            lhs = e.add_binary(op, lhs, parse_relational(e));
        }
    }

    int parse_relational(Expression& e)
    {
        int lhs = parse_additive(e);
        for (;;) {
            BinaryOp op;
            const Token& t = peek();
            if (t.is_punct("<"))
                op = BinaryOp::lt;
            else if (t.is_punct("<="))
                op = BinaryOp::le;
            else if (t.is_punct(">"))
                op = BinaryOp::gt;
            else if (t.is_punct(">="))
                op = BinaryOp::ge;
            else
                return lhs;
            next();
            lhs = e.add_binary(op, lhs, parse_additive(e));
        }
    }

    int parse_additive(Expression& e)
    {
        int lhs = parse_multiplicative(e);
        for (;;) {
            BinaryOp op;
            if (peek().is_punct("+"))
                op = BinaryOp::add;
            else if (peek().is_punct("-"))
                op = BinaryOp::sub;
            else
                return lhs;
            next();
            lhs = e.add_binary(op, lhs, parse_multiplicative(e));
        }
    }

    int parse_multiplicative(Expression& e)
    {
        int lhs = parse_unary(e);
        for (;;) {
            BinaryOp op;
            if (peek().is_punct("*"))
                op = BinaryOp::mul;
            else if (peek().is_punct("/"))
                op = BinaryOp::div;
            else if (peek().is_punct("%"))
                op = BinaryOp::mod;
            else
                return lhs;
            next();
            lhs = e.add_binary(op, lhs, parse_unary(e));
        }
    }

    int parse_unary(Expression& e)
    {
        if (peek().is_punct("-")) {
            next();
            return e.add_unary(UnaryOp::negate, parse_unary(e));
        }
        if (peek().is_word("not")) {
            next();
            return e.add_unary(UnaryOp::logical_not, parse_unary(e));
        }
        return parse_primary(e);
    }

    int parse_primary(Expression& e)
    {
        const Token& t = peek();
        switch (t.kind) {
        case TokenKind::integer: return e.add_literal(next().integer);
        case TokenKind::real: return e.add_literal(next().real);
        case TokenKind::punct:
            if (t.text == "(") {
                next();
                int inner = parse_or(e);
                expect_punct(")");
                return inner;
            }
            break;
        case TokenKind::word:
            if (t.text == "true" || t.text == "false")
                return e.add_literal(next().text == "true");
            if (auto kind = parse_decomp_kind(t.text)) {
                next();
                return e.add_literal(*kind);
            }
            break;
        default: break;
        }
        if (t.kind == TokenKind::string && !peek(1).is_punct("."))
            return e.add_literal(next().text);
        if (!at_feature_desc())
            fail_expected("an operand");
        Term term;
        term.subject = feature_desc();
        expect_punct(".");
        const Token& a = peek();
        if (a.kind == TokenKind::word) {
            if (auto s = structural_from(a.text)) {
                next();
                term.structural = *s;
                return e.add_term(std::move(term));
            }
        }
        term.attribute = attribute_name();
        return e.add_term(std::move(term));
    }

    // _decomp values and _decompID terms may only be compared for equality
    // with their own kind.
    void check_structural_placement(const Expression& e, SourcePos pos)
    {
        std::vector<int> parent(e.nodes().size(), -1);
        for (int i = 0; i < static_cast<int>(e.nodes().size()); ++i) {
            const auto& n = e.node(i);
            if (n.lhs >= 0)
                parent[n.lhs] = i;
            if (n.rhs >= 0)
                parent[n.rhs] = i;
        }
        for (int i = 0; i < static_cast<int>(e.nodes().size()); ++i) {
            bool decomp = is_decomp_node(e, i);
            bool decomp_id = is_decomp_id_node(e, i);
            if (!decomp && !decomp_id)
                continue;
            int p = parent[i];
            bool ok = false;
            if (p >= 0) {
                const auto& pn = e.node(p);
                if (pn.kind == Expression::Kind::binary && (pn.binary == BinaryOp::eq || pn.binary == BinaryOp::ne)) {
                    int other = pn.lhs == i ? pn.rhs : pn.lhs;
                    ok = decomp ? is_decomp_node(e, other) : is_decomp_id_node(e, other);
                }
            }
            if (!ok)
                throw SyntaxError{pos, decomp ? "a decomposition value can only be compared with = or <> against "
                                                "another decomposition value"
                                              : "_decompID can only be compared with = or <> against another "
                                                "_decompID"};
        }
    }

    enum class Phase { start, features, constraints, commands };

    std::vector<Token> toks_;
    std::size_t p_ = 0;
    Unit unit_ = Unit::script;
    Phase phase_ = Phase::start;
    bool root_seen_ = false;
    std::vector<std::string> scratch_vars_;
    std::vector<std::string>* vars_ = &scratch_vars_;
};

} // namespace

Result<Script, Diagnostics> parse_script(std::string_view text)
{
    Parser p(text);
    p.run(Unit::script);
    if (!p.diags.empty())
        return p.diags;
    return std::move(p.script);
}

Result<Declarations, Diagnostics> parse_declarations(std::string_view text)
{
    Parser p(text);
    p.run(Unit::declarations);
    if (!p.diags.empty())
        return p.diags;
    return std::move(p.script.declarations);
}

Result<std::vector<Command>, Diagnostics> parse_commands(std::string_view text)
{
    Parser p(text);
    p.run(Unit::commands);
    if (!p.diags.empty())
        return p.diags;
    return std::move(p.script.commands);
}

Result<Expression, Diagnostics> parse_expression(std::string_view text, std::vector<std::string>* variables)
{
    Parser p(text);
    Expression e = p.standalone_expression(variables);
    if (!p.diags.empty())
        return p.diags;
    return e;
}

// ---------------------------------------------------------------------------
// Static validation

namespace {

enum class Shape { numeric, boolean, string, decomp, unknown };

Shape shape_of(const Expression& e, int index)
{
    const auto& n = e.node(index);
    switch (n.kind) {
    case Expression::Kind::literal:
        switch (type_of(n.literal)) {
        case ExprType::integer:
        case ExprType::real: return Shape::numeric;
        case ExprType::boolean: return Shape::boolean;
        case ExprType::string: return Shape::string;
        default: return Shape::decomp;
        }
    case Expression::Kind::term:
        switch (n.term.structural) {
        case StructuralAttr::name:
        case StructuralAttr::parent: return Shape::string;
        case StructuralAttr::none: return Shape::unknown;
        default: return Shape::decomp;
        }
    case Expression::Kind::unary: return n.unary == UnaryOp::negate ? Shape::numeric : Shape::boolean;
    case Expression::Kind::binary:
        switch (n.binary) {
        case BinaryOp::add:
        case BinaryOp::sub:
        case BinaryOp::mul:
        case BinaryOp::div:
        case BinaryOp::mod: return Shape::numeric;
        default: return Shape::boolean;
        }
    }
    return Shape::unknown;
}

void check_values(const std::vector<AttrAssign>& attrs, SourcePos cmd_pos, Diagnostics& out)
{
    std::set<std::string> seen;
    for (const auto& a : attrs) {
        if (!seen.insert(a.name).second)
            out.push_back({a.pos, "attribute \"" + a.name + "\" is assigned more than once"});
        if (a.value.kind == ValueKind::numeric || a.value.kind == ValueKind::boolean) {
            Shape s = shape_of(a.value.expr, a.value.expr.root());
            bool numeric = a.value.kind == ValueKind::numeric;
            if (s != Shape::unknown && s != (numeric ? Shape::numeric : Shape::boolean))
                out.push_back({a.pos, "the value of attribute \"" + a.name + "\" is not " +
                                          (numeric ? "an arithmetic" : "a boolean") + " expression"});
        }
    }
    (void)cmd_pos;
}

} // namespace

Diagnostics validate_static(const Declarations& decls)
{
    Diagnostics out;
    std::set<std::string> names{decls.root.name};
    auto check_attrs = [&](const std::string& owner, const std::vector<AttributeDecl>& attrs) {
        std::set<std::string> seen;
        for (const auto& a : attrs)
            if (!seen.insert(a.name).second)
                out.push_back({a.pos, "attribute \"" + a.name + "\" of feature \"" + owner +
                                          "\" is declared more than once"});
    };
    check_attrs(decls.root.name, decls.root.attributes);
    for (const auto& f : decls.features) {
        if (!names.insert(f.name).second)
            out.push_back({f.pos, "feature \"" + f.name + "\" is declared more than once"});
        check_attrs(f.name, f.attributes);
    }
    for (const auto& f : decls.features) {
        if (!names.count(f.parent))
            out.push_back({f.pos, "parent \"" + f.parent + "\" of feature \"" + f.name + "\" is not declared"});
        if (f.group_sibling && !names.count(*f.group_sibling))
            out.push_back({f.pos, "sibling \"" + *f.group_sibling + "\" of feature \"" + f.name +
                                      "\" is not declared"});
    }
    for (const auto& c : decls.constraints)
        for (const auto* endpoint : {&c.left, &c.right})
            if (!names.count(*endpoint))
                out.push_back({c.pos, "constraint refers to undeclared feature \"" + *endpoint + "\""});
    return out;
}

Diagnostics validate_static(const std::vector<Command>& commands)
{
    Diagnostics out;
    auto repeated = [&](const std::vector<UpdatePart>& parts) {
        std::set<std::string> seen;
        for (const auto& p : parts)
            if (!seen.insert(p.target).second)
                out.push_back({p.pos, p.target + " is updated more than once in one command"});
    };
    for (const auto& cmd : commands) {
        if (!cmd.where.empty()) {
            Shape s = shape_of(cmd.where, cmd.where.root());
            if (s != Shape::unknown && s != Shape::boolean)
                out.push_back({cmd.pos, "the where clause is not a boolean expression"});
        }
        if (auto* a = std::get_if<AddFeatureCmd>(&cmd.body)) {
            check_values(a->attributes, cmd.pos, out);
        } else if (auto* u = std::get_if<UpdateFeatureCmd>(&cmd.body)) {
            repeated(u->updates.parts);
            Diagnostics values;
            check_values(u->updates.attributes, cmd.pos, values);
            for (auto& d : values)
                if (d.message.find("more than once") == std::string::npos)
                    out.push_back(std::move(d));
        } else if (auto* c = std::get_if<UpdateConstraintCmd>(&cmd.body)) {
            repeated(c->updates.parts);
            std::size_t limit = c->all ? 2 : 3;
            if (c->updates.parts.size() > limit)
                out.push_back({cmd.pos, std::string(c->all ? "updateall" : "update") + " constraint accepts at most " +
                                            std::to_string(limit) + " updates"});
        }
    }
    return out;
}

Diagnostics validate_static(const Script& script)
{
    Diagnostics out;
    if (script.has_declarations)
        out = validate_static(script.declarations);
    auto more = validate_static(script.commands);
    out.insert(out.end(), more.begin(), more.end());
    return out;
}

// ---------------------------------------------------------------------------
// Model construction

Result<FeatureModel, Diagnostics> build_model(const Declarations& decls)
{
    Diagnostics diags = validate_static(decls);
    auto attr_check = [&](const std::vector<AttributeDecl>& attrs) {
        for (const auto& a : attrs)
            if (!is_attribute_identifier(a.name))
                diags.push_back({a.pos, "invalid attribute identifier \"" + a.name + "\""});
    };
    attr_check(decls.root.attributes);
    for (const auto& f : decls.features)
        attr_check(f.attributes);
    if (decls.root.name.empty())
        diags.push_back({decls.root.pos, "missing root declaration"});
    if (!diags.empty())
        return diags;

    auto to_attributes = [](const std::vector<AttributeDecl>& attrs) {
        std::vector<Attribute> out;
        for (const auto& a : attrs)
            out.push_back({a.name, a.value});
        return out;
    };

    FeatureModel m(decls.root.name, to_attributes(decls.root.attributes));
    std::vector<FeatureId> ids;
    for (const auto& d : decls.features) {
        Feature f;
        f.name = d.name;
        f.decomp = d.decomp;
        f.attributes = to_attributes(d.attributes);
        ids.push_back(m.raw_insert(std::move(f)));
    }
    for (std::size_t i = 0; i < decls.features.size(); ++i)
        m.raw_feature(ids[i]).parent = *m.find(decls.features[i].parent);

    // Reachability from the root; anything else sits on a parent cycle.
    std::vector<std::vector<FeatureId>> kids(m.id_bound());
    for (FeatureId id : ids)
        kids[*m.feature(id).parent].push_back(id);
    std::vector<bool> reached(m.id_bound(), false);
    std::vector<FeatureId> stack{m.root()};
    reached[m.root()] = true;
    while (!stack.empty()) {
        FeatureId cur = stack.back();
        stack.pop_back();
        for (FeatureId k : kids[cur])
            if (!reached[k]) {
                reached[k] = true;
                stack.push_back(k);
            }
    }
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (!reached[ids[i]])
            diags.push_back({decls.features[i].pos,
                             "feature \"" + decls.features[i].name + "\" is not connected to the root (cycle)"});

    // Group formation: union sibling references, then number the classes in
    // the order their first member was declared.
    std::vector<FeatureId> leader(m.id_bound());
    std::iota(leader.begin(), leader.end(), FeatureId{0});
    auto find = [&](FeatureId x) {
        while (leader[x] != x)
            x = leader[x] = leader[leader[x]];
        return x;
    };
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto& d = decls.features[i];
        if (!d.group_sibling)
            continue;
        FeatureId sib = *m.find(*d.group_sibling);
        const Feature& self = m.feature(ids[i]);
        const Feature& other = m.feature(sib);
        if (other.parent != self.parent || other.decomp != self.decomp) {
            diags.push_back({d.pos, "feature \"" + d.name + "\" cannot join the " +
                                        std::string(to_string(d.decomp)) + " group of \"" + other.name +
                                        "\": the sibling has a different parent or relation"});
            continue;
        }
        FeatureId a = find(ids[i]);
        FeatureId b = find(sib);
        if (a != b)
            leader[std::max(a, b)] = std::min(a, b);
    }
    if (!diags.empty())
        return diags;

    std::map<FeatureId, int> group_of_class;
    int next_group = 1;
    for (FeatureId id : ids) {
        Feature& f = m.raw_feature(id);
        if (!is_group(*f.decomp))
            continue;
        auto [it, inserted] = group_of_class.emplace(find(id), next_group);
        if (inserted)
            ++next_group;
        f.group_id = it->second;
    }
    m.raw_set_next_group_id(next_group);

    for (const auto& c : decls.constraints)
        m.add_constraint({*m.find(c.left), c.kind, *m.find(c.right)});
    return m;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string quoted(const std::string& name)
{
    if (!is_representable_string(name))
        throw std::invalid_argument("feature name \"" + name + "\" cannot be written as a string literal");
    return '"' + name + '"';
}

void append_attributes(std::string& out, const std::vector<Attribute>& attrs)
{
    for (const auto& a : attrs) {
        if (a.value.type() == ValueType::string && !is_representable_string(a.value.as_string()))
            throw std::invalid_argument("value of attribute \"" + a.name + "\" cannot be written as a string literal");
        out += " attribute ";
        out += a.name;
        out += ' ';
        out += format_literal(a.value);
    }
}

} // namespace

std::string serialize_declarations(const FeatureModel& model)
{
    std::string out;
    const Feature& root = model.feature(model.root());
    out += "root " + quoted(root.name);
    append_attributes(out, root.attributes);
    out += ";\n";

    auto order = model.subtree(model.root());
    // Members reference the first member of their group; the first member
    // references the second one, or itself when alone.
    std::map<int, std::vector<FeatureId>> members;
    for (FeatureId id : order) {
        const Feature& f = model.feature(id);
        if (f.group_id > 0)
            members[f.group_id].push_back(id);
    }
    for (FeatureId id : order) {
        if (id == model.root())
            continue;
        const Feature& f = model.feature(id);
        out += "feature " + quoted(f.name) + ' ' + quoted(model.feature(*f.parent).name) + ' ';
        out += to_string(*f.decomp);
        if (f.group_id > 0) {
            const auto& group = members[f.group_id];
            FeatureId ref = group.front();
            if (ref == id && group.size() > 1)
                ref = group[1];
            out += " to " + quoted(model.feature(ref).name);
        }
        append_attributes(out, f.attributes);
        out += ";\n";
    }
    for (const auto& c : model.constraints())
        out += "constraint " + quoted(model.feature(c.left).name) + ' ' + std::string(to_string(c.kind)) + ' ' +
               quoted(model.feature(c.right).name) + ";\n";
    return out;
}

} // namespace feather
