#include "feather/tvl.hpp"

#include "lexer.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>

namespace feather {

using detail::Token;
using detail::TokenKind;

bool is_tvl_keyword(std::string_view word) noexcept
{
    static constexpr std::array<std::string_view, 17> words = {
        "root", "group", "allof", "oneof", "someof", "opt",  "requires", "excludes", "int",
        "real", "bool",  "string", "is",   "true",   "false", "enum",    "in",
    };
    return std::find(words.begin(), words.end(), word) != words.end();
}

bool is_tvl_id(std::string_view text) noexcept
{
    if (text.empty() || !(detail::is_upper(text[0]) || detail::is_lower(text[0])))
        return false;
    for (char c : text)
        if (!(detail::is_upper(c) || detail::is_lower(c) || detail::is_digit(c) || c == '_'))
            return false;
    return !is_tvl_keyword(text);
}

namespace {

struct Failure {
    SourcePos pos;
    std::string message;
};

struct Group {
    std::optional<DecompKind> kind; ///< alternative or or; empty for allof
    std::vector<std::pair<std::string, bool>> members; ///< id, opt flag
    SourcePos pos;
};

struct Block {
    std::string id;
    std::vector<AttributeDecl> attributes;
    std::vector<Group> groups;
    std::vector<ConstraintDecl> constraints;
    SourcePos pos;
};

std::size_t offset_of(std::string_view text, SourcePos pos)
{
    int line = 1;
    std::size_t i = 0;
    while (i < text.size() && line < pos.line) {
        if (text[i] == '\n')
            ++line;
        ++i;
    }
    return std::min(text.size(), i + static_cast<std::size_t>(pos.column - 1));
}

class TvlParser {
public:
    explicit TvlParser(std::string_view text) : text_(text), tokens_(detail::tokenize(text, true)) {}

    std::optional<std::string> string_type;
    std::vector<Block> blocks;

    void parse()
    {
        if (peek().is_word("enum")) {
            SourcePos start = next().pos;
            expect_word("string");
            expect_word("in");
            expect_punct("{");
            do {
                if (peek().kind != TokenKind::string)
                    fail_expected("a string literal");
                next();
            } while (accept_punct(","));
            expect_punct("}");
            SourcePos end = expect_punct(";").pos;
            std::size_t from = offset_of(text_, start);
            std::size_t to = offset_of(text_, end) + 1;
            string_type = std::string(text_.substr(from, to - from));
        }
        if (!peek().is_word("root"))
            fail_expected("'root'");
        next();
        blocks.push_back(feature());
        while (peek().kind != TokenKind::end)
            blocks.push_back(feature());
    }

private:
    const Token& peek() const
    {
        const Token& t = tokens_[at_];
        if (t.kind == TokenKind::error)
            throw Failure{t.pos, t.text};
        return t;
    }
    const Token& next()
    {
        const Token& t = peek();
        if (t.kind != TokenKind::end)
            ++at_;
        return t;
    }

    [[noreturn]] void fail_expected(const std::string& what) const
    {
        throw Failure{peek().pos, "expected " + what + ", found " + detail::describe(peek())};
    }

    const Token& expect_punct(std::string_view p)
    {
        if (!peek().is_punct(p))
            fail_expected("'" + std::string(p) + "'");
        return next();
    }
    void expect_word(std::string_view w)
    {
        if (!peek().is_word(w))
            fail_expected("'" + std::string(w) + "'");
        next();
    }
    bool accept_punct(std::string_view p)
    {
        if (!peek().is_punct(p))
            return false;
        next();
        return true;
    }

    std::string id(const std::string& what)
    {
        const Token& t = peek();
        if (t.kind != TokenKind::word || !is_tvl_id(t.text))
            fail_expected(what);
        return next().text;
    }

    Block feature()
    {
        Block b;
        b.pos = peek().pos;
        b.id = id("a feature identifier");
        expect_punct("{");
        while (peek().is_word("int") || peek().is_word("real") || peek().is_word("bool") ||
               peek().is_word("string"))
            b.attributes.push_back(attribute());
        while (peek().is_word("group"))
            b.groups.push_back(group());
        while (!peek().is_punct("}")) {
            ConstraintDecl c;
            c.pos = peek().pos;
            c.left = id("a feature identifier, a group or '}'");
            if (peek().is_word("requires"))
                c.kind = ConstraintKind::requires_;
            else if (peek().is_word("excludes"))
                c.kind = ConstraintKind::excludes;
            else
                fail_expected("'requires' or 'excludes'");
            next();
            c.right = id("a feature identifier");
            expect_punct(";");
            b.constraints.push_back(std::move(c));
        }
        next();
        return b;
    }

    AttributeDecl attribute()
    {
        std::string type = next().text;
        AttributeDecl a;
        a.pos = peek().pos;
        const Token& name = peek();
        if (name.kind != TokenKind::word || !detail::is_lower(name.text[0]) || !is_tvl_id(name.text))
            fail_expected("an attribute identifier");
        a.name = next().text;
        expect_word("is");
        if (type == "int" || type == "real") {
            bool negative = false;
            if (peek().is_punct("+") || peek().is_punct("-"))
                negative = next().text == "-";
            const Token& num = peek();
            if (type == "int" && num.kind == TokenKind::integer)
                a.value = AttributeValue(negative ? -num.integer : num.integer);
            else if (type == "real" && num.kind == TokenKind::real)
                a.value = AttributeValue(negative ? -num.real : num.real);
            else
                fail_expected(type == "int" ? "an integer literal" : "a real literal");
            next();
        } else if (type == "bool") {
            if (!peek().is_word("true") && !peek().is_word("false"))
                fail_expected("'true' or 'false'");
            a.value = AttributeValue(next().text == "true");
        } else {
            if (peek().kind != TokenKind::string)
                fail_expected("a string literal");
            a.value = AttributeValue(next().text);
        }
        expect_punct(";");
        return a;
    }

    Group group()
    {
        Group g;
        g.pos = next().pos;
        bool allof = false;
        if (peek().is_word("allof"))
            allof = true;
        else if (peek().is_word("oneof"))
            g.kind = DecompKind::alternative;
        else if (peek().is_word("someof"))
            g.kind = DecompKind::or_;
        else
            fail_expected("'allof', 'oneof' or 'someof'");
        next();
        expect_punct("{");
        do {
            bool opt = false;
            if (allof && peek().is_word("opt")) {
                next();
                opt = true;
            }
            g.members.emplace_back(id("a feature identifier"), opt);
        } while (accept_punct(","));
        expect_punct("}");
        return g;
    }

    std::string_view text_;
    std::vector<Token> tokens_;
    std::size_t at_ = 0;
};

struct Placement {
    std::string parent;
    DecompKind decomp;
    std::optional<std::string> sibling;
    SourcePos pos;
};

Result<Declarations, Diagnostics> to_declarations(const std::vector<Block>& blocks)
{
    Diagnostics diags;
    std::map<std::string, const Block*> by_id;
    for (const auto& b : blocks)
        if (!by_id.emplace(b.id, &b).second)
            diags.push_back({b.pos, "feature \"" + b.id + "\" is declared more than once"});

    std::map<std::string, Placement> placement;
    for (const auto& b : blocks) {
        for (const auto& g : b.groups) {
            for (std::size_t i = 0; i < g.members.size(); ++i) {
                const auto& [child, opt] = g.members[i];
                if (!by_id.count(child)) {
                    diags.push_back({g.pos, "unknown child ID \"" + child + "\" in a group of \"" + b.id + "\""});
                    continue;
                }
                Placement p{b.id, DecompKind::mandatory, std::nullopt, g.pos};
                if (g.kind) {
                    p.decomp = *g.kind;
                    p.sibling = g.members[i == 0 && g.members.size() > 1 ? 1 : 0].first;
                } else if (opt) {
                    p.decomp = DecompKind::optional;
                }
                if (child == blocks.front().id)
                    diags.push_back({g.pos, "the root feature \"" + child + "\" cannot be a child"});
                else if (!placement.emplace(child, p).second)
                    diags.push_back({g.pos, "feature \"" + child + "\" is a child in more than one group"});
            }
        }
    }

    Declarations decls;
    decls.root.name = blocks.front().id;
    decls.root.attributes = blocks.front().attributes;
    decls.root.pos = blocks.front().pos;
    for (std::size_t i = 1; i < blocks.size(); ++i) {
        const Block& b = blocks[i];
        auto it = placement.find(b.id);
        if (it == placement.end()) {
            diags.push_back({b.pos, "feature \"" + b.id + "\" is not a child of any feature"});
            continue;
        }
        FeatureDecl f;
        f.name = b.id;
        f.parent = it->second.parent;
        f.decomp = it->second.decomp;
        f.group_sibling = it->second.sibling;
        f.attributes = b.attributes;
        f.pos = b.pos;
        decls.features.push_back(std::move(f));
    }
    for (const auto& b : blocks)
        decls.constraints.insert(decls.constraints.end(), b.constraints.begin(), b.constraints.end());
    if (!diags.empty())
        return diags;
    return decls;
}

void require_id(const std::string& text, const std::string& what)
{
    if (!is_tvl_id(text))
        throw TvlExportError(what + " \"" + text + "\" is not a valid TVL identifier");
}

} // namespace

Result<TvlDocument, Diagnostics> import_tvl(std::string_view text)
{
    TvlParser parser(text);
    try {
        parser.parse();
    } catch (const Failure& f) {
        return Diagnostics{{f.pos, f.message}};
    }
    auto decls = to_declarations(parser.blocks);
    if (!decls)
        return decls.error();
    auto model = build_model(*decls);
    if (!model)
        return model.error();
    return TvlDocument{std::move(model).value(), parser.string_type};
}

std::string export_tvl(const FeatureModel& model, const std::optional<std::string>& string_type)
{
    std::string out;
    if (string_type)
        out += *string_type + "\n";

    for (FeatureId id : model.subtree(model.root())) {
        const Feature& f = model.feature(id);
        require_id(f.name, "feature name");
        if (id == model.root())
            out += "root ";
        out += f.name + " {\n";
        for (const auto& a : f.attributes) {
            if (is_tvl_keyword(a.name))
                throw TvlExportError("attribute name \"" + a.name + "\" of feature \"" + f.name +
                                     "\" is a TVL keyword");
            static constexpr std::array<std::string_view, 4> types = {"int", "real", "bool", "string"};
            if (a.value.type() == ValueType::string && !is_representable_string(a.value.as_string()))
                throw TvlExportError("value of attribute \"" + a.name + "\" of feature \"" + f.name +
                                     "\" cannot be written as a string literal");
            out += "  " + std::string(types[static_cast<int>(a.value.type())]) + ' ' + a.name + " is " +
                   format_literal(a.value) + ";\n";
        }

        std::vector<FeatureId> solitary;
        std::map<int, std::vector<FeatureId>> groups;
        std::vector<int> group_order;
        for (FeatureId c : model.children(id)) {
            const Feature& child = model.feature(c);
            if (child.group_id == 0) {
                solitary.push_back(c);
            } else {
                auto& members = groups[child.group_id];
                if (members.empty())
                    group_order.push_back(child.group_id);
                members.push_back(c);
            }
        }
        auto list = [&](const std::vector<FeatureId>& ids, bool flags) {
            std::string s;
            for (std::size_t i = 0; i < ids.size(); ++i) {
                const Feature& c = model.feature(ids[i]);
                require_id(c.name, "feature name");
                if (i)
                    s += ", ";
                if (flags && c.decomp == DecompKind::optional)
                    s += "opt ";
                s += c.name;
            }
            return s;
        };
        if (!solitary.empty())
            out += "  group allof { " + list(solitary, true) + " }\n";
        for (int g : group_order) {
            const auto& members = groups[g];
            bool alternative = model.feature(members.front()).decomp == DecompKind::alternative;
            out += std::string("  group ") + (alternative ? "oneof" : "someof") + " { " + list(members, false) +
                   " }\n";
        }
        if (id == model.root())
            for (const auto& c : model.constraints())
                out += "  " + model.feature(c.left).name + ' ' + std::string(to_string(c.kind)) + ' ' +
                       model.feature(c.right).name + ";\n";
        out += "}\n";
    }
    return out;
}

} // namespace feather
