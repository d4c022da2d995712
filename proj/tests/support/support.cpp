#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#ifndef FEATHER_FIXTURE_DIR
#error "FEATHER_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace feather::testing {

std::string fixture_path(const std::string& name)
{
    return std::string(FEATHER_FIXTURE_DIR) + "/" + name;
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

namespace {

std::string joined(const Diagnostics& diags)
{
    std::string out;
    for (const auto& d : diags)
        out += d.render() + "\n";
    return out;
}

} // namespace

FeatureModel model_from_text(const std::string& declarations)
{
    auto decls = parse_declarations(declarations);
    if (!decls)
        throw std::runtime_error("bad declarations:\n" + joined(decls.error()));
    auto model = build_model(*decls);
    if (!model)
        throw std::runtime_error("cannot build model:\n" + joined(model.error()));
    return std::move(model).value();
}

FeatureModel load_model(const std::string& name)
{
    return model_from_text(read_text(fixture_path(name)));
}

std::vector<Command> commands_from_text(const std::string& text)
{
    auto cmds = parse_commands(text);
    if (!cmds)
        throw std::runtime_error("bad commands:\n" + joined(cmds.error()) + text);
    if (auto diags = validate_static(*cmds); !diags.empty())
        throw std::runtime_error("invalid commands:\n" + joined(diags) + text);
    return *cmds;
}

Command command_from_text(const std::string& text)
{
    auto cmds = commands_from_text(text);
    if (cmds.size() != 1)
        throw std::runtime_error("expected exactly one command");
    return cmds.front();
}

CommandOutcome run(FeatureModel& model, const std::string& command_text)
{
    return execute_command(model, command_from_text(command_text));
}

std::vector<std::string> names(const FeatureModel& m, const std::vector<FeatureId>& ids)
{
    std::vector<std::string> out;
    for (FeatureId id : ids)
        out.push_back(m.feature(id).name);
    return out;
}

std::vector<std::string> child_names(const FeatureModel& m, const std::string& parent)
{
    return names(m, m.children(*m.find(parent)));
}

// ---------------------------------------------------------------------------

namespace {

template <class T>
const T& pick(Rng& rng, const std::vector<T>& items)
{
    return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
}

int roll(Rng& rng, int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

bool chance(Rng& rng, double p)
{
    return std::bernoulli_distribution(p)(rng);
}

const std::vector<std::string> attribute_pool = {"a", "b", "c", "d", "e", "f"};
const std::vector<std::string> string_pool = {"x", "y", "basic", "fun"};

// Each pool attribute has a usual type so that random clauses hit often;
// a minority of features disagree.
ValueType usual_type(const std::string& attr)
{
    if (attr == "c")
        return ValueType::real;
    if (attr == "d")
        return ValueType::boolean;
    if (attr == "e")
        return ValueType::string;
    return ValueType::integer;
}

AttributeValue random_value(Rng& rng, ValueType type)
{
    switch (type) {
    case ValueType::integer: return AttributeValue(std::int64_t{roll(rng, -3, 9)});
    case ValueType::real: return AttributeValue(roll(rng, -6, 20) / 2.0);
    case ValueType::boolean: return AttributeValue(chance(rng, 0.5));
    case ValueType::string: return AttributeValue(pick(rng, string_pool));
    }
    return {};
}

std::vector<Attribute> random_attributes(Rng& rng, int max_attributes)
{
    std::vector<std::string> pool = attribute_pool;
    std::shuffle(pool.begin(), pool.end(), rng);
    int count = roll(rng, 0, std::min<int>(max_attributes, static_cast<int>(pool.size())));
    std::vector<Attribute> out;
    for (int i = 0; i < count; ++i) {
        ValueType type = usual_type(pool[i]);
        if (chance(rng, 0.15))
            type = static_cast<ValueType>(roll(rng, 0, 3));
        out.push_back({pool[i], random_value(rng, type)});
    }
    return out;
}

std::string feature_label(Rng& rng, int index, bool fancy)
{
    if (!fancy)
        return "F" + std::to_string(index);
    switch (roll(rng, 0, 3)) {
    case 0: return "Node " + std::to_string(index);
    case 1: return "F-" + std::to_string(index);
    case 2: return "Don't " + std::to_string(index);
    default: return "F" + std::to_string(index);
    }
}

} // namespace

FeatureModel random_model(Rng& rng, const ModelShape& shape)
{
    FeatureModel m(feature_label(rng, 0, shape.fancy_names), random_attributes(rng, shape.max_attributes));
    int n = roll(rng, 1, shape.max_features);
    std::vector<FeatureId> ids{m.root()};
    for (int i = 1; i < n; ++i) {
        FeatureId parent = pick(rng, ids);
        auto kind = static_cast<DecompKind>(roll(rng, 0, 3));
        std::optional<int> join;
        if (is_group(kind) && chance(rng, 0.6)) {
            for (FeatureId c : m.children(parent)) {
                const Feature& sib = m.feature(c);
                if (sib.decomp == kind && sib.group_id > 0) {
                    join = sib.group_id;
                    break;
                }
            }
        }
        ids.push_back(m.attach_feature(feature_label(rng, i, shape.fancy_names),
                                       random_attributes(rng, shape.max_attributes), parent, kind, join));
    }
    int constraints = roll(rng, 0, std::min(shape.max_constraints, n));
    for (int i = 0; i < constraints; ++i)
        m.add_constraint({pick(rng, ids), chance(rng, 0.5) ? ConstraintKind::requires_ : ConstraintKind::excludes,
                          pick(rng, ids)});
    return m;
}

// ---------------------------------------------------------------------------

namespace {

class ClauseWriter {
public:
    ClauseWriter(Rng& rng, const FeatureModel& model, const std::vector<std::string>& variables)
        : rng_(rng), model_(model), variables_(variables)
    {
        for (FeatureId id : model.feature_ids())
            names_.push_back(model.feature(id).name);
    }

    std::string boolean(int depth)
    {
        int choice = roll(rng_, 0, depth > 0 ? 9 : 5);
        switch (choice) {
        case 0:
        case 1: return arith(depth - 1) + ' ' + pick(rng_, relops_) + ' ' + arith(depth - 1);
        case 2: return string_term() + ' ' + eqop() + ' ' + string_operand();
        case 3:
            if (chance(rng_, 0.5))
                return var() + "._decomp " + eqop() + ' ' + pick(rng_, kinds_);
            return var() + "._decomp " + eqop() + ' ' + var() + "._decomp";
        case 4:
            if (chance(rng_, 0.6))
                return var() + "._decompID " + eqop() + ' ' + var() + "._decompID";
            return var() + "._parent " + eqop() + ' ' + var() + "._name";
        case 5:
            switch (roll(rng_, 0, 2)) {
            case 0: return var() + ".d";
            case 1: return var() + ".d " + eqop() + (chance(rng_, 0.5) ? " true" : " false");
            default: return chance(rng_, 0.8) ? "true" : "false";
            }
        case 6: return "not (" + boolean(depth - 1) + ")";
        case 7:
        case 8: return "(" + boolean(depth - 1) + ") and (" + boolean(depth - 1) + ")";
        default: return "(" + boolean(depth - 1) + ") or (" + boolean(depth - 1) + ")";
        }
    }

    std::string arith(int depth)
    {
        int choice = roll(rng_, 0, depth > 0 ? 7 : 3);
        switch (choice) {
        case 0: return std::to_string(roll(rng_, -2, 9));
        case 1: return std::to_string(roll(rng_, 0, 9)) + ".5";
        case 2:
        case 3:
            if (chance(rng_, 0.1))
                return '"' + pick(rng_, names_) + "\"." + numeric_attr();
            return var() + '.' + numeric_attr();
        case 4: return "-" + arith(depth - 1);
        default:
            return "(" + arith(depth - 1) + ' ' + pick(rng_, arithops_) + ' ' + arith(depth - 1) + ")";
        }
    }

private:
    std::string var() { return pick(rng_, variables_); }
    std::string eqop() { return chance(rng_, 0.7) ? "=" : "<>"; }
    std::string numeric_attr() { return pick(rng_, numeric_attrs_); }

    std::string string_term()
    {
        switch (roll(rng_, 0, 2)) {
        case 0: return var() + "._name";
        case 1: return var() + "._parent";
        default: return var() + ".e";
        }
    }

    std::string string_operand()
    {
        if (chance(rng_, 0.3))
            return string_term();
        if (chance(rng_, 0.6))
            return '"' + pick(rng_, names_) + '"';
        return '"' + pick(rng_, string_pool) + '"';
    }

    Rng& rng_;
    const FeatureModel& model_;
    const std::vector<std::string>& variables_;
    std::vector<std::string> names_;
    const std::vector<std::string> relops_ = {"<", "<=", ">", ">=", "=", "<>"};
    const std::vector<std::string> arithops_ = {"+", "-", "*", "/", "%"};
    const std::vector<std::string> kinds_ = {"mandatory", "optional", "alternative", "or"};
    const std::vector<std::string> numeric_attrs_ = {"a", "b", "c", "f", "d"};
};

} // namespace

std::string random_where(Rng& rng, const FeatureModel& model, const std::vector<std::string>& variables, int depth)
{
    ClauseWriter w(rng, model, variables);
    return w.boolean(depth);
}

std::vector<std::vector<FeatureId>> naive_resolve(const FeatureModel& model, std::size_t variable_count,
                                                  const Expression& where)
{
    std::vector<FeatureId> all = model.feature_ids();
    std::vector<std::vector<FeatureId>> out;
    std::vector<std::size_t> odometer(variable_count, 0);
    std::vector<FeatureId> tuple(variable_count);
    while (true) {
        for (std::size_t i = 0; i < variable_count; ++i)
            tuple[i] = all[odometer[i]];
        bool keep = true;
        if (!where.empty()) {
            auto v = evaluate(where, model, tuple);
            keep = v && std::holds_alternative<bool>(*v) && std::get<bool>(*v);
        }
        if (keep)
            out.push_back(tuple);
        std::size_t i = variable_count;
        while (i > 0) {
            --i;
            if (++odometer[i] < all.size())
                break;
            odometer[i] = 0;
            if (i == 0)
                return out;
        }
        if (variable_count == 0)
            return out;
    }
}

// ---------------------------------------------------------------------------

namespace {

class CommandWriter {
public:
    CommandWriter(Rng& rng, const FeatureModel& model) : rng_(rng), model_(model)
    {
        for (FeatureId id : model.feature_ids())
            names_.push_back(model.feature(id).name);
    }

    std::string write()
    {
        std::string body;
        switch (roll(rng_, 0, 9)) {
        case 0: body = add_feature(); break;
        case 1: body = "update feature " + desc() + " set " + feature_updates(true); break;
        case 2: body = "updateall feature " + use("P") + " set " + feature_updates(false); break;
        case 3: body = "remove feature " + desc(0.4); break;
        case 4: body = "removeall feature " + use("P"); break;
        case 5: body = "add constraint " + constraint_desc(); break;
        case 6: body = "update constraint " + constraint_desc() + " set " + constraint_updates(3); break;
        case 7: body = "updateall constraint " + constraint_desc() + " set " + constraint_updates(2); break;
        case 8: body = "remove constraint " + constraint_desc(); break;
        default: body = "removeall constraint " + constraint_desc(); break;
        }
        return body + where() + ";";
    }

private:
    std::string use(const std::string& v)
    {
        if (std::find(used_.begin(), used_.end(), v) == used_.end())
            used_.push_back(v);
        return v;
    }

    std::string literal()
    {
        if (chance(rng_, 0.05))
            return "\"Ghost\"";
        return '"' + pick(rng_, names_) + '"';
    }

    std::string desc(double variable_odds = 0.5)
    {
        if (chance(rng_, variable_odds))
            return use(pick(rng_, vars_));
        return literal();
    }

    std::string name_desc()
    {
        if (chance(rng_, 0.5))
            return use(pick(rng_, vars_)) + "._name";
        return literal();
    }

    std::string decomp_value()
    {
        std::string kind;
        if (chance(rng_, 0.15))
            kind = use(pick(rng_, vars_)) + "._decomp";
        else
            kind = pick(rng_, kinds_);
        if ((kind == "alternative" || kind == "or" || kind.find('.') != std::string::npos) && chance(rng_, 0.4))
            kind += " to " + desc();
        return kind;
    }

    std::string value_assignment(const std::string& attr)
    {
        ClauseWriter w(rng_, model_, vars_);
        switch (roll(rng_, 0, 5)) {
        case 0: return attr + " = string: \"" + pick(rng_, string_pool) + '"';
        case 1: return attr + " = boolean: " + (chance(rng_, 0.5) ? "true" : "false");
        case 2: return attr + " = inherited: " + desc() + '.' + pick(rng_, attribute_pool);
        case 3: {
            // Expressions over variables; the variables count as used.
            std::string e = w.arith(1);
            note_variables(e);
            return attr + " = numeric: " + e;
        }
        default: return attr + " = numeric: " + std::to_string(roll(rng_, -5, 20));
        }
    }

    void note_variables(const std::string& text)
    {
        for (const auto& v : vars_)
            if (text.find(v + ".") != std::string::npos)
                use(v);
    }

    std::string add_feature()
    {
        std::string name = chance(rng_, 0.8) ? "New " + std::to_string(roll(rng_, 0, 999999)) : pick(rng_, names_);
        std::string out = "add feature \"" + name + "\" with attributes (_parent = " + name_desc() +
                          ", _decomp = " + decomp_value();
        std::vector<std::string> pool = attribute_pool;
        std::shuffle(pool.begin(), pool.end(), rng_);
        int count = roll(rng_, 0, 2);
        for (int i = 0; i < count; ++i)
            out += ", " + value_assignment(pool[i]);
        return out + ")";
    }

    std::string feature_updates(bool allow_name)
    {
        std::vector<std::string> parts;
        if (allow_name && chance(rng_, 0.2))
            parts.push_back("_name = \"" + (chance(rng_, 0.5) ? "Renamed " + std::to_string(roll(rng_, 0, 99999))
                                                              : pick(rng_, names_)) + '"');
        if (chance(rng_, 0.4))
            parts.push_back("_parent = " + name_desc());
        if (chance(rng_, 0.4))
            parts.push_back("_decomp = " + decomp_value());
        std::vector<std::string> pool = attribute_pool;
        std::shuffle(pool.begin(), pool.end(), rng_);
        int count = roll(rng_, parts.empty() ? 1 : 0, 2);
        for (int i = 0; i < count; ++i)
            parts.push_back(value_assignment(pool[i]));
        std::string out;
        for (std::size_t i = 0; i < parts.size(); ++i)
            out += (i ? ", " : "") + parts[i];
        return out;
    }

    std::string constraint_desc()
    {
        return desc() + (chance(rng_, 0.5) ? " requires " : " excludes ") + desc();
    }

    std::string constraint_updates(int max_parts)
    {
        std::vector<std::string> parts = {"leftfeature = " + desc(),
                                          std::string("constrainttype = ") +
                                              (chance(rng_, 0.5) ? "requires" : "excludes"),
                                          "rightfeature = " + desc()};
        std::shuffle(parts.begin(), parts.end(), rng_);
        int count = roll(rng_, 1, max_parts);
        std::string out;
        for (int i = 0; i < count; ++i)
            out += (i ? ", " : "") + parts[i];
        return out;
    }

    std::string where()
    {
        if (used_.empty())
            return chance(rng_, 0.1) ? std::string(" where ") + (chance(rng_, 0.5) ? "1 < 2" : "1 > 2") : "";
        ClauseWriter w(rng_, model_, used_);
        std::string clause = w.boolean(2);
        // Narrow the first variable to a few names so that commands resolve
        // to small, often unambiguous sets.
        if (chance(rng_, 0.6))
            clause = "(" + clause + ") or " + used_.front() + "._name = \"" + pick(rng_, names_) + '"';
        if (chance(rng_, 0.5))
            clause = used_.front() + "._name = \"" + pick(rng_, names_) + "\" and (" + clause + ")";
        return " where " + clause;
    }

    Rng& rng_;
    const FeatureModel& model_;
    std::vector<std::string> names_;
    std::vector<std::string> used_;
    const std::vector<std::string> vars_ = {"P", "Q", "R"};
    const std::vector<std::string> kinds_ = {"mandatory", "optional", "alternative", "or"};
};

} // namespace

std::string random_command(Rng& rng, const FeatureModel& model)
{
    return CommandWriter(rng, model).write();
}

// ---------------------------------------------------------------------------

TvlSample random_tvl(Rng& rng, int max_features)
{
    int n = roll(rng, 1, max_features);
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i)
        ids.push_back((chance(rng, 0.5) ? "F" : "node_") + std::to_string(i));

    struct GroupSpec {
        std::string kind; // allof, oneof, someof
        std::vector<int> members;
        std::vector<bool> opt;
    };
    std::vector<std::vector<GroupSpec>> groups(n);
    for (int i = 1; i < n; ++i) {
        int parent = roll(rng, 0, i - 1);
        auto& gs = groups[parent];
        int choice = roll(rng, 0, 3);
        if (!gs.empty() && choice == 0) {
            auto& g = gs[roll(rng, 0, static_cast<int>(gs.size()) - 1)];
            g.members.push_back(i);
            g.opt.push_back(chance(rng, 0.5));
            continue;
        }
        static const char* kinds[] = {"allof", "oneof", "someof"};
        GroupSpec g{kinds[roll(rng, 0, 2)], {i}, {chance(rng, 0.5)}};
        // The export lists solitary children in a single allof, so keep
        // one allof per parent here as well to mirror real inputs.
        if (g.kind == "allof") {
            auto it = std::find_if(gs.begin(), gs.end(), [](const GroupSpec& s) { return s.kind == "allof"; });
            if (it != gs.end()) {
                it->members.push_back(i);
                it->opt.push_back(g.opt.front());
                continue;
            }
        }
        gs.push_back(std::move(g));
    }

    std::vector<std::string> local_constraints(n);
    std::set<std::tuple<int, int, int>> effects;
    int constraint_count = roll(rng, 0, n);
    for (int i = 0; i < constraint_count; ++i) {
        int l = roll(rng, 0, n - 1);
        int r = roll(rng, 0, n - 1);
        bool excludes = chance(rng, 0.5);
        effects.insert(excludes ? std::make_tuple(std::min(l, r), 1, std::max(l, r)) : std::make_tuple(l, 0, r));
        local_constraints[roll(rng, 0, n - 1)] +=
            "  " + ids[l] + (excludes ? " excludes " : " requires ") + ids[r] + ";\n";
    }

    std::vector<std::string> blocks(n);
    for (int i = 0; i < n; ++i) {
        std::string b = (i == 0 ? "root " : "") + ids[i] + " {\n";
        int attrs = roll(rng, 0, 4);
        for (int a = 0; a < attrs; ++a) {
            std::string name = attribute_pool[a];
            switch (roll(rng, 0, 3)) {
            case 0: b += "  int " + name + " is " + std::to_string(roll(rng, -50, 50)) + ";\n"; break;
            case 1: b += "  real " + name + " is " + std::to_string(roll(rng, -9, 9)) + ".25;\n"; break;
            case 2: b += "  bool " + name + " is " + (chance(rng, 0.5) ? "true" : "false") + ";\n"; break;
            default: b += "  string " + name + " is \"" + pick(rng, string_pool) + "\";\n"; break;
            }
        }
        for (const auto& g : groups[i]) {
            b += "  group " + g.kind + " { ";
            for (std::size_t k = 0; k < g.members.size(); ++k) {
                b += k ? ", " : "";
                if (g.kind == "allof" && g.opt[k])
                    b += "opt ";
                b += ids[g.members[k]];
            }
            b += " }\n";
        }
        b += local_constraints[i] + "}\n";
        blocks[i] = b;
    }
    std::vector<int> order(n - 1);
    for (int i = 1; i < n; ++i)
        order[i - 1] = i;
    std::shuffle(order.begin(), order.end(), rng);

    TvlSample s;
    if (chance(rng, 0.3))
        s.text = "enum string in { \"x\", \"y\" };\n";
    s.text += blocks[0];
    for (int i : order)
        s.text += blocks[i];
    s.features = static_cast<std::size_t>(n);
    s.constraints = effects.size();
    return s;
}

// ---------------------------------------------------------------------------

PartsCatalog computer_parts_catalog(unsigned seed)
{
    PartsCatalog c;
    c.top_categories = {"CPU",     "Motherboard", "Memory",   "Storage", "Graphics Card",   "Power Supply",
                        "Case",    "Cooling",     "Monitor",  "Keyboard", "Mouse", "Operating System"};
    Rng rng(seed);
    std::string& d = c.declarations;
    d = "root \"Computer\";\n";
    for (const auto& top : c.top_categories)
        d += "feature \"" + top + "\" \"Computer\" mandatory attribute varPoint true;\n";
    for (std::size_t t = 0; t < c.top_categories.size(); ++t)
        for (int s = 1; s <= 5; ++s) {
            std::string sub = c.top_categories[t] + " - Line " + std::to_string(s);
            c.subcategories.push_back(sub);
            d += "feature \"" + sub + "\" \"" + c.top_categories[t] + "\" " + (s == 1 ? "mandatory" : "optional") +
                 " attribute varPoint true;\n";
        }
    // 1,154 parts: the first 14 lines hold 20 parts, the other 46 hold 19.
    int part = 0;
    for (std::size_t s = 0; s < c.subcategories.size(); ++s) {
        int count = s < 14 ? 20 : 19;
        std::string first;
        bool alternative = s % 3 == 0;
        for (int k = 0; k < count; ++k, ++part) {
            char name[32];
            std::snprintf(name, sizeof name, "Part %04d", part);
            int category = roll(rng, 1, 5);
            int rating = part < 600 ? roll(rng, 0, 200) : -1;
            c.price_category.push_back(category);
            c.rating.push_back(rating);
            d += "feature \"" + std::string(name) + "\" \"" + c.subcategories[s] + "\" ";
            if (alternative) {
                d += "alternative to \"" + (first.empty() ? std::string(name) : first) + "\"";
                if (first.empty())
                    first = name;
            } else {
                d += "optional";
            }
            d += " attribute priceCat " + std::to_string(category);
            d += " attribute price " + std::to_string(category * 100 + roll(rng, 0, 99)) + ".5";
            if (rating >= 0)
                d += " attribute rating " + std::to_string(rating);
            d += ";\n";
        }
    }
    c.features = 1 + c.top_categories.size() + c.subcategories.size() + static_cast<std::size_t>(part);
    return c;
}

namespace {

const char* const price_names[5] = {"Pricing - Economy", "Pricing - Standard", "Pricing - Plus", "Pricing - High",
                                    "Pricing - Ultra"};
const char* const performance_names[5] = {"Performance - Entry", "Performance - Standard", "Performance - Plus",
                                          "Performance - High", "Performance - Ultra"};

} // namespace

std::string price_restructuring_script(const PartsCatalog& catalog)
{
    std::string s = "add feature \"Configuration Assistant\"\n"
                    "  with attributes (\n    _parent = \"Computer\",\n    _decomp = mandatory);\n";
    for (int k = 5; k >= 1; --k)
        s += "add feature \"" + std::string(price_names[k - 1]) +
             "\"\n  with attributes (\n    _parent = \"Configuration Assistant\",\n    _decomp = alternative,\n"
             "    priceCategory = numeric : " +
             std::to_string(k) + ");\n";
    for (int k = 5; k >= 1; --k)
        s += "updateall feature F\n  set _parent = \"" + std::string(price_names[k - 1]) +
             "\"\n  where F.priceCat = " + std::to_string(k) + ";\n";
    // Thirty product lines go first, then whole categories.
    int removed_lines = 0;
    for (std::size_t i = 0; i < catalog.subcategories.size() && removed_lines < 30; ++i)
        if (i % 5 == 1 || i % 5 == 2 || i % 5 == 3) {
            s += "remove feature \"" + catalog.subcategories[i] + "\";\n";
            ++removed_lines;
        }
    for (const auto& top : catalog.top_categories)
        s += "remove feature \"" + top + "\";\n";
    return s;
}

std::string category_constraints_script()
{
    std::string s = "add feature \"Configuration Assistant\"\n"
                    "  with attributes (\n    _parent = \"Computer\",\n    _decomp = mandatory);\n"
                    "add feature \"CA - Pricing\" with attributes (_parent = \"Configuration Assistant\", "
                    "_decomp = mandatory);\n"
                    "add feature \"CA - Performance\" with attributes (_parent = \"Configuration Assistant\", "
                    "_decomp = mandatory);\n";
    for (int k = 5; k >= 1; --k)
        s += "add feature \"" + std::string(price_names[k - 1]) +
             "\" with attributes (_parent = \"CA - Pricing\", _decomp = alternative, priceCategory = numeric : " +
             std::to_string(k) + ");\n";
    for (int k = 5; k >= 1; --k)
        s += "add feature \"" + std::string(performance_names[k - 1]) +
             "\"\n  with attributes (\n    _parent = \"CA - Performance\",\n    _decomp = alternative,\n"
             "    perfMax = numeric : " +
             std::to_string(performance_bands[k - 1][1]) + ",\n    perfMin = numeric : " +
             std::to_string(performance_bands[k - 1][0]) + ");\n";
    s += "add constraint F excludes G\n  where F.priceCategory <> G.priceCat;\n"
         "add constraint F excludes G\n  where G.rating > F.perfMax\n  or   G.rating < F.perfMin;\n";
    return s;
}

// ---------------------------------------------------------------------------
// Property checks shared by the unit tests and the acceptance run

namespace {

std::string quoted(const std::string& name)
{
    return '"' + name + '"';
}

std::string tuple_text(const FeatureModel& m, const std::vector<FeatureId>& t)
{
    std::string out = "(";
    for (std::size_t i = 0; i < t.size(); ++i)
        out += (i ? ", " : "") + m.feature(t[i]).name;
    return out + ")";
}

} // namespace

std::string resolver_trial(Rng& rng, const ModelShape& shape)
{
    FeatureModel m = random_model(rng, shape);
    static const std::vector<std::string> pool = {"X", "Y", "Z"};
    std::vector<std::string> vars(pool.begin(), pool.begin() + roll(rng, 1, 3));
    std::string text = random_where(rng, m, vars, roll(rng, 1, 4));
    std::vector<std::string> slots = vars;
    auto where = parse_expression(text, &slots);
    if (!where)
        return "generated clause does not parse: " + text + "\n" + joined(where.error());
    if (slots.size() != vars.size())
        return "unexpected variables in " + text;
    auto got = resolve(m, vars, *where);
    auto want = naive_resolve(m, vars.size(), *where);
    if (got.tuples == want)
        return "";
    std::string msg = "resolver disagrees on: " + text + "\n  resolve: " + std::to_string(got.tuples.size()) +
                      " tuples, brute force: " + std::to_string(want.size());
    for (const auto& t : want)
        if (std::find(got.tuples.begin(), got.tuples.end(), t) == got.tuples.end()) {
            msg += "\n  missing " + tuple_text(m, t);
            break;
        }
    for (const auto& t : got.tuples)
        if (std::find(want.begin(), want.end(), t) == want.end()) {
            msg += "\n  extra " + tuple_text(m, t);
            break;
        }
    return msg;
}

std::string integrity_trial(Rng& rng, int commands, FuzzTally& tally, const ModelShape& shape)
{
    FeatureModel m = random_model(rng, shape);
    for (int i = 0; i < commands; ++i) {
        std::string text = random_command(rng, m);
        auto parsed = parse_commands(text);
        if (!parsed || !validate_static(*parsed).empty()) {
            ++tally.rejected_statically;
            continue;
        }
        const std::string before = serialize_declarations(m);
        CommandOutcome o = execute_command(m, parsed->front());
        ++tally.executed;
        if (o.effect == Effect::none)
            ++tally.no_effect;
        auto violations = validate(m);
        if (!violations.empty())
            return "invariant " + violations.front().invariant + " broken at " + violations.front().element +
                   " after: " + text;
        if (o.effect == Effect::none && serialize_declarations(m) != before)
            return "command without effect changed the model: " + text;
    }
    return "";
}

std::optional<MultiInstance> random_multi_instance(Rng& rng, const FeatureModel& m)
{
    std::vector<std::string> names_;
    for (FeatureId id : m.feature_ids())
        names_.push_back(m.feature(id).name);
    auto name = [&] { return quoted(pick(rng, names_)); };

    std::vector<std::string> vars = {"P"};
    std::string clause = random_where(rng, m, vars, roll(rng, 1, 3));
    std::vector<std::string> slots = vars;
    auto where = parse_expression(clause, &slots);
    if (!where || slots.size() != 1)
        return std::nullopt;
    auto tuples = naive_resolve(m, 1, *where);

    MultiInstance inst;
    switch (roll(rng, 0, 3)) {
    case 0: {
        std::vector<std::string> parts;
        if (chance(rng, 0.3))
            parts.push_back("_parent = " + name());
        if (chance(rng, 0.3)) {
            static const std::vector<std::string> kinds = {"mandatory", "optional", "alternative", "or"};
            std::string k = pick(rng, kinds);
            if ((k == "alternative" || k == "or") && chance(rng, 0.4))
                k += " to " + name();
            parts.push_back("_decomp = " + k);
        }
        std::vector<std::string> pool = attribute_pool;
        std::shuffle(pool.begin(), pool.end(), rng);
        int count = roll(rng, parts.empty() ? 1 : 0, 2);
        for (int i = 0; i < count; ++i) {
            switch (roll(rng, 0, 3)) {
            case 0: parts.push_back(pool[i] + " = numeric: " + std::to_string(roll(rng, -9, 9)) + " * 2"); break;
            case 1: parts.push_back(pool[i] + " = string: \"" + pick(rng, string_pool) + '"'); break;
            case 2: parts.push_back(pool[i] + " = boolean: 1 < 2"); break;
            default: parts.push_back(pool[i] + " = inherited: " + name() + '.' + pick(rng, attribute_pool)); break;
            }
        }
        std::string set;
        for (std::size_t i = 0; i < parts.size(); ++i)
            set += (i ? ", " : "") + parts[i];
        inst.multi = "updateall feature P set " + set + " where " + clause + ";";
        for (const auto& t : tuples)
            inst.singles.push_back("update feature " + quoted(m.feature(t[0]).name) + " set " + set + ";");
        break;
    }
    case 1:
        inst.multi = "removeall feature P where " + clause + ";";
        for (const auto& t : tuples)
            inst.singles.push_back("remove feature " + quoted(m.feature(t[0]).name) + ";");
        break;
    default: {
        // Constraint forms: P on one side, a literal on the other.
        bool left = chance(rng, 0.5);
        ConstraintKind kind = chance(rng, 0.5) ? ConstraintKind::requires_ : ConstraintKind::excludes;
        std::string other_name = pick(rng, names_);
        FeatureId other = *m.find(other_name);
        std::string k(to_string(kind));
        std::string desc = left ? "P " + k + ' ' + quoted(other_name) : quoted(other_name) + ' ' + k + " P";

        // Matches are visited in stored order; each single command keeps the
        // orientation of the description.
        std::vector<std::pair<std::size_t, CrossTreeConstraint>> matched;
        const auto& stored = m.constraints();
        for (const auto& t : tuples) {
            CrossTreeConstraint c = left ? CrossTreeConstraint{t[0], kind, other} : CrossTreeConstraint{other, kind, t[0]};
            auto it = std::find_if(stored.begin(), stored.end(), [&](const auto& x) { return same_effect(x, c); });
            if (it == stored.end())
                continue;
            std::size_t pos = static_cast<std::size_t>(it - stored.begin());
            if (std::none_of(matched.begin(), matched.end(), [&](const auto& x) { return x.first == pos; }))
                matched.emplace_back(pos, c);
        }
        std::sort(matched.begin(), matched.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        auto single_desc = [&](const std::pair<std::size_t, CrossTreeConstraint>& p) {
            const auto& c = p.second;
            return quoted(m.feature(c.left).name) + ' ' + std::string(to_string(c.kind)) + ' ' +
                   quoted(m.feature(c.right).name);
        };
        if (chance(rng, 0.5)) {
            inst.multi = "removeall constraint " + desc + " where " + clause + ";";
            for (const auto& c : matched)
                inst.singles.push_back("remove constraint " + single_desc(c) + ";");
        } else {
            std::vector<std::string> parts = {"leftfeature = " + name(), "rightfeature = " + name(),
                                              std::string("constrainttype = ") +
                                                  (chance(rng, 0.5) ? "requires" : "excludes")};
            std::shuffle(parts.begin(), parts.end(), rng);
            std::string set = parts[0] + (chance(rng, 0.5) ? ", " + parts[1] : "");
            inst.multi = "updateall constraint " + desc + " set " + set + " where " + clause + ";";
            for (const auto& c : matched)
                inst.singles.push_back("update constraint " + single_desc(c) + " set " + set + ";");
        }
        break;
    }
    }
    return inst;
}

std::string single_multi_trial(Rng& rng, bool* nontrivial, const ModelShape& shape)
{
    FeatureModel m = random_model(rng, shape);
    auto inst = random_multi_instance(rng, m);
    if (!inst)
        return "could not build an instance";
    auto multi = parse_commands(inst->multi);
    if (!multi)
        return "generated command does not parse: " + inst->multi + "\n" + joined(multi.error());
    FeatureModel a = m;
    CommandOutcome o = execute_command(a, multi->front());
    if (nontrivial)
        *nontrivial = !inst->singles.empty() && o.effect != Effect::none;
    FeatureModel b = m;
    for (const auto& text : inst->singles) {
        auto single = parse_commands(text);
        if (!single)
            return "expanded command does not parse: " + text + "\n" + joined(single.error());
        execute_command(b, single->front());
    }
    if (isomorphic(a, b))
        return "";
    std::string msg = "models differ after: " + inst->multi + "\nexpanded to:";
    for (const auto& text : inst->singles)
        msg += "\n  " + text;
    return msg + "\nstart:\n" + serialize_declarations(m) + "multi:\n" + serialize_declarations(a) +
           "singles:\n" + serialize_declarations(b);
}

std::string tvl_round_trip_trial(Rng& rng)
{
    TvlSample sample = random_tvl(rng);
    auto first = import_tvl(sample.text);
    if (!first)
        return "generated TVL rejected:\n" + sample.text + joined(first.error());
    if (first->model.size() != sample.features || first->model.constraints().size() != sample.constraints)
        return "imported sizes differ from the generator for:\n" + sample.text;
    std::string out = export_tvl(first->model, first->string_type);
    auto second = import_tvl(out);
    if (!second)
        return "exported TVL rejected:\n" + out + joined(second.error());
    if (!isomorphic(first->model, second->model))
        return "round trip changed the model:\n" + sample.text;
    return "";
}

} // namespace feather::testing
