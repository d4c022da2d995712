#include "feather/commands.hpp"

#include <algorithm>
#include <map>

namespace feather {

std::string_view to_string(Severity s) noexcept
{
    return s == Severity::warning ? "warning" : "error";
}

std::string Diagnostic::render() const
{
    return "cmd #" + std::to_string(command_index) + " (" + code + ") : " + message;
}

bool CommandOutcome::has_error() const noexcept
{
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::error; });
}

bool RunResult::has_error() const noexcept
{
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::error; });
}

namespace {

struct Reject {
    Severity severity;
    std::string message;
};

[[noreturn]] void reject_error(std::string message)
{
    throw Reject{Severity::error, std::move(message)};
}

std::string name_list(const FeatureModel& m, std::vector<FeatureId> ids)
{
    std::sort(ids.begin(), ids.end());
    std::string out = "(";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i)
            out += ", ";
        out += m.feature(ids[i]).name;
    }
    return out + ")";
}

std::string constraint_list(const FeatureModel& m, const std::vector<CrossTreeConstraint>& cs)
{
    std::string out;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        if (i)
            out += ", ";
        out += m.describe(cs[i]);
    }
    return out;
}

enum class Role { feature, parent, sibling };

using Tuples = std::vector<Tuple>;

// Planned feature update, derived against the pre-command model.
struct UpdatePlan {
    std::optional<std::string> name;
    std::optional<FeatureId> parent;
    std::optional<DecompKind> kind;
    bool kind_given = false;
    std::optional<FeatureId> sibling;
    std::vector<Attribute> attributes;

    bool structural() const { return parent.has_value() || kind_given; }
};

class Context {
public:
    Context(const FeatureModel& model, const Command& cmd) : model(model), cmd(cmd) {}

    const FeatureModel& model;
    const Command& cmd;
    ResolutionSet res;
    std::vector<Usage> usages;

    void precheck(const FeatureDesc& d, Role role) const
    {
        if (d.is_variable || model.find(d.text))
            return;
        std::string what = role == Role::parent ? "parent" : role == Role::sibling ? "sibling" : "feature";
        reject_error("The specified " + what + " (i.e., \"" + d.text + "\") does not exist");
    }

    void precheck(const DecompSpec& s) const
    {
        if (s.from)
            precheck(*s.from, Role::feature);
        if (s.sibling)
            precheck(*s.sibling, Role::sibling);
    }

    void precheck(const std::vector<AttrAssign>& attrs) const
    {
        for (const auto& a : attrs)
            if (a.value.kind == ValueKind::inherited)
                precheck(a.value.source, Role::feature);
    }

    void note_usages(const std::vector<AttrAssign>& attrs)
    {
        for (const auto& a : attrs) {
            std::vector<Usage> more;
            switch (a.value.kind) {
            case ValueKind::numeric: more = referenced_usages(a.value.expr, UsageContext::numeric); break;
            case ValueKind::boolean: more = referenced_usages(a.value.expr, UsageContext::boolean); break;
            case ValueKind::inherited:
                if (a.value.source.is_variable)
                    more.push_back({a.value.source.slot, a.value.source.text, StructuralAttr::none,
                                    a.value.source_attr, UsageContext::any});
                break;
            case ValueKind::string: break;
            }
            usages.insert(usages.end(), more.begin(), more.end());
        }
    }

    void note_usages(const DecompSpec& s)
    {
        if (s.from && s.from->is_variable)
            usages.push_back({s.from->slot, s.from->text, StructuralAttr::decomp, "", UsageContext::decomp});
        if (s.sibling && s.sibling->is_variable)
            usages.push_back({s.sibling->slot, s.sibling->text, StructuralAttr::decomp_id, "", UsageContext::decomp_id});
    }

    void resolve_all()
    {
        res = resolve(model, cmd.variables, cmd.where, usages);
        if (res.invariant_error)
            reject_error(res.invariant_error->message);
        if (res.empty())
            throw Reject{Severity::warning, "No resolutions could be found to satisfy the where clause"};
    }

    FeatureId feature_slot(const Tuples& tuples, const FeatureDesc& d, const std::string& ambiguity) const
    {
        auto der = derive<FeatureId>(tuples, [&](const Tuple& t) -> Result<FeatureId, EvalError> {
            if (auto id = feature_under(model, d, t))
                return *id;
            return EvalError{"The specified feature (i.e., \"" + d.text + "\") does not exist"};
        });
        check(der, [&] { return ambiguity + " " + name_list(model, der.values); });
        return der.value();
    }

    DecompKind kind_slot(const Tuples& tuples, const DecompSpec& s) const
    {
        if (s.kind)
            return *s.kind;
        auto der = derive<DecompKind>(tuples, [&](const Tuple& t) -> Result<DecompKind, EvalError> {
            const Feature& f = model.feature(*feature_under(model, *s.from, t));
            if (!f.decomp)
                return EvalError{"The root feature \"" + f.name + "\" has no decomposition relation"};
            return *f.decomp;
        });
        check(der, [] { return std::string("Command is ambiguous on what the new decomposition relation will be"); });
        return der.value();
    }

    // Representative of the group to join; all resolutions must agree on
    // the group itself.
    FeatureId sibling_slot(const Tuples& tuples, const FeatureDesc& sibling) const
    {
        auto der = derive<int>(tuples, [&](const Tuple& t) -> Result<int, EvalError> {
            return model.feature(*feature_under(model, sibling, t)).group_id;
        });
        check(der, [] { return std::string("Command is ambiguous on what the new decomposition relation will be"); });
        auto der_rep = derive<FeatureId>(tuples, [&](const Tuple& t) -> Result<FeatureId, EvalError> {
            return *feature_under(model, sibling, t);
        });
        return der_rep.values.front();
    }

    Attribute value_slot(const Tuples& tuples, const AttrAssign& a) const
    {
        const ValueSpec& v = a.value;
        if (v.kind == ValueKind::string)
            return {a.name, AttributeValue(v.text)};
        auto ambiguity = [&](const auto& values) {
            std::string list = "(";
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (i)
                    list += ", ";
                if constexpr (std::is_same_v<std::decay_t<decltype(values[i])>, Value>)
                    list += format_value(values[i]);
                else
                    list += format_literal(values[i]);
            }
            return "Command is ambiguous on what the value of attribute \"" + a.name + "\" will be " + list + ")";
        };
        if (v.kind == ValueKind::inherited) {
            auto der = derive<AttributeValue>(tuples, [&](const Tuple& t) -> Result<AttributeValue, EvalError> {
                const Feature& src = model.feature(*feature_under(model, v.source, t));
                if (const AttributeValue* found = src.find_attribute(v.source_attr))
                    return *found;
                return EvalError{"Feature \"" + src.name + "\" does not have an attribute named \"" + v.source_attr +
                                 "\""};
            });
            check(der, [&] { return ambiguity(der.values); });
            return {a.name, der.value()};
        }
        auto der = derive<Value>(tuples, [&](const Tuple& t) { return evaluate(v.expr, model, t); });
        check(der, [&] { return ambiguity(der.values); });
        const Value& value = der.value();
        ExprType type = type_of(value);
        bool ok = v.kind == ValueKind::numeric ? (type == ExprType::integer || type == ExprType::real)
                                               : type == ExprType::boolean;
        if (!ok)
            reject_error("Attribute \"" + a.name + "\" must receive a " + std::string(to_string(v.kind)) +
                         " value, not a " + std::string(to_string(type)) + " value");
        return {a.name, *to_attribute_value(value)};
    }

    template <class T, class Msg>
    void check(const Derivation<T>& der, Msg&& ambiguity) const
    {
        using S = typename Derivation<T>::Status;
        if (der.status == S::error)
            reject_error(der.error);
        if (der.status == S::ambiguous)
            reject_error(ambiguity());
        if (der.status == S::no_resolution)
            throw Reject{Severity::warning, "No resolutions could be found to satisfy the where clause"};
    }

    UpdatePlan plan_update(const Tuples& tuples, const FeatureUpdates& u, bool single) const
    {
        UpdatePlan plan;
        plan.name = u.name;
        if (u.parent)
            plan.parent = feature_slot(tuples, *u.parent,
                                       single ? "Command is ambiguous on what the new parent will be"
                                              : "Command is ambiguous on what the new parent will be");
        if (u.decomp) {
            plan.kind = kind_slot(tuples, *u.decomp);
            plan.kind_given = true;
            if (u.decomp->sibling)
                plan.sibling = sibling_slot(tuples, *u.decomp->sibling);
        }
        for (const auto& a : u.attributes)
            plan.attributes.push_back(value_slot(tuples, a));
        return plan;
    }

    Tuples tuples_with(int slot, FeatureId f) const
    {
        Tuples out;
        for (const auto& t : res.tuples)
            if (t[slot] == f)
                out.push_back(t);
        return out;
    }
};

// Why `sibling` cannot host a feature placed under `parent` with `kind`.
std::optional<std::string> misfit(const FeatureModel& m, FeatureId sibling, FeatureId parent, DecompKind kind)
{
    const Feature& s = m.feature(sibling);
    if (!is_group(kind))
        return "A " + std::string(to_string(kind)) + " relation cannot join the group of \"" + s.name + "\"";
    if (s.group_id == 0)
        return "The specified sibling (i.e., \"" + s.name + "\") is not in an alternative or or relation";
    if (s.parent != parent)
        return "The specified sibling (i.e., \"" + s.name + "\") is not a child of \"" + m.feature(parent).name + "\"";
    if (s.decomp != kind)
        return "The specified sibling (i.e., \"" + s.name + "\") is not in an " + std::string(to_string(kind)) +
               " relation";
    return std::nullopt;
}

// Applies a planned update to `f`. Every check runs before the first edit,
// so a returned reason means `m` is untouched.
std::optional<std::string> apply_update(FeatureModel& m, FeatureId f, const UpdatePlan& plan)
{
    const Feature& cur = m.feature(f);
    for (const auto& a : plan.attributes)
        if (!cur.find_attribute(a.name))
            return "Feature \"" + cur.name + "\" does not have an attribute named \"" + a.name + "\"";
    if (plan.name && *plan.name != cur.name && m.find(*plan.name))
        return "New feature name \"" + *plan.name + "\" is in use";

    std::optional<FeatureId> new_parent;
    DecompKind new_kind = DecompKind::mandatory;
    std::optional<int> join;
    if (plan.structural()) {
        if (f == m.root())
            return "The root feature \"" + cur.name + "\" cannot be moved or given a decomposition relation";
        new_parent = plan.parent.value_or(*cur.parent);
        new_kind = plan.kind.value_or(*cur.decomp);
        if (m.in_subtree(*new_parent, f))
            return "Moving \"" + cur.name + "\" under \"" + m.feature(*new_parent).name +
                   "\" would create a cycle";
        if (plan.sibling) {
            if (auto why = misfit(m, *plan.sibling, *new_parent, new_kind))
                return why;
            join = m.feature(*plan.sibling).group_id;
        } else if (is_group(new_kind) && !plan.kind_given && *new_parent == *cur.parent) {
            join = cur.group_id;
        }
    }

    if (new_parent)
        m.move_feature(f, *new_parent, new_kind, join);
    if (plan.name)
        m.rename_feature(f, *plan.name);
    for (const auto& a : plan.attributes)
        m.set_attribute(f, a.name, a.value);
    return std::nullopt;
}

template <class Body>
CommandOutcome guarded(FeatureModel& model, const Command& cmd, std::size_t index, Body&& body)
{
    CommandOutcome out;
    auto report = [&](Severity s, std::string message) {
        out.diagnostics.push_back({index, std::string(cmd.code()), s, std::move(message)});
    };
    try {
        FeatureModel work = model;
        Context ctx(model, cmd);
        out.effect = body(ctx, work, report);
        if (out.effect != Effect::none)
            model = std::move(work);
    } catch (const Reject& r) {
        out.effect = Effect::none;
        out.diagnostics.clear();
        report(r.severity, r.message);
    } catch (const ModelError& e) {
        out.effect = Effect::none;
        out.diagnostics.clear();
        report(Severity::error, e.what());
    }
    return out;
}

using Reporter = std::function<void(Severity, std::string)>;

} // namespace

CommandOutcome exec_add_feature(FeatureModel& model, const Command& cmd, std::size_t index)
{
    const auto& a = std::get<AddFeatureCmd>(cmd.body);
    return guarded(model, cmd, index, [&](Context& ctx, FeatureModel& work, auto&&) {
        ctx.precheck(a.parent, Role::parent);
        ctx.precheck(a.decomp);
        ctx.precheck(a.attributes);
        if (model.find(a.name))
            reject_error("Feature name \"" + a.name + "\" is in use");
        ctx.note_usages(a.attributes);
        ctx.note_usages(a.decomp);
        ctx.resolve_all();

        const Tuples& tuples = ctx.res.tuples;
        FeatureId parent = ctx.feature_slot(tuples, a.parent, "Command is ambiguous on what the parent will be");
        DecompKind kind = ctx.kind_slot(tuples, a.decomp);
        std::optional<int> join;
        if (a.decomp.sibling) {
            FeatureId sibling = ctx.sibling_slot(tuples, *a.decomp.sibling);
            if (auto why = misfit(model, sibling, parent, kind))
                reject_error(*why);
            join = model.feature(sibling).group_id;
        }
        std::vector<Attribute> attributes;
        for (const auto& assign : a.attributes)
            attributes.push_back(ctx.value_slot(tuples, assign));
        work.attach_feature(a.name, std::move(attributes), parent, kind, join);
        return Effect::applied;
    });
}

CommandOutcome exec_update_feature(FeatureModel& model, const Command& cmd, std::size_t index)
{
    const auto& u = std::get<UpdateFeatureCmd>(cmd.body);
    return guarded(model, cmd, index, [&](Context& ctx, FeatureModel& work, auto&& report) {
        ctx.precheck(u.target, Role::feature);
        if (u.updates.parent)
            ctx.precheck(*u.updates.parent, Role::parent);
        if (u.updates.decomp)
            ctx.precheck(*u.updates.decomp);
        ctx.precheck(u.updates.attributes);
        ctx.note_usages(u.updates.attributes);
        if (u.updates.decomp)
            ctx.note_usages(*u.updates.decomp);
        ctx.resolve_all();

        if (!u.all) {
            FeatureId target = ctx.feature_slot(ctx.res.tuples, u.target,
                                                "Command is ambiguous on which feature will be updated");
            UpdatePlan plan = ctx.plan_update(ctx.res.tuples, u.updates, true);
            if (auto why = apply_update(work, target, plan))
                reject_error(*why);
            return Effect::applied;
        }

        auto targets = described_features(model, u.target, ctx.res);
        std::vector<UpdatePlan> plans;
        for (FeatureId f : targets)
            plans.push_back(ctx.plan_update(ctx.tuples_with(u.target.slot, f), u.updates, false));
        std::vector<FeatureId> skipped;
        for (std::size_t i = 0; i < targets.size(); ++i)
            if (apply_update(work, targets[i], plans[i]))
                skipped.push_back(targets[i]);
        if (skipped.empty())
            return Effect::applied;
        bool none = skipped.size() == targets.size();
        report(Severity::warning, std::string(none ? "Command has no effect" : "Command has a partial effect") +
                                      "; skipped feature(s): " + name_list(model, skipped));
        return none ? Effect::none : Effect::partial;
    });
}

CommandOutcome exec_remove_feature(FeatureModel& model, const Command& cmd, std::size_t index)
{
    const auto& r = std::get<RemoveFeatureCmd>(cmd.body);
    return guarded(model, cmd, index, [&](Context& ctx, FeatureModel& work, auto&& report) {
        ctx.precheck(r.target, Role::feature);
        ctx.resolve_all();
        if (!r.all) {
            FeatureId target = ctx.feature_slot(ctx.res.tuples, r.target,
                                                "Command is ambiguous on which feature will be removed");
            if (target == model.root())
                reject_error("The root feature \"" + model.feature(target).name + "\" cannot be removed");
            work.remove_subtree(target);
            return Effect::applied;
        }
        auto targets = described_features(model, r.target, ctx.res);
        bool root_skipped = false;
        for (FeatureId f : targets) {
            if (f == model.root()) {
                root_skipped = true;
                continue;
            }
            if (work.contains(f))
                work.remove_subtree(f);
        }
        if (!root_skipped)
            return Effect::applied;
        bool none = targets.size() == 1;
        report(Severity::warning, std::string(none ? "Command has no effect" : "Command has a partial effect") +
                                      "; skipped feature(s): " + name_list(model, {model.root()}));
        return none ? Effect::none : Effect::partial;
    });
}

CommandOutcome exec_add_constraint(FeatureModel& model, const Command& cmd, std::size_t index)
{
    const auto& a = std::get<AddConstraintCmd>(cmd.body);
    return guarded(model, cmd, index, [&](Context& ctx, FeatureModel& work, auto&& report) {
        ctx.precheck(a.desc.left, Role::feature);
        ctx.precheck(a.desc.right, Role::feature);
        ctx.resolve_all();
        auto described = described_constraints(model, a.desc, ctx.res);
        for (const auto& c : described.absent)
            work.add_constraint(c);
        if (!described.present.empty())
            report(Severity::warning, "Following Cross-tree Constraint(s) already exist: " +
                                          constraint_list(model, described.present));
        return described.absent.empty() ? Effect::none : Effect::applied;
    });
}

CommandOutcome exec_update_constraint(FeatureModel& model, const Command& cmd, std::size_t index)
{
    const auto& u = std::get<UpdateConstraintCmd>(cmd.body);
    return guarded(model, cmd, index, [&](Context& ctx, FeatureModel& work, auto&&) {
        ctx.precheck(u.desc.left, Role::feature);
        ctx.precheck(u.desc.right, Role::feature);
        if (u.updates.left)
            ctx.precheck(*u.updates.left, Role::feature);
        if (u.updates.right)
            ctx.precheck(*u.updates.right, Role::feature);
        ctx.resolve_all();

        auto matches = described_constraints(model, u.desc, ctx.res).present;
        if (matches.empty())
            throw Reject{Severity::warning,
                         std::string("No constraints match the ") + (u.all ? "update all" : "update") + " command"};
        if (!u.all && matches.size() > 1)
            reject_error("Command is ambiguous on which constraint will be updated (" +
                         constraint_list(model, matches) + ")");

        std::vector<std::pair<CrossTreeConstraint, CrossTreeConstraint>> edits;
        for (const auto& stored : matches) {
            // Resolutions that describe this stored constraint, with the
            // orientation the description gives it.
            Tuples tuples;
            std::optional<CrossTreeConstraint> described;
            for (const auto& t : ctx.res.tuples) {
                auto l = feature_under(model, u.desc.left, t);
                auto r = feature_under(model, u.desc.right, t);
                CrossTreeConstraint c{*l, u.desc.kind, *r};
                if (!same_effect(c, stored))
                    continue;
                if (!described)
                    described = c;
                tuples.push_back(t);
            }
            CrossTreeConstraint next = *described;
            if (u.updates.left)
                next.left = ctx.feature_slot(tuples, *u.updates.left,
                                             "Command is ambiguous on what the new left-feature will be");
            if (u.updates.right)
                next.right = ctx.feature_slot(tuples, *u.updates.right,
                                              "Command is ambiguous on what the new right-feature will be");
            if (u.updates.kind)
                next.kind = *u.updates.kind;
            edits.emplace_back(stored, next);
        }
        for (const auto& [old_c, new_c] : edits)
            work.replace_constraint(old_c, new_c);
        return Effect::applied;
    });
}

CommandOutcome exec_remove_constraint(FeatureModel& model, const Command& cmd, std::size_t index)
{
    const auto& r = std::get<RemoveConstraintCmd>(cmd.body);
    return guarded(model, cmd, index, [&](Context& ctx, FeatureModel& work, auto&&) {
        ctx.precheck(r.desc.left, Role::feature);
        ctx.precheck(r.desc.right, Role::feature);
        ctx.resolve_all();
        auto matches = described_constraints(model, r.desc, ctx.res).present;
        if (matches.empty())
            throw Reject{Severity::warning,
                         std::string("No constraints match the ") + (r.all ? "remove all" : "remove") + " command"};
        if (!r.all && matches.size() > 1)
            reject_error("Command is ambiguous on which constraint will be removed (" +
                         constraint_list(model, matches) + ")");
        for (const auto& c : matches)
            work.remove_constraint(c);
        return Effect::applied;
    });
}

CommandOutcome execute_command(FeatureModel& model, const Command& cmd, std::size_t index)
{
    struct Dispatch {
        FeatureModel& model;
        const Command& cmd;
        std::size_t index;
        CommandOutcome operator()(const AddFeatureCmd&) const { return exec_add_feature(model, cmd, index); }
        CommandOutcome operator()(const UpdateFeatureCmd&) const { return exec_update_feature(model, cmd, index); }
        CommandOutcome operator()(const RemoveFeatureCmd&) const { return exec_remove_feature(model, cmd, index); }
        CommandOutcome operator()(const AddConstraintCmd&) const { return exec_add_constraint(model, cmd, index); }
        CommandOutcome operator()(const UpdateConstraintCmd&) const
        {
            return exec_update_constraint(model, cmd, index);
        }
        CommandOutcome operator()(const RemoveConstraintCmd&) const
        {
            return exec_remove_constraint(model, cmd, index);
        }
    };
    return std::visit(Dispatch{model, cmd, index}, cmd.body);
}

RunResult run_script(FeatureModel& model, const std::vector<Command>& commands, RunMode mode)
{
    RunResult out;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        CommandOutcome o = execute_command(model, commands[i], i + 1);
        ++out.executed;
        bool any = !o.diagnostics.empty();
        bool error = o.has_error();
        out.diagnostics.insert(out.diagnostics.end(), o.diagnostics.begin(), o.diagnostics.end());
        if ((mode == RunMode::stop_on_error && error) || (mode == RunMode::stop_on_warning && any)) {
            out.halted_at = i + 1;
            break;
        }
    }
    return out;
}

} // namespace feather
