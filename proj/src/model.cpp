#include "feather/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

namespace feather {

namespace {

bool is_structural_name(std::string_view text)
{
    return text == "_name" || text == "_parent" || text == "_decomp" || text == "_decompID";
}

void check_attributes(const std::vector<Attribute>& attributes)
{
    std::set<std::string_view> seen;
    for (const auto& a : attributes) {
        if (!is_attribute_identifier(a.name))
            throw ModelError("invalid attribute identifier '" + a.name + "'");
        if (!seen.insert(a.name).second)
            throw ModelError("duplicate attribute '" + a.name + "'");
    }
}

} // namespace

const AttributeValue* Feature::find_attribute(std::string_view attr) const noexcept
{
    for (const auto& a : attributes)
        if (a.name == attr)
            return &a.value;
    return nullptr;
}

AttributeValue* Feature::find_attribute(std::string_view attr) noexcept
{
    for (auto& a : attributes)
        if (a.name == attr)
            return &a.value;
    return nullptr;
}

bool same_effect(const CrossTreeConstraint& a, const CrossTreeConstraint& b) noexcept
{
    return canonical(a) == canonical(b);
}

CrossTreeConstraint canonical(const CrossTreeConstraint& c) noexcept
{
    if (c.kind == ConstraintKind::excludes && c.right < c.left)
        return {c.right, c.kind, c.left};
    return c;
}

bool is_attribute_identifier(std::string_view text) noexcept
{
    if (text.empty() || !(text[0] >= 'a' && text[0] <= 'z'))
        return false;
    for (char c : text) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
        if (!ok)
            return false;
    }
    return !is_structural_name(text);
}

FeatureModel::FeatureModel(std::string root_name, std::vector<Attribute> root_attributes)
{
    if (root_name.empty())
        throw ModelError("feature name must not be empty");
    check_attributes(root_attributes);
    Feature root;
    root.name = std::move(root_name);
    root.attributes = std::move(root_attributes);
    root_ = raw_insert(std::move(root));
}

const Feature& FeatureModel::feature(FeatureId id) const
{
    if (!contains(id))
        throw ModelError("unknown feature id " + std::to_string(id));
    return *slots_[id];
}

Feature& FeatureModel::mutable_feature(FeatureId id)
{
    if (!contains(id))
        throw ModelError("unknown feature id " + std::to_string(id));
    return *slots_[id];
}

std::optional<FeatureId> FeatureModel::find(const std::string& name) const
{
    auto it = by_name_.find(name);
    if (it == by_name_.end())
        return std::nullopt;
    return it->second;
}

std::vector<FeatureId> FeatureModel::feature_ids() const
{
    std::vector<FeatureId> ids;
    ids.reserve(live_count_);
    for (FeatureId id = 0; id < slots_.size(); ++id)
        if (slots_[id])
            ids.push_back(id);
    return ids;
}

std::vector<FeatureId> FeatureModel::children(FeatureId id) const
{
    std::vector<FeatureId> out;
    for (FeatureId c = 0; c < slots_.size(); ++c)
        if (slots_[c] && slots_[c]->parent == id)
            out.push_back(c);
    return out;
}

std::vector<FeatureId> FeatureModel::group_members(int group_id) const
{
    std::vector<FeatureId> out;
    if (group_id <= 0)
        return out;
    for (FeatureId c = 0; c < slots_.size(); ++c)
        if (slots_[c] && slots_[c]->group_id == group_id)
            out.push_back(c);
    return out;
}

std::vector<FeatureId> FeatureModel::subtree(FeatureId f) const
{
    feature(f);
    std::vector<std::vector<FeatureId>> kids(slots_.size());
    for (FeatureId c = 0; c < slots_.size(); ++c)
        if (slots_[c] && slots_[c]->parent && contains(*slots_[c]->parent))
            kids[*slots_[c]->parent].push_back(c);

    std::vector<FeatureId> order;
    std::vector<FeatureId> stack{f};
    std::vector<bool> seen(slots_.size(), false);
    while (!stack.empty()) {
        FeatureId cur = stack.back();
        stack.pop_back();
        if (seen[cur])
            continue;
        seen[cur] = true;
        order.push_back(cur);
        for (auto it = kids[cur].rbegin(); it != kids[cur].rend(); ++it)
            stack.push_back(*it);
    }
    return order;
}

bool FeatureModel::in_subtree(FeatureId candidate, FeatureId subtree_root) const
{
    std::optional<FeatureId> cur = candidate;
    for (std::size_t steps = 0; cur && steps <= slots_.size(); ++steps) {
        if (*cur == subtree_root)
            return true;
        if (!contains(*cur))
            return false;
        cur = slots_[*cur]->parent;
    }
    return false;
}

std::vector<CrossTreeConstraint> FeatureModel::involving_ctcs(FeatureId f) const
{
    feature(f);
    std::vector<CrossTreeConstraint> out;
    for (const auto& c : constraints_)
        if (c.left == f || c.right == f)
            out.push_back(c);
    return out;
}

std::vector<FeatureId> FeatureModel::remove_subtree(FeatureId f)
{
    feature(f);
    if (f == root_)
        throw ModelError("the root feature cannot be removed");
    auto removed = subtree(f);
    std::vector<bool> gone(slots_.size(), false);
    for (FeatureId id : removed)
        gone[id] = true;
    std::erase_if(constraints_, [&](const CrossTreeConstraint& c) { return gone[c.left] || gone[c.right]; });
    for (FeatureId id : removed) {
        by_name_.erase(slots_[id]->name);
        slots_[id].reset();
        --live_count_;
    }
    return removed;
}

int FeatureModel::assign_group(FeatureId self, FeatureId parent, DecompKind decomp,
                               std::optional<int> join_group)
{
    if (!is_group(decomp)) {
        if (join_group)
            throw ModelError("a " + std::string(to_string(decomp)) + " relation cannot join a group");
        return 0;
    }
    if (!join_group)
        return next_group_id_++;

    bool found = false;
    for (FeatureId m = 0; m < slots_.size(); ++m) {
        if (!slots_[m] || slots_[m]->group_id != *join_group)
            continue;
        found = true;
        if (m == self)
            continue;
        if (slots_[m]->parent != parent)
            throw ModelError("group " + std::to_string(*join_group) + " lives under a different parent");
        if (slots_[m]->decomp != decomp)
            throw ModelError("group " + std::to_string(*join_group) + " is not an " +
                             std::string(to_string(decomp)) + " group");
    }
    if (!found)
        throw ModelError("no group with id " + std::to_string(*join_group));
    return *join_group;
}

FeatureId FeatureModel::attach_feature(std::string name, std::vector<Attribute> attributes, FeatureId parent,
                                       DecompKind decomp, std::optional<int> join_group)
{
    if (name.empty())
        throw ModelError("feature name must not be empty");
    if (by_name_.count(name))
        throw ModelError("feature name \"" + name + "\" is in use");
    feature(parent);
    check_attributes(attributes);
    int group = assign_group(static_cast<FeatureId>(slots_.size()), parent, decomp, join_group);

    Feature f;
    f.name = std::move(name);
    f.parent = parent;
    f.decomp = decomp;
    f.group_id = group;
    f.attributes = std::move(attributes);
    return raw_insert(std::move(f));
}

void FeatureModel::move_feature(FeatureId f, FeatureId new_parent, DecompKind decomp,
                                std::optional<int> join_group)
{
    feature(f);
    feature(new_parent);
    if (f == root_)
        throw ModelError("the root feature cannot be moved");
    if (in_subtree(new_parent, f))
        throw ModelError("moving \"" + slots_[f]->name + "\" under \"" + slots_[new_parent]->name +
                         "\" would create a cycle");
    int group = assign_group(f, new_parent, decomp, join_group);
    Feature& target = *slots_[f];
    target.parent = new_parent;
    target.decomp = decomp;
    target.group_id = group;
}

void FeatureModel::rename_feature(FeatureId f, std::string new_name)
{
    Feature& target = mutable_feature(f);
    if (target.name == new_name)
        return;
    if (new_name.empty())
        throw ModelError("feature name must not be empty");
    if (by_name_.count(new_name))
        throw ModelError("feature name \"" + new_name + "\" is in use");
    by_name_.erase(target.name);
    target.name = std::move(new_name);
    by_name_.emplace(target.name, f);
}

void FeatureModel::set_attribute(FeatureId f, std::string_view attr, AttributeValue value)
{
    Feature& target = mutable_feature(f);
    AttributeValue* slot = target.find_attribute(attr);
    if (!slot)
        throw ModelError("feature \"" + target.name + "\" has no attribute '" + std::string(attr) + "'");
    *slot = std::move(value);
}

bool FeatureModel::has_constraint(const CrossTreeConstraint& c) const noexcept
{
    return find_constraint(c).has_value();
}

std::optional<CrossTreeConstraint> FeatureModel::find_constraint(const CrossTreeConstraint& c) const noexcept
{
    auto key = canonical(c);
    for (const auto& stored : constraints_)
        if (canonical(stored) == key)
            return stored;
    return std::nullopt;
}

bool FeatureModel::add_constraint(const CrossTreeConstraint& c)
{
    feature(c.left);
    feature(c.right);
    if (has_constraint(c))
        return false;
    constraints_.push_back(c);
    return true;
}

bool FeatureModel::remove_constraint(const CrossTreeConstraint& c)
{
    auto key = canonical(c);
    auto it = std::find_if(constraints_.begin(), constraints_.end(),
                           [&](const CrossTreeConstraint& s) { return canonical(s) == key; });
    if (it == constraints_.end())
        return false;
    constraints_.erase(it);
    return true;
}

void FeatureModel::replace_constraint(const CrossTreeConstraint& old_c, const CrossTreeConstraint& new_c)
{
    feature(new_c.left);
    feature(new_c.right);
    auto old_key = canonical(old_c);
    auto it = std::find_if(constraints_.begin(), constraints_.end(),
                           [&](const CrossTreeConstraint& s) { return canonical(s) == old_key; });
    if (it == constraints_.end())
        throw ModelError("constraint to replace does not exist");
    if (same_effect(old_c, new_c)) {
        *it = new_c;
        return;
    }
    if (has_constraint(new_c)) {
        constraints_.erase(it);
        return;
    }
    *it = new_c;
}

void FeatureModel::normalize_constraints()
{
    std::set<std::tuple<FeatureId, int, FeatureId>> seen;
    std::erase_if(constraints_, [&](const CrossTreeConstraint& c) {
        auto k = canonical(c);
        return !seen.emplace(k.left, static_cast<int>(k.kind), k.right).second;
    });
}

std::string FeatureModel::describe(const CrossTreeConstraint& c) const
{
    auto name_of = [&](FeatureId id) { return contains(id) ? slots_[id]->name : "<removed>"; };
    return "(" + name_of(c.left) + " " + std::string(to_string(c.kind)) + " " + name_of(c.right) + ")";
}

FeatureId FeatureModel::raw_insert(Feature f)
{
    auto id = static_cast<FeatureId>(slots_.size());
    by_name_.emplace(f.name, id);
    slots_.emplace_back(std::move(f));
    ++live_count_;
    return id;
}

Feature& FeatureModel::raw_feature(FeatureId id)
{
    return mutable_feature(id);
}

void FeatureModel::raw_reindex()
{
    by_name_.clear();
    live_count_ = 0;
    for (FeatureId id = 0; id < slots_.size(); ++id) {
        if (!slots_[id])
            continue;
        by_name_.emplace(slots_[id]->name, id);
        ++live_count_;
    }
}

std::vector<Violation> validate(const FeatureModel& model)
{
    std::vector<Violation> out;
    auto report = [&](std::string invariant, std::string element) {
        out.push_back({std::move(invariant), std::move(element)});
    };

    auto ids = model.feature_ids();
    if (!model.contains(model.root())) {
        report("root-exists", "root id " + std::to_string(model.root()));
        return out;
    }

    std::set<std::string> names;
    for (FeatureId id : ids) {
        const Feature& f = model.feature(id);
        if (f.name.empty())
            report("name-nonempty", "feature #" + std::to_string(id));
        if (!names.insert(f.name).second)
            report("name-unique", f.name);
        auto found = model.find(f.name);
        if (!found || *found != id)
            report("name-index", f.name);

        std::set<std::string_view> attr_names;
        for (const auto& a : f.attributes) {
            if (!is_attribute_identifier(a.name))
                report("attribute-identifier", f.name + "." + a.name);
            if (!attr_names.insert(a.name).second)
                report("attribute-unique", f.name + "." + a.name);
            if (a.value.type() == ValueType::real && !std::isfinite(a.value.as_real()))
                report("attribute-finite", f.name + "." + a.name);
        }

        if (id == model.root()) {
            if (f.parent || f.decomp || f.group_id != 0)
                report("root-detached", f.name);
            continue;
        }
        if (!f.parent) {
            report("single-root", f.name);
            continue;
        }
        if (!model.contains(*f.parent))
            report("parent-exists", f.name);
        if (!f.decomp) {
            report("decomp-present", f.name);
            continue;
        }
        if (is_group(*f.decomp) != (f.group_id > 0))
            report("group-id-matches-kind", f.name);
        if (f.group_id < 0 || f.group_id >= model.next_group_id())
            report("group-id-range", f.name);
    }

    // Every feature must reach the root through parent links.
    for (FeatureId id : ids) {
        std::optional<FeatureId> cur = id;
        std::size_t steps = 0;
        while (cur && *cur != model.root() && model.contains(*cur) && steps <= ids.size()) {
            cur = model.feature(*cur).parent;
            ++steps;
        }
        if (!cur || *cur != model.root())
            report(steps > ids.size() ? "acyclic" : "connected", model.feature(id).name);
    }

    std::map<int, std::pair<std::optional<FeatureId>, std::optional<DecompKind>>> groups;
    for (FeatureId id : ids) {
        const Feature& f = model.feature(id);
        if (f.group_id <= 0)
            continue;
        auto [it, inserted] = groups.emplace(f.group_id, std::make_pair(f.parent, f.decomp));
        if (!inserted && (it->second.first != f.parent || it->second.second != f.decomp))
            report("group-consistent", f.name + " in group " + std::to_string(f.group_id));
    }

    std::set<std::tuple<FeatureId, int, FeatureId>> seen;
    for (const auto& c : model.constraints()) {
        if (!model.contains(c.left) || !model.contains(c.right)) {
            report("constraint-endpoints", model.describe(c));
            continue;
        }
        auto k = canonical(c);
        if (!seen.emplace(k.left, static_cast<int>(k.kind), k.right).second)
            report("constraint-unique", model.describe(c));
    }
    return out;
}

bool isomorphic(const FeatureModel& a, const FeatureModel& b)
{
    if (a.size() != b.size() || a.constraints().size() != b.constraints().size())
        return false;
    if (a.feature(a.root()).name != b.feature(b.root()).name)
        return false;

    auto sorted_attributes = [](const Feature& f) {
        auto attrs = f.attributes;
        std::sort(attrs.begin(), attrs.end(), [](const Attribute& x, const Attribute& y) { return x.name < y.name; });
        return attrs;
    };

    std::map<int, int> a_to_b;
    std::map<int, int> b_to_a;
    for (FeatureId ia : a.feature_ids()) {
        const Feature& fa = a.feature(ia);
        auto ib = b.find(fa.name);
        if (!ib)
            return false;
        const Feature& fb = b.feature(*ib);
        if (fa.parent.has_value() != fb.parent.has_value())
            return false;
        if (fa.parent && a.feature(*fa.parent).name != b.feature(*fb.parent).name)
            return false;
        if (fa.decomp != fb.decomp)
            return false;
        if (sorted_attributes(fa) != sorted_attributes(fb))
            return false;
        if ((fa.group_id > 0) != (fb.group_id > 0))
            return false;
        if (fa.group_id > 0) {
            auto [ia_it, a_new] = a_to_b.emplace(fa.group_id, fb.group_id);
            auto [ib_it, b_new] = b_to_a.emplace(fb.group_id, fa.group_id);
            if (ia_it->second != fb.group_id || ib_it->second != fa.group_id)
                return false;
        }
    }

    auto effect_set = [](const FeatureModel& m) {
        std::set<std::tuple<std::string, int, std::string>> out;
        for (const auto& c : m.constraints()) {
            std::string l = m.feature(c.left).name;
            std::string r = m.feature(c.right).name;
            if (c.kind == ConstraintKind::excludes && r < l)
                std::swap(l, r);
            out.emplace(l, static_cast<int>(c.kind), r);
        }
        return out;
    };
    return effect_set(a) == effect_set(b);
}

} // namespace feather
