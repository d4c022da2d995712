#include "feather/resolver.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

namespace feather {

std::vector<FeatureId> candidate_domain(const FeatureModel& model, int slot, const std::vector<Usage>& usages)
{
    std::vector<const Usage*> relevant;
    for (const auto& u : usages)
        if (u.slot == slot)
            relevant.push_back(&u);
    std::vector<FeatureId> out;
    for (FeatureId id = 0; id < model.id_bound(); ++id) {
        if (!model.contains(id))
            continue;
        bool ok = std::all_of(relevant.begin(), relevant.end(), [&](const Usage* u) { return admits(model, id, *u); });
        if (ok)
            out.push_back(id);
    }
    return out;
}

namespace {

class Search {
public:
    Search(const FeatureModel& model, const Expression& where, std::vector<std::vector<FeatureId>> domains,
           std::vector<int> order, std::vector<std::vector<int>> checks)
        : model_(model), where_(where), domains_(std::move(domains)), order_(std::move(order)),
          checks_(std::move(checks)), binding_(domains_.size(), 0)
    {
    }

    std::vector<Tuple> run()
    {
        step(0);
        std::sort(found_.begin(), found_.end());
        return std::move(found_);
    }

private:
    void step(std::size_t depth)
    {
        if (depth == order_.size()) {
            found_.push_back(binding_);
            return;
        }
        int var = order_[depth];
        for (FeatureId f : domains_[var]) {
            binding_[var] = f;
            bool ok = true;
            for (int conjunct : checks_[depth])
                if (!holds(where_, conjunct, model_, binding_)) {
                    ok = false;
                    break;
                }
            if (ok)
                step(depth + 1);
        }
    }

    const FeatureModel& model_;
    const Expression& where_;
    std::vector<std::vector<FeatureId>> domains_;
    std::vector<int> order_;
    std::vector<std::vector<int>> checks_;
    Tuple binding_;
    std::vector<Tuple> found_;
};

} // namespace

ResolutionSet resolve(const FeatureModel& model, const std::vector<std::string>& variables, const Expression& where,
                      const std::vector<Usage>& extra_usages)
{
    ResolutionSet out;
    out.variables = variables;
    const std::size_t n = variables.size();

    std::vector<Usage> usages = referenced_usages(where);
    usages.insert(usages.end(), extra_usages.begin(), extra_usages.end());

    std::vector<std::vector<FeatureId>> domains(n);
    for (std::size_t v = 0; v < n; ++v)
        domains[v] = candidate_domain(model, static_cast<int>(v), usages);

    // Conjuncts by arity: closed ones decide everything, single-variable
    // ones filter a domain, the rest are checked during the search.
    std::vector<int> multi;
    Tuple probe(n, 0);
    for (int c : where.conjuncts()) {
        auto slots = where.slots_under(c);
        if (slots.empty()) {
            auto v = evaluate_node(where, c, model, probe);
            if (!v) {
                out.invariant_error = v.error();
                return out;
            }
            if (!(type_of(*v) == ExprType::boolean && std::get<bool>(*v)))
                return out;
        } else if (slots.size() == 1) {
            auto& dom = domains[slots[0]];
            std::erase_if(dom, [&](FeatureId f) {
                probe[slots[0]] = f;
                return !holds(where, c, model, probe);
            });
        } else {
            multi.push_back(c);
        }
    }
    for (const auto& d : domains)
        if (d.empty())
            return out;

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return domains[a].size() < domains[b].size(); });
    std::vector<std::size_t> depth_of(n);
    for (std::size_t d = 0; d < n; ++d)
        depth_of[order[d]] = d;

    std::vector<std::vector<int>> checks(n);
    for (int c : multi) {
        std::size_t deepest = 0;
        for (int s : where.slots_under(c))
            deepest = std::max(deepest, depth_of[s]);
        checks[deepest].push_back(c);
    }

    if (n == 0) {
        out.tuples.push_back({});
        return out;
    }
    out.tuples = Search(model, where, std::move(domains), std::move(order), std::move(checks)).run();
    return out;
}

std::optional<FeatureId> feature_under(const FeatureModel& model, const FeatureDesc& desc, const Tuple& tuple)
{
    if (!desc.is_variable) {
        return model.find(desc.text);
    }
    if (desc.slot < 0 || static_cast<std::size_t>(desc.slot) >= tuple.size())
        return std::nullopt;
    return tuple[desc.slot];
}

std::vector<FeatureId> described_features(const FeatureModel& model, const FeatureDesc& desc,
                                          const ResolutionSet& resolutions)
{
    std::vector<FeatureId> out;
    if (!desc.is_variable) {
        if (auto id = model.find(desc.text))
            out.push_back(*id);
        return out;
    }
    for (const auto& t : resolutions.tuples)
        if (auto id = feature_under(model, desc, t))
            out.push_back(*id);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

DescribedConstraints described_constraints(const FeatureModel& model, const ConstraintDesc& desc,
                                           const ResolutionSet& resolutions)
{
    DescribedConstraints out;
    std::set<std::tuple<FeatureId, int, FeatureId>> present_keys;
    std::set<std::tuple<FeatureId, int, FeatureId>> absent_keys;
    for (const auto& t : resolutions.tuples) {
        auto l = feature_under(model, desc.left, t);
        auto r = feature_under(model, desc.right, t);
        if (!l || !r)
            continue;
        CrossTreeConstraint c{*l, desc.kind, *r};
        auto k = canonical(c);
        auto key = std::make_tuple(k.left, static_cast<int>(k.kind), k.right);
        if (model.has_constraint(c))
            present_keys.insert(key);
        else if (absent_keys.insert(key).second)
            out.absent.push_back(c);
    }
    for (const auto& stored : model.constraints()) {
        auto k = canonical(stored);
        if (present_keys.count(std::make_tuple(k.left, static_cast<int>(k.kind), k.right)))
            out.present.push_back(stored);
    }
    return out;
}

Derivation<Value> derive_unambiguous(const ResolutionSet& resolutions, const Expression& slot,
                                     const FeatureModel& model)
{
    return derive<Value>(resolutions.tuples, [&](const Tuple& t) { return evaluate(slot, model, t); });
}

} // namespace feather
