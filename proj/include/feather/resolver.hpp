#pragma once

#include "feather/expression.hpp"
#include "feather/script.hpp"

#include <optional>
#include <string>
#include <vector>

namespace feather {

using Tuple = std::vector<FeatureId>;

/// All tuples of features that can replace a command's variables.
struct ResolutionSet {
    std::vector<std::string> variables;
    /// Sorted lexicographically by feature id, in variable order.
    std::vector<Tuple> tuples;
    /// Set when a variable-free part of the where clause could not be
    /// evaluated; no tuple can satisfy the clause then.
    std::optional<EvalError> invariant_error;

    bool empty() const noexcept { return tuples.empty(); }
};

/// Features admissible for `slot` under every usage that mentions it.
std::vector<FeatureId> candidate_domain(const FeatureModel& model, int slot, const std::vector<Usage>& usages);

/// Joint resolution of `variables` against `where` (empty means true).
/// `extra_usages` narrows the domains further (attributes a command reads
/// outside its where clause).
ResolutionSet resolve(const FeatureModel& model, const std::vector<std::string>& variables, const Expression& where,
                      const std::vector<Usage>& extra_usages = {});

/// Features a descriptor stands for under the resolutions: the literal
/// feature when it exists, else the projection of the variable's slot.
std::vector<FeatureId> described_features(const FeatureModel& model, const FeatureDesc& desc,
                                          const ResolutionSet& resolutions);

/// Feature a descriptor denotes under one tuple, if any.
std::optional<FeatureId> feature_under(const FeatureModel& model, const FeatureDesc& desc, const Tuple& tuple);

struct DescribedConstraints {
    /// Stored constraints matched by some candidate, in stored order.
    std::vector<CrossTreeConstraint> present;
    /// Candidates with no stored same-effect constraint, deduplicated.
    std::vector<CrossTreeConstraint> absent;
};

DescribedConstraints described_constraints(const FeatureModel& model, const ConstraintDesc& desc,
                                           const ResolutionSet& resolutions);

/// Outcome of deriving one slot value across resolutions.
template <class T>
struct Derivation {
    enum class Status { unique, ambiguous, no_resolution, error };
    Status status = Status::no_resolution;
    std::vector<T> values; ///< the single value, or every distinct value in tuple order
    std::string error;

    bool unique() const noexcept { return status == Status::unique; }
    const T& value() const { return values.front(); }
};

/// Evaluates `fn` under every tuple and checks that all agree. The first
/// evaluation error aborts the derivation.
template <class T, class Tuples, class Fn>
Derivation<T> derive(const Tuples& tuples, Fn&& fn)
{
    Derivation<T> d;
    for (const Tuple& t : tuples) {
        auto r = fn(t);
        if (!r) {
            d.status = Derivation<T>::Status::error;
            d.values.clear();
            d.error = r.error().message;
            return d;
        }
        bool seen = false;
        for (const auto& v : d.values)
            if (v == r.value()) {
                seen = true;
                break;
            }
        if (!seen)
            d.values.push_back(r.value());
    }
    if (d.values.empty())
        d.status = Derivation<T>::Status::no_resolution;
    else
        d.status = d.values.size() == 1 ? Derivation<T>::Status::unique : Derivation<T>::Status::ambiguous;
    return d;
}

/// Value of `slot` across all resolutions: unique, ambiguous (distinct
/// values listed) or no resolution.
Derivation<Value> derive_unambiguous(const ResolutionSet& resolutions, const Expression& slot,
                                     const FeatureModel& model);

} // namespace feather
