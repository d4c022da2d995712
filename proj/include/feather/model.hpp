#pragma once

#include "feather/value.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace feather {

/// Stable handle of a feature inside one model. Ids follow insertion
/// order and are never reused, so they double as "declaration order".
using FeatureId = std::uint32_t;

struct Attribute {
    std::string name;
    AttributeValue value;

    friend bool operator==(const Attribute&, const Attribute&) = default;
};

/// A node of the feature tree. The four structural attributes of the
/// language map to `name`, `parent`, `decomp` and `group_id`.
struct Feature {
    std::string name;
    std::optional<FeatureId> parent; ///< absent only on the root
    std::optional<DecompKind> decomp; ///< absent only on the root
    int group_id = 0; ///< 0 for solitary relations, > 0 for group members
    std::vector<Attribute> attributes; ///< declaration order

    const AttributeValue* find_attribute(std::string_view attr) const noexcept;
    AttributeValue* find_attribute(std::string_view attr) noexcept;
};

struct CrossTreeConstraint {
    FeatureId left;
    ConstraintKind kind;
    FeatureId right;

    friend bool operator==(const CrossTreeConstraint&, const CrossTreeConstraint&) = default;
};

/// True when both constraints have the same effect: identical, or two
/// excludes with swapped endpoints.
bool same_effect(const CrossTreeConstraint& a, const CrossTreeConstraint& b) noexcept;

/// Canonical representative of a constraint's effect class.
CrossTreeConstraint canonical(const CrossTreeConstraint& c) noexcept;

/// Violation of a precondition of a model primitive.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Attribute identifiers start with a lowercase letter and continue with
/// letters, digits and underscores.
bool is_attribute_identifier(std::string_view text) noexcept;

/// The feature tree plus its cross-tree constraints. A plain value: copy
/// it to snapshot, assign it back to roll back.
class FeatureModel {
public:
    FeatureModel() = default;
    explicit FeatureModel(std::string root_name, std::vector<Attribute> root_attributes = {});

    FeatureId root() const noexcept { return root_; }
    std::size_t size() const noexcept { return live_count_; }

    bool contains(FeatureId id) const noexcept
    {
        return id < slots_.size() && slots_[id].has_value();
    }
    const Feature& feature(FeatureId id) const;
    std::optional<FeatureId> find(const std::string& name) const;

    /// Upper bound for ids; iterate `0..id_bound()` and skip dead slots via
    /// `contains`, or use `feature_ids`.
    FeatureId id_bound() const noexcept { return static_cast<FeatureId>(slots_.size()); }
    std::vector<FeatureId> feature_ids() const;

    /// Children of `id` in id order.
    std::vector<FeatureId> children(FeatureId id) const;
    /// Members of a group in id order.
    std::vector<FeatureId> group_members(int group_id) const;

    const std::vector<CrossTreeConstraint>& constraints() const noexcept { return constraints_; }
    int next_group_id() const noexcept { return next_group_id_; }

    /// `f` plus every transitive descendant, in preorder.
    std::vector<FeatureId> subtree(FeatureId f) const;
    bool in_subtree(FeatureId candidate, FeatureId subtree_root) const;
    std::vector<CrossTreeConstraint> involving_ctcs(FeatureId f) const;

    /// Removes `f`, its descendants and every constraint touching them.
    /// Returns the removed ids in preorder.
    std::vector<FeatureId> remove_subtree(FeatureId f);

    /// Inserts a new feature under `parent`. With `join_group` the feature
    /// joins that existing group; a group kind without it opens a fresh one.
    FeatureId attach_feature(std::string name, std::vector<Attribute> attributes, FeatureId parent,
                             DecompKind decomp, std::optional<int> join_group = std::nullopt);

    /// Reparents `f` (its subtree follows) and resets its relation the same
    /// way attach_feature does.
    void move_feature(FeatureId f, FeatureId new_parent, DecompKind decomp,
                      std::optional<int> join_group = std::nullopt);

    void rename_feature(FeatureId f, std::string new_name);
    /// Replaces the value of an existing attribute; never adds one.
    void set_attribute(FeatureId f, std::string_view attr, AttributeValue value);

    bool has_constraint(const CrossTreeConstraint& c) const noexcept;
    /// The stored constraint with the same effect as `c`, if any.
    std::optional<CrossTreeConstraint> find_constraint(const CrossTreeConstraint& c) const noexcept;
    /// Adds `c` unless a same-effect constraint exists. Returns true if added.
    bool add_constraint(const CrossTreeConstraint& c);
    /// Removes the stored constraint with the same effect. Returns true if found.
    bool remove_constraint(const CrossTreeConstraint& c);
    /// Replaces `old_c` in place by `new_c`; when `new_c` already exists the
    /// old one is just dropped.
    void replace_constraint(const CrossTreeConstraint& old_c, const CrossTreeConstraint& new_c);
    /// Collapses same-effect duplicates, keeping the first occurrence.
    void normalize_constraints();

    std::string describe(const CrossTreeConstraint& c) const;

    // Unchecked access. These bypass every invariant; the declaration
    // builder and corruption tests use them, `validate` reports the damage.
    FeatureId raw_insert(Feature f);
    Feature& raw_feature(FeatureId id);
    std::vector<CrossTreeConstraint>& raw_constraints() noexcept { return constraints_; }
    void raw_set_root(FeatureId id) noexcept { root_ = id; }
    void raw_set_next_group_id(int next) noexcept { next_group_id_ = next; }
    void raw_reindex();

private:
    Feature& mutable_feature(FeatureId id);
    int assign_group(FeatureId self, FeatureId parent, DecompKind decomp, std::optional<int> join_group);

    std::vector<std::optional<Feature>> slots_;
    std::unordered_map<std::string, FeatureId> by_name_;
    std::vector<CrossTreeConstraint> constraints_;
    FeatureId root_ = 0;
    std::size_t live_count_ = 0;
    int next_group_id_ = 1;
};

struct Violation {
    std::string invariant;
    std::string element;
};

/// Checks every structural invariant of the model. Empty means valid.
std::vector<Violation> validate(const FeatureModel& model);

/// Structural equality up to ids and group-id relabelling: same names,
/// parents, relation kinds, attribute values, group partition and
/// constraint effect set.
bool isomorphic(const FeatureModel& a, const FeatureModel& b);

} // namespace feather
