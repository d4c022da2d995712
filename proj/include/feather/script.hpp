#pragma once

#include "feather/expression.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace feather {

struct SourcePos {
    int line = 0;
    int column = 0;

    friend bool operator==(SourcePos, SourcePos) = default;
};

// ---------------------------------------------------------------------------
// Declarations

struct AttributeDecl {
    std::string name;
    AttributeValue value;
    SourcePos pos;
};

struct RootDecl {
    std::string name;
    std::vector<AttributeDecl> attributes;
    SourcePos pos;
};

struct FeatureDecl {
    std::string name;
    std::string parent;
    DecompKind decomp = DecompKind::mandatory;
    std::optional<std::string> group_sibling; ///< set iff decomp is a group kind
    std::vector<AttributeDecl> attributes;
    SourcePos pos;
};

struct ConstraintDecl {
    std::string left;
    ConstraintKind kind = ConstraintKind::requires_;
    std::string right;
    SourcePos pos;
};

struct Declarations {
    RootDecl root;
    std::vector<FeatureDecl> features;
    std::vector<ConstraintDecl> constraints;
};

// ---------------------------------------------------------------------------
// Commands

/// `_decomp = <kind> [to <sibling>]` where the kind is a literal or
/// `<desc>._decomp`.
struct DecompSpec {
    std::optional<DecompKind> kind;  ///< literal kind
    std::optional<FeatureDesc> from; ///< `<desc>._decomp`
    std::optional<FeatureDesc> sibling;
};

enum class ValueKind { inherited, numeric, boolean, string };

std::string_view to_string(ValueKind kind) noexcept;

/// Right-hand side of `attr = <kind> : <value>`.
struct ValueSpec {
    ValueKind kind = ValueKind::numeric;
    Expression expr;          ///< numeric and boolean
    std::string text;         ///< string
    FeatureDesc source;       ///< inherited
    std::string source_attr;  ///< inherited
};

struct AttrAssign {
    std::string name;
    ValueSpec value;
    SourcePos pos;
};

struct AddFeatureCmd {
    std::string name;
    FeatureDesc parent; ///< a variable here stands for `V._name`
    DecompSpec decomp;
    std::vector<AttrAssign> attributes;
};

/// One `x = ...` item of a set list, kept so repeated items can be reported.
struct UpdatePart {
    std::string target;
    SourcePos pos;
};

struct FeatureUpdates {
    std::vector<UpdatePart> parts;
    std::optional<std::string> name;
    std::optional<FeatureDesc> parent;
    std::optional<DecompSpec> decomp;
    std::vector<AttrAssign> attributes;
};

struct UpdateFeatureCmd {
    bool all = false;
    FeatureDesc target;
    FeatureUpdates updates;
};

struct RemoveFeatureCmd {
    bool all = false;
    FeatureDesc target;
};

struct ConstraintDesc {
    FeatureDesc left;
    ConstraintKind kind = ConstraintKind::requires_;
    FeatureDesc right;
};

struct ConstraintUpdates {
    std::vector<UpdatePart> parts;
    std::optional<FeatureDesc> left;
    std::optional<ConstraintKind> kind;
    std::optional<FeatureDesc> right;
};

struct AddConstraintCmd {
    ConstraintDesc desc;
};

struct UpdateConstraintCmd {
    bool all = false;
    ConstraintDesc desc;
    ConstraintUpdates updates;
};

struct RemoveConstraintCmd {
    bool all = false;
    ConstraintDesc desc;
};

using CommandBody = std::variant<AddFeatureCmd, UpdateFeatureCmd, RemoveFeatureCmd, AddConstraintCmd,
                                 UpdateConstraintCmd, RemoveConstraintCmd>;

struct Command {
    CommandBody body;
    Expression where; ///< empty when the clause is absent
    /// Variable names by slot, in order of first appearance.
    std::vector<std::string> variables;
    SourcePos pos;

    /// Short code used in diagnostics: addf, upf, upmf, rmf, rmmf, addc,
    /// upc, upmc, rmc, rmmc.
    std::string_view code() const noexcept;
};

struct Script {
    Declarations declarations;
    bool has_declarations = false;
    std::vector<Command> commands;
};

} // namespace feather
