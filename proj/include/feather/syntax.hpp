#pragma once

#include "feather/script.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace feather {

struct SourceDiagnostic {
    SourcePos pos;
    std::string message;

    std::string render() const;
};

using Diagnostics = std::vector<SourceDiagnostic>;

/// Declarations followed by commands; zero commands are accepted.
Result<Script, Diagnostics> parse_script(std::string_view text);
/// Declarations only.
Result<Declarations, Diagnostics> parse_declarations(std::string_view text);
/// Commands only.
Result<std::vector<Command>, Diagnostics> parse_commands(std::string_view text);
/// A standalone expression; variables get slots in order of appearance.
Result<Expression, Diagnostics> parse_expression(std::string_view text, std::vector<std::string>* variables = nullptr);

/// Checks that need the whole parse: repeated declarations and
/// attributes, constraint endpoints, repeated updates, and value
/// expressions of the wrong shape.
Diagnostics validate_static(const Declarations& decls);
Diagnostics validate_static(const std::vector<Command>& commands);
Diagnostics validate_static(const Script& script);

/// Builds the model from declarations in any order. Feature ids follow
/// declaration order; group ids follow the first declared member.
Result<FeatureModel, Diagnostics> build_model(const Declarations& decls);

/// Renders the model as declarations: root, features in preorder, then
/// constraints. Throws std::invalid_argument on names that cannot be
/// written as string literals.
std::string serialize_declarations(const FeatureModel& model);

/// Words with a fixed meaning in Feather scripts.
bool is_feather_keyword(std::string_view word) noexcept;

} // namespace feather
