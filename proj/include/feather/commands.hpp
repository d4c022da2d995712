#pragma once

#include "feather/resolver.hpp"
#include "feather/script.hpp"

#include <optional>
#include <string>
#include <vector>

namespace feather {

enum class Severity { warning, error };

std::string_view to_string(Severity s) noexcept;

struct Diagnostic {
    std::size_t command_index = 0; ///< 1-based
    std::string code;
    Severity severity = Severity::error;
    std::string message;

    /// `cmd #<n> (<code>) : <message>`
    std::string render() const;
};

enum class Effect { applied, partial, none };

struct CommandOutcome {
    Effect effect = Effect::none;
    std::vector<Diagnostic> diagnostics;

    bool has_error() const noexcept;
};

/// Executes one command. The model is changed only when the outcome's
/// effect is applied or partial.
CommandOutcome execute_command(FeatureModel& model, const Command& cmd, std::size_t index = 1);

CommandOutcome exec_add_feature(FeatureModel& model, const Command& cmd, std::size_t index = 1);
CommandOutcome exec_update_feature(FeatureModel& model, const Command& cmd, std::size_t index = 1);
CommandOutcome exec_remove_feature(FeatureModel& model, const Command& cmd, std::size_t index = 1);
CommandOutcome exec_add_constraint(FeatureModel& model, const Command& cmd, std::size_t index = 1);
CommandOutcome exec_update_constraint(FeatureModel& model, const Command& cmd, std::size_t index = 1);
CommandOutcome exec_remove_constraint(FeatureModel& model, const Command& cmd, std::size_t index = 1);

enum class RunMode { ignore_all, stop_on_error, stop_on_warning };

struct RunResult {
    std::vector<Diagnostic> diagnostics;
    /// 1-based index of the command after which execution stopped.
    std::optional<std::size_t> halted_at;
    std::size_t executed = 0;

    bool has_error() const noexcept;
};

RunResult run_script(FeatureModel& model, const std::vector<Command>& commands, RunMode mode);

} // namespace feather
