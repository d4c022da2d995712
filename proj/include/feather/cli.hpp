#pragma once

#include "feather/commands.hpp"
#include "feather/syntax.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace feather {

/// Line-oriented listing of declarations and commands with every
/// expression in postfix order. For inspection only.
std::string dump_intermediate(const Declarations& decls, const std::vector<Command>& commands);

/// The option listing printed by `-h`.
std::string usage_text();

/// Runs the interpreter on command-line arguments (program name
/// excluded). Returns the process exit code: 0 on success, 1 when the run
/// halted or reported an error, 2 on usage, input or output failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace feather
