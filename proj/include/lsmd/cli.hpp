#pragma once

#include <ostream>

namespace lsmd {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitInternal = 1;

/// Subcommands: simulate, estimate, mc, relevance, asymptotics. Every
/// subcommand accepts --config FILE, a flat JSON object whose keys are the
/// long option names (dashes or underscores); flags given on the command line
/// take precedence and relative paths resolve against the file's directory.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lsmd
