#ifndef CHIRALCMT_TOOLS_CLI_HPP
#define CHIRALCMT_TOOLS_CLI_HPP

#include <iosfwd>

namespace chiralcmt::cli
{

enum ExitCode : int
{
    kExitOk = 0,
    kExitUsage = 2,
    kExitData = 3,
    kExitNumerical = 4,
};

// Entry point of the `chiralcmt` tool. Subcommands: simulate, fit, eigen,
// pulse, analyze, sweep. Normal output goes to out, diagnostics to err.
int cli_main(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace chiralcmt::cli

#endif
