// Command-line front end. Subcommands: gen-dataset, train, shoot, simulate,
// eval-scaling, replay, bench-infer.
#pragma once

#include <iosfwd>

namespace tacnog {

/// Exit codes: 0 success, 1 domain error or failed check, 2 usage error.
/// Every subcommand prints its resolved configuration as a `config: {...}` line.
/// The seed comes from --seed, else the TACNOG_SEED environment variable, else 0.
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tacnog
