#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tokmerge {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsageError = 2;

/// Entry point of the `tokmerge` tool. `args[0]` is the program name.
/// Reports go to `out` as JSON; diagnostics go to `err`.
///
///   match    --input F --method M --r R [--importance F2] [--protect i,j]
///            [--seed S] [--ensemble average|softmax] [--iterations T] [--timing]
///   expect   --n N --layers L --r R
///   simulate --n N --layers L --r R --trials T --seed S --method cgsm|bipartite
///   schedule --n0 N --layers L
///   flops    [--config F]
///   bench    --sizes 64,128,... [--dim D] [--repeats K] [--seed S]
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tokmerge
