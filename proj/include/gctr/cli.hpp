#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gctr {

/// Command-line surface. Subcommands: validate, normalize, score, solve,
/// digest, extract, loop, render. Exit codes: 0 success, 1 domain error,
/// 2 usage error. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace gctr
