#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace typetree::cli {

/// Exit codes.
enum Exit { ok = 0, usage = 1, model = 2, numerical = 3 };

/// Runs the command line (args exclude the program name). Data goes to `out`
/// unless --out is given; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace typetree::cli
