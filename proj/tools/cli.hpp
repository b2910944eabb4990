#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cyberseg::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kTimeout = 3,
};

/// Runs one subcommand. `args` excludes the program name. Results go to
/// `out` as a single JSON document, diagnostics and summaries to `err`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace cyberseg::cli
